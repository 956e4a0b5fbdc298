#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

#include "shelab/errors.hpp"

namespace shelab {

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights (QUADPACK qk15 constants).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};

// Gauss-7 weights, aligned with kronrod nodes 1, 3, 5, 7.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
std::pair<double, double> gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double kronrod = 0.0;
    double gauss = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
        const double dx = h * kKronrodNodes[i];
        const double f_sym = (i == 7) ? f(c) : f(c - dx) + f(c + dx);
        kronrod += kKronrodWeights[i] * f_sym;
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * f_sym; // i=7 is the center, weight index 3
    }
    kronrod *= h;
    gauss *= h;
    return {kronrod, std::abs(kronrod - gauss)};
}

template <class F>
double adaptive(F&& f, double a, double b, double tol, int depth) {
    auto [value, err] = gk15(f, a, b);
    if (err <= tol || depth >= 48) return value;
    const double c = 0.5 * (a + b);
    return adaptive(f, a, c, 0.5 * tol, depth + 1) + adaptive(f, c, b, 0.5 * tol, depth + 1);
}

} // namespace detail

/// Adaptive Gauss-Kronrod (G7, K15) integration of f over [a, b] with
/// absolute tolerance abs_tol.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10) {
    if (a == b) return 0.0;
    if (b < a) return -integrate(std::forward<F>(f), b, a, abs_tol);
    return detail::adaptive(f, a, b, abs_tol, 0);
}

} // namespace shelab
