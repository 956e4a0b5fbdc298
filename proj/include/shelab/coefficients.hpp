#pragma once

#include <cmath>
#include <string>

#include "shelab/errors.hpp"

namespace shelab {

/// Diffusion-coefficient family: the exact power x^gamma, or its Lipschitz
/// regularization sigma_n built from the even cutoff psi_n.
struct CoefficientSpec {
    double gamma = 0.5;
    int n = 0; // 0 means exact (no regularization), otherwise n >= 1

    bool is_regularized() const { return n >= 1; }

    static CoefficientSpec exact(double gamma) {
        check_gamma(gamma);
        return CoefficientSpec{gamma, 0};
    }

    static CoefficientSpec regularized(double gamma, int n) {
        check_gamma(gamma);
        if (n < 1) throw BadRange("CoefficientSpec: regularization index n must be >= 1");
        return CoefficientSpec{gamma, n};
    }

private:
    static void check_gamma(double gamma) {
        if (!(gamma > 0.0 && gamma < 1.0))
            throw BadRange("CoefficientSpec: gamma must lie in (0,1), got " +
                           std::to_string(gamma));
    }
};

/// x^gamma on x >= 0.
inline double sigma_exact(double x, double gamma) {
    if (x < 0.0)
        throw NegativeInput("sigma_exact: negative argument " + std::to_string(x));
    return std::pow(x, gamma);
}

/// Even C^1 cutoff: 1 on [-n, n], 0 outside (-(n+2), n+2), cubic smoothstep
/// in between. Max slope 3/4, so |psi'| <= 1.
inline double psi(double x, int n) {
    if (n < 1) throw BadRange("psi: n must be >= 1");
    const double a = std::abs(x);
    if (a <= static_cast<double>(n)) return 1.0;
    if (a >= static_cast<double>(n) + 2.0) return 0.0;
    const double t = (a - static_cast<double>(n)) / 2.0;
    return 1.0 - t * t * (3.0 - 2.0 * t);
}

/// sigma_n(x) = psi_n(x) * ( |x|^gamma           for |x| >  1/n,
///                           n^(1-gamma) |x|     for |x| <= 1/n ).
/// Lipschitz, nonnegative, sigma_n(0) = 0, and within
/// sigma_n_sup_error(spec) of |x|^gamma on [-n, n].
inline double sigma_n(double x, const CoefficientSpec& spec) {
    if (!spec.is_regularized())
        throw BadRange("sigma_n: spec is not regularized");
    const double a = std::abs(x);
    const double nr = static_cast<double>(spec.n);
    const double inner =
        (a > 1.0 / nr) ? std::pow(a, spec.gamma) : std::pow(nr, 1.0 - spec.gamma) * a;
    return psi(a, spec.n) * inner;
}

/// Bound B(n, gamma) = n^-gamma (gamma^(gamma/(1-gamma)) - gamma^(1/(1-gamma)))
/// on sup_{|x| <= n} |sigma_n(x) - |x|^gamma|. The sup is attained on the
/// linear branch at x = gamma^(1/(1-gamma)) / n.
inline double sigma_n_sup_error(const CoefficientSpec& spec) {
    if (!spec.is_regularized())
        throw BadRange("sigma_n_sup_error: spec is not regularized");
    const double g = spec.gamma;
    const double nr = static_cast<double>(spec.n);
    return std::pow(nr, -g) * (std::pow(g, g / (1.0 - g)) - std::pow(g, 1.0 / (1.0 - g)));
}

/// Coefficient used by the solver: exact power or regularized family.
/// Arguments are nonnegative by the solver's clamping contract.
inline double sigma(double x, const CoefficientSpec& spec) {
    return spec.is_regularized() ? sigma_n(x, spec) : sigma_exact(x, spec.gamma);
}

} // namespace shelab
