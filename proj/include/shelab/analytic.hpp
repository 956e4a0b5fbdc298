#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "shelab/errors.hpp"
#include "shelab/quadrature.hpp"

namespace shelab {

/// Arguments of the rate formulas: decay parameter lambda, time t, and the
/// lower-tail level a in (0,1).
struct RateQuery {
    double lambda = 1.0;
    double t = 1.0;
    double a = 0.5;

    void validate() const {
        if (!(lambda > 0.0)) throw BadRange("RateQuery: lambda must be > 0");
        if (!(t > 0.0)) throw BadTime("RateQuery: t must be > 0");
        if (!(a > 0.0 && a < 1.0)) throw BadRange("RateQuery: a must lie in (0,1)");
    }
};

/// Heat kernel p_t(x) = (2 pi t)^(-1/2) exp(-x^2 / (2t)).
inline double heat_kernel(double t, double x) {
    if (!(t > 0.0)) throw BadTime("heat_kernel: t must be > 0, got " + std::to_string(t));
    return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Exact equal-time covariance for gamma = 1/2, where E[u(s,0)^(2 gamma)] = 1:
///
///   Cov(u(t,x), u(t,0)) = int_0^t p_{2(t-s)}(x) ds
///                       = sqrt(t/pi) e^{-x^2/(4t)} - (|x|/2) erfc(|x| / (2 sqrt t)).
inline double cov_exact_half(double t, double x) {
    if (!(t > 0.0)) throw BadTime("cov_exact_half: t must be > 0");
    const double ax = std::abs(x);
    return std::sqrt(t / std::numbers::pi) * std::exp(-ax * ax / (4.0 * t)) -
           0.5 * ax * std::erfc(ax / (2.0 * std::sqrt(t)));
}

/// General-gamma covariance integral int_0^t m(s) p_{2(t-s)}(x) ds for a
/// caller-supplied moment curve m(s) ~ E[u(s,0)^(2 gamma)]. The substitution
/// s = t - q^2 removes the endpoint singularity at x = 0.
template <class MomentCurve>
double cov_from_moment_curve(double t, double x, MomentCurve&& m, double abs_tol = 1e-10) {
    if (!(t > 0.0)) throw BadTime("cov_from_moment_curve: t must be > 0");
    const auto integrand = [&](double q) {
        const double r = q * q; // = t - s
        // p_{2r}(x) * 2q = 2q exp(-x^2/(4r)) / sqrt(4 pi r), smooth at q = 0
        return std::exp(-x * x / (4.0 * r)) * m(t - r) / std::sqrt(std::numbers::pi);
    };
    return integrate(integrand, 0.0, std::sqrt(t), abs_tol);
}

/// Gaussian covariance envelope C_T exp(-x^2 / (4T)).
inline double cov_bound(double T, double x, double C_T) {
    if (!(T > 0.0)) throw BadTime("cov_bound: T must be > 0");
    return C_T * std::exp(-x * x / (4.0 * T));
}

/// Solution of w' = -w^2/2, w(0) = lambda: w(t) = 2 lambda / (lambda t + 2).
inline double dual_ode_w(double lambda, double t) {
    if (!(lambda > 0.0)) throw BadRange("dual_ode_w: lambda must be > 0");
    if (t < 0.0) throw BadTime("dual_ode_w: t must be >= 0");
    return 2.0 * lambda / (lambda * t + 2.0);
}

/// Limit of (1/N) log E[exp(-lambda S_{N,t})]: -2 lambda / (lambda t + 2).
inline double mgf_rate(double lambda, double t) {
    if (!(lambda > 0.0)) throw BadRange("mgf_rate: lambda must be > 0");
    if (!(t > 0.0)) throw BadTime("mgf_rate: t must be > 0");
    return -2.0 * lambda / (lambda * t + 2.0);
}

/// Lower-tail rate: limsup (1/N) log P{S_{N,t}/N < a} <= -2 (1 - sqrt a)^2 / t.
/// Equals inf_{lambda > 0} [lambda a + mgf_rate(lambda, t)].
inline double lower_tail_rate(double a, double t) {
    if (!(a > 0.0 && a < 1.0)) throw BadRange("lower_tail_rate: a must lie in (0,1)");
    if (!(t > 0.0)) throw BadTime("lower_tail_rate: t must be > 0");
    const double s = 1.0 - std::sqrt(a);
    return -2.0 * s * s / t;
}

} // namespace shelab
