#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "shelab/analytic.hpp"
#include "shelab/errors.hpp"

namespace shelab {

/// Neumaier-compensated sum; reduction order independent to ~1e-16 * scale.
inline double kahan_sum(std::span<const double> xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0; // unbiased
    double se_mean = 0.0;

    double sd() const { return std::sqrt(variance); }
    /// Standard error of the variance estimate under approximate normality.
    double se_variance() const {
        return n > 1 ? variance * std::sqrt(2.0 / static_cast<double>(n - 1)) : 0.0;
    }
};

inline Summary summarize(std::span<const double> xs) {
    Summary s;
    s.n = xs.size();
    if (s.n == 0) return s;
    s.mean = kahan_sum(xs) / static_cast<double>(s.n);
    if (s.n > 1) {
        double acc = 0.0, comp = 0.0;
        for (double x : xs) {
            const double d = (x - s.mean) * (x - s.mean);
            const double t = acc + d;
            comp += (acc - t) + d;
            acc = t;
        }
        s.variance = (acc + comp) / static_cast<double>(s.n - 1);
        s.se_mean = std::sqrt(s.variance / static_cast<double>(s.n));
    }
    return s;
}

struct CovEstimate {
    double cov = 0.0;
    double se = 0.0; // standard error of the covariance estimate
};

/// Sample covariance with a direct standard error from the spread of the
/// per-sample cross products.
inline CovEstimate covariance(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw ShapeMismatch("covariance: mismatched or too-short samples");
    const std::size_t n = xs.size();
    const double mx = kahan_sum(xs) / static_cast<double>(n);
    const double my = kahan_sum(ys) / static_cast<double>(n);
    std::vector<double> prod(n);
    for (std::size_t i = 0; i < n; ++i) prod[i] = (xs[i] - mx) * (ys[i] - my);
    const Summary p = summarize(prod);
    const double scale = static_cast<double>(n) / static_cast<double>(n - 1);
    return CovEstimate{p.mean * scale, p.se_mean * scale};
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r_squared = 0.0;
};

inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw ShapeMismatch("fit_line: need matching samples of size >= 3");
    const std::size_t n = xs.size();
    const double mx = kahan_sum(xs) / static_cast<double>(n);
    const double my = kahan_sum(ys) / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (f.intercept + f.slope * xs[i]);
        ss_res += r * r;
    }
    f.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
    f.slope_se = (n > 2) ? std::sqrt(ss_res / (static_cast<double>(n - 2) * sxx)) : 0.0;
    return f;
}

/// Kolmogorov-Smirnov distance of a sample from the standard normal.
inline double ks_distance_normal(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double cdf = normal_cdf(sample[i]);
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
    }
    return d;
}

/// Asymptotic KS critical value for fully specified null: c(alpha)/sqrt(n)
/// with c(alpha) = sqrt(-ln(alpha/2)/2).
inline double ks_critical(double alpha, std::size_t n) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

/// Acklam's rational approximation of the standard normal quantile,
/// |relative error| < 1.2e-9.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw BadRange("normal_quantile: p must lie in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    return x;
}

/// Empirical quantile (linear interpolation) of an already sorted sample.
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw ShapeMismatch("quantile_sorted: empty sample");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

} // namespace shelab
