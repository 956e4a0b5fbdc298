#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "shelab/errors.hpp"

namespace shelab {

/// Thomas algorithm for the constant-coefficient tridiagonal system
///   off * x_{j-1} + diag * x_j + off * x_{j+1} = rhs_j,   x_{-1} = x_m = 0.
/// No pivoting; the caller guarantees diagonal dominance. The factorization
/// depends only on (diag, off) and is reused across solves.
class TridiagonalSolver {
public:
    TridiagonalSolver(std::size_t m, double diag, double off)
        : off_(off), c_prime_(m), inv_beta_(m), scratch_(m) {
        double beta = diag;
        for (std::size_t j = 0; j < m; ++j) {
            if (j > 0) beta = diag - off * c_prime_[j - 1];
            inv_beta_[j] = 1.0 / beta;
            c_prime_[j] = off * inv_beta_[j];
        }
    }

    void solve(std::span<const double> rhs, std::span<double> x) const {
        const std::size_t m = scratch_.size();
        if (rhs.size() != m || x.size() != m)
            throw ShapeMismatch("TridiagonalSolver: size mismatch");
        auto& d = scratch_;
        d[0] = rhs[0] * inv_beta_[0];
        for (std::size_t j = 1; j < m; ++j) d[j] = (rhs[j] - off_ * d[j - 1]) * inv_beta_[j];
        x[m - 1] = d[m - 1];
        for (std::size_t j = m - 1; j-- > 0;) x[j] = d[j] - c_prime_[j] * x[j + 1];
    }

private:
    double off_;
    std::vector<double> c_prime_;
    std::vector<double> inv_beta_;
    mutable std::vector<double> scratch_;
};

} // namespace shelab
