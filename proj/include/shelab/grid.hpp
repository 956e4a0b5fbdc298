#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "shelab/errors.hpp"

namespace shelab {

enum class Boundary { periodic };

/// Uniform 1-D lattice of cell centers on [x_lo, x_hi] with periodic wrap.
///
/// The time step is part of the geometry because the explicit scheme ties
/// them together: stability requires dt <= dx^2/2 (diffusion coefficient 1/2,
/// with a factor-2 margin for the noise term).
struct GridSpec {
    double dx = 0.0;
    double dt = 0.0;
    double x_lo = 0.0;
    double x_hi = 0.0;
    Boundary boundary = Boundary::periodic;
    std::size_t n_cells = 0;

    double length() const { return x_hi - x_lo; }
    double cell_center(std::size_t j) const { return x_lo + (static_cast<double>(j) + 0.5) * dx; }

    /// Index of the cell whose center is nearest to x (no wrap).
    std::size_t cell_index(double x) const {
        if (x < x_lo || x > x_hi)
            throw OutOfDomain("cell_index: x=" + std::to_string(x) + " outside [" +
                              std::to_string(x_lo) + ", " + std::to_string(x_hi) + "]");
        double raw = (x - x_lo) / dx - 0.5;
        long j = std::lround(raw);
        if (j < 0) j = 0;
        if (j >= static_cast<long>(n_cells)) j = static_cast<long>(n_cells) - 1;
        return static_cast<std::size_t>(j);
    }
};

inline GridSpec make_grid(double x_lo, double x_hi, double dx, double dt,
                          Boundary boundary = Boundary::periodic) {
    if (!(x_hi > x_lo))
        throw BadDomain("make_grid: x_hi=" + std::to_string(x_hi) +
                        " must exceed x_lo=" + std::to_string(x_lo));
    if (!(dx > 0.0) || !(dt > 0.0))
        throw BadDomain("make_grid: dx and dt must be positive");
    const double n_raw = (x_hi - x_lo) / dx;
    const auto n_cells = static_cast<std::size_t>(std::llround(n_raw));
    if (n_cells < 4 || std::abs(n_raw - static_cast<double>(n_cells)) > 1e-9 * n_raw)
        throw BadDomain("make_grid: (x_hi - x_lo)/dx must be an integer >= 4, got " +
                        std::to_string(n_raw));
    if (dt > dx * dx / 2.0 * (1.0 + 1e-12))
        throw CflViolation("make_grid: CFL rule dt <= dx^2/2 violated (dt=" +
                           std::to_string(dt) + " > " + std::to_string(dx * dx / 2.0) + ")");
    return GridSpec{dx, dt, x_lo, x_hi, boundary, n_cells};
}

/// One spatial profile u(t, .) sampled at cell centers.
struct FieldState {
    double t = 0.0;
    std::vector<double> values;

    bool nonnegative() const {
        for (double v : values)
            if (v < 0.0) return false;
        return true;
    }
};

inline FieldState constant_field(const GridSpec& grid, double c, double t = 0.0) {
    return FieldState{t, std::vector<double>(grid.n_cells, c)};
}

} // namespace shelab
