#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "shelab/analytic.hpp"
#include "shelab/errors.hpp"
#include "shelab/grid.hpp"
#include "shelab/stats.hpp"
#include "shelab/tridiagonal.hpp"

namespace shelab {

/// Deterministic dual problem: v_t = 1/2 v_xx - 1/2 v^2 with
/// v(0) = lambda * indicator of [0, N], solved to the horizon t.
struct DualConfig {
    enum class Scheme { imex };

    double lambda = 1.0;
    double window = 8.0; // N
    double horizon = 1.0; // t
    GridSpec grid;        // its own grid, typically finer than the SHE lattice
    Scheme scheme = Scheme::imex;

    void validate() const {
        if (lambda < 0.0) throw BadRange("DualConfig: lambda must be >= 0");
        if (!(window > 0.0)) throw BadDomain("DualConfig: window must be > 0");
        if (horizon < 0.0) throw BadTime("DualConfig: horizon must be >= 0");
        const double buffer = 8.0 * std::sqrt(horizon);
        if (grid.x_lo > -buffer + 1e-9 || grid.x_hi < window + buffer - 1e-9)
            throw BadDomain("DualConfig: domain must contain [-8 sqrt(t), N + 8 sqrt(t)] = [" +
                            std::to_string(-buffer) + ", " + std::to_string(window + buffer) +
                            "]");
    }
};

/// Builds the dual grid. The diffusion step is implicit, so dt is not tied
/// to dx^2; only positivity of the explicit reaction (dt <= 2/lambda) and
/// exact divisibility of the horizon are required.
inline GridSpec make_dual_grid(double x_lo, double x_hi, double dx, double dt) {
    if (!(x_hi > x_lo)) throw BadDomain("make_dual_grid: x_hi must exceed x_lo");
    if (!(dx > 0.0) || !(dt > 0.0)) throw BadDomain("make_dual_grid: dx and dt must be positive");
    const double n_raw = (x_hi - x_lo) / dx;
    const auto n_cells = static_cast<std::size_t>(std::llround(n_raw));
    if (n_cells < 4 || std::abs(n_raw - static_cast<double>(n_cells)) > 1e-9 * n_raw)
        throw BadDomain("make_dual_grid: (x_hi - x_lo)/dx must be an integer >= 4");
    return GridSpec{dx, dt, x_lo, x_hi, Boundary::periodic, n_cells};
}

/// Default geometry for a (lambda, N, t) query: buffer 8 sqrt(t) each side
/// (truncation below 1e-14), dx = 0.01, dt = 5e-4.
inline DualConfig default_dual_config(double lambda, double window, double horizon,
                                      double dx = 0.01, double dt = 5e-4) {
    const double buffer = std::max(8.0 * std::sqrt(horizon), 4.0 * dx);
    const double x_lo = -std::ceil(buffer / dx) * dx;
    const double x_hi = window + std::ceil(buffer / dx) * dx;
    DualConfig config;
    config.lambda = lambda;
    config.window = window;
    config.horizon = horizon;
    config.grid = make_dual_grid(x_lo, x_hi, dx, dt);
    config.validate();
    return config;
}

struct DualSolution {
    FieldState v;                        // v(t, .) at the horizon
    double mass = 0.0;                   // <1, v(t,.)> = integral of v
    std::vector<double> per_step_masses; // mass after each step, starting at t=0
};

namespace detail {

/// Cell-averaged projection of lambda * 1_{[a, b]} onto the grid; cells
/// straddling a or b receive their covered fraction.
inline std::vector<double> cell_averaged_indicator(const GridSpec& grid, double a, double b,
                                                   double lambda) {
    std::vector<double> v(grid.n_cells, 0.0);
    for (std::size_t j = 0; j < grid.n_cells; ++j) {
        const double left = grid.x_lo + static_cast<double>(j) * grid.dx;
        const double right = left + grid.dx;
        const double covered = std::min(right, b) - std::max(left, a);
        if (covered > 0.0) v[j] = lambda * std::min(1.0, covered / grid.dx);
    }
    return v;
}

} // namespace detail

/// IMEX time stepping: explicit Euler for the reaction -1/2 v^2, then a
/// theta-implicit diffusion step (two backward-Euler startup steps damp the
/// indicator front, Crank-Nicolson afterwards). Dirichlet v = 0 at the ends;
/// the 8 sqrt(t) buffer keeps the truncation below 1e-14.
inline DualSolution solve_dual(const DualConfig& config) {
    config.validate();
    const GridSpec& grid = config.grid;
    const double dt = grid.dt;
    if (config.lambda > 0.0 && dt > 2.0 / config.lambda)
        throw BadTime("solve_dual: explicit reaction needs dt <= 2/lambda");

    std::vector<double> v =
        detail::cell_averaged_indicator(grid, 0.0, config.window, config.lambda);

    DualSolution out;
    out.per_step_masses.push_back(kahan_sum(v) * grid.dx);

    const auto n_steps = static_cast<std::size_t>(std::llround(config.horizon / dt));
    if (std::abs(static_cast<double>(n_steps) * dt - config.horizon) > 1e-9)
        throw BadTime("solve_dual: horizon must be a multiple of dt");

    const double c = 0.5 * dt / (grid.dx * grid.dx); // (1/2) dt/dx^2 Laplacian weight
    const std::size_t m = grid.n_cells;
    std::vector<double> rhs(m);

    const TridiagonalSolver implicit_full(m, 1.0 + 2.0 * c, -c);       // theta = 1
    const TridiagonalSolver implicit_half(m, 1.0 + c, -0.5 * c);       // theta = 1/2

    for (std::size_t n = 0; n < n_steps; ++n) {
        const bool startup = n < 2;
        const double theta = startup ? 1.0 : 0.5;
        for (std::size_t j = 0; j < m; ++j) {
            const double reacted = v[j] - 0.5 * dt * v[j] * v[j];
            double explicit_lap = 0.0;
            if (theta < 1.0) {
                const double left = (j > 0) ? v[j - 1] : 0.0;
                const double right = (j + 1 < m) ? v[j + 1] : 0.0;
                explicit_lap = (1.0 - theta) * c * (left - 2.0 * v[j] + right);
            }
            rhs[j] = reacted + explicit_lap;
        }
        (startup ? implicit_full : implicit_half).solve(rhs, v);
        out.per_step_masses.push_back(kahan_sum(v) * grid.dx);
    }

    out.mass = out.per_step_masses.back();
    out.v = FieldState{config.horizon, std::move(v)};
    return out;
}

/// Closed form of the heat-semigroup supersolution
///   hbar(t, x) = lambda * integral of p_t(x - y) over y outside [0, N]
///              = lambda * (1 - Phi((N - x)/sqrt t) + Phi(-x/sqrt t)).
inline double hbar_value(double lambda, double window, double t, double x) {
    if (t < 0.0) throw BadTime("hbar_value: t must be >= 0");
    if (t == 0.0) return (x >= 0.0 && x <= window) ? 0.0 : lambda;
    const double s = std::sqrt(t);
    return lambda * (1.0 - normal_cdf((window - x) / s) + normal_cdf(-x / s));
}

/// hbar(t, .) sampled on the config grid.
inline FieldState supersolution_hbar(const DualConfig& config) {
    config.validate();
    FieldState h;
    h.t = config.horizon;
    h.values.resize(config.grid.n_cells);
    for (std::size_t j = 0; j < config.grid.n_cells; ++j)
        h.values[j] =
            hbar_value(config.lambda, config.window, config.horizon, config.grid.cell_center(j));
    return h;
}

/// Exact log of E[exp(-lambda S_{N,t})] under the duality: -<1, v(t,.)>.
inline double duality_log_mgf(const DualConfig& config) { return -solve_dual(config).mass; }

} // namespace shelab
