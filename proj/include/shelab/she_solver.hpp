#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "shelab/coefficients.hpp"
#include "shelab/errors.hpp"
#include "shelab/grid.hpp"
#include "shelab/rng.hpp"

namespace shelab {

/// One simulation run: geometry, coefficient, horizon T, averaging window
/// [0, N], and the output times.
struct SimConfig {
    GridSpec grid;
    CoefficientSpec coeff;
    double horizon = 0.0;                    // T
    double window = 1.0;                     // N of S_{N,t}
    std::vector<double> record_times;        // sorted, snapped to multiples of dt

    void validate() const {
        if (horizon < 0.0) throw BadTime("SimConfig: horizon must be >= 0");
        if (!(window > 0.0)) throw BadDomain("SimConfig: window must be > 0");
        const double buffer = 12.0 * std::sqrt(horizon);
        if (window > grid.length() - buffer + 1e-9)
            throw BadDomain("SimConfig: window " + std::to_string(window) +
                            " exceeds domain length minus 12 sqrt(T) buffer (" +
                            std::to_string(grid.length() - buffer) + ")");
        if (grid.x_lo > 1e-12 || grid.x_hi < window - 1e-12)
            throw BadDomain("SimConfig: domain must contain the window [0, N]");
        double prev = -1.0;
        for (double t : record_times) {
            if (t < prev) throw BadTime("SimConfig: record_times must be sorted");
            if (t > horizon + 1e-12) throw BadTime("SimConfig: record time exceeds horizon");
            const double steps = t / grid.dt;
            if (std::abs(steps - std::round(steps)) > 1e-6)
                throw BadTime("SimConfig: record time " + std::to_string(t) +
                              " is not a multiple of dt");
            prev = t;
        }
    }
};

struct Trajectory {
    std::vector<FieldState> snapshots; // one per record time
    std::vector<double> integrals;     // S_{N, t_i} over [0, window]
};

namespace detail {

template <class Sigma>
inline void step_kernel(std::span<const double> u, std::span<double> out, double lam,
                        double inv_dx, std::span<const double> w, Sigma&& sig) {
    const std::size_t m = u.size();
    // interior cells
    for (std::size_t j = 1; j + 1 < m; ++j) {
        const double drift = lam * (u[j + 1] - 2.0 * u[j] + u[j - 1]);
        const double v = u[j] + drift + sig(u[j]) * w[j] * inv_dx;
        out[j] = v > 0.0 ? v : 0.0;
    }
    // periodic wrap
    {
        const double v0 = u[0] + lam * (u[1] - 2.0 * u[0] + u[m - 1]) + sig(u[0]) * w[0] * inv_dx;
        out[0] = v0 > 0.0 ? v0 : 0.0;
        const double vm =
            u[m - 1] + lam * (u[0] - 2.0 * u[m - 1] + u[m - 2]) + sig(u[m - 1]) * w[m - 1] * inv_dx;
        out[m - 1] = vm > 0.0 ? vm : 0.0;
    }
}

inline void step_dispatch(std::span<const double> u, std::span<double> out, const GridSpec& grid,
                          const CoefficientSpec& coeff, std::span<const double> w) {
    const double lam = grid.dt / (2.0 * grid.dx * grid.dx);
    const double inv_dx = 1.0 / grid.dx;
    if (coeff.is_regularized()) {
        step_kernel(u, out, lam, inv_dx, w, [&](double x) { return sigma_n(x, coeff); });
    } else if (coeff.gamma == 0.5) {
        step_kernel(u, out, lam, inv_dx, w, [](double x) { return std::sqrt(x); });
    } else {
        const double g = coeff.gamma;
        step_kernel(u, out, lam, inv_dx, w, [g](double x) { return std::pow(x, g); });
    }
}

} // namespace detail

/// One explicit Euler-Maruyama step:
///   u'_j = max(0, u_j + dt/(2 dx^2) (u_{j+1} - 2u_j + u_{j-1}) + sigma(u_j) w_j / dx)
/// with periodic indexing; w_j ~ N(0, dt dx). Clamping at zero keeps the
/// state in the nonnegative solution class (sigma(0) = 0 makes 0 absorbing).
inline FieldState step(const FieldState& state, const GridSpec& grid,
                       const CoefficientSpec& coeff, std::span<const double> noise_layer) {
    if (state.values.size() != grid.n_cells || noise_layer.size() != grid.n_cells)
        throw ShapeMismatch("step: field has " + std::to_string(state.values.size()) +
                            " cells, noise " + std::to_string(noise_layer.size()) +
                            ", grid expects " + std::to_string(grid.n_cells));
    FieldState next;
    next.t = state.t + grid.dt;
    next.values.resize(grid.n_cells);
    detail::step_dispatch(state.values, next.values, grid, coeff, noise_layer);
    return next;
}

/// Midpoint-rule integral dx * sum of u over the cells whose centers lie in
/// [a, b].
inline double spatial_integral(const FieldState& state, const GridSpec& grid, double a, double b) {
    if (state.values.size() != grid.n_cells)
        throw ShapeMismatch("spatial_integral: field/grid size mismatch");
    if (a < grid.x_lo - 1e-9 || b > grid.x_hi + 1e-9 || !(a < b))
        throw OutOfDomain("spatial_integral: [" + std::to_string(a) + ", " + std::to_string(b) +
                          "] not inside [" + std::to_string(grid.x_lo) + ", " +
                          std::to_string(grid.x_hi) + "]");
    const double lo = (a - grid.x_lo) / grid.dx - 0.5;
    const double hi = (b - grid.x_lo) / grid.dx - 0.5;
    const auto j_lo = static_cast<std::size_t>(std::max(0.0, std::ceil(lo - 1e-9)));
    const auto j_hi = static_cast<std::size_t>(
        std::min(static_cast<double>(grid.n_cells) - 1.0, std::floor(hi + 1e-9)));
    double sum = 0.0, comp = 0.0;
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
        const double t = sum + state.values[j];
        comp += (std::abs(sum) >= std::abs(state.values[j])) ? (sum - t) + state.values[j]
                                                             : (state.values[j] - t) + sum;
        sum = t;
    }
    return (sum + comp) * grid.dx;
}

/// Advances u(0) = 1 to the horizon, recording snapshots and window
/// integrals S_{N, t_i} at the configured record times. Deterministic given
/// the seed.
inline Trajectory simulate(const SimConfig& config, const SeedScheme& seed) {
    config.validate();
    const GridSpec& grid = config.grid;
    CounterStream stream = derive_stream(seed);

    Trajectory traj;
    std::vector<double> u(grid.n_cells, 1.0);
    std::vector<double> next(grid.n_cells);
    std::vector<double> noise(grid.n_cells);

    const auto n_steps = static_cast<std::size_t>(std::llround(config.horizon / grid.dt));
    std::size_t rec_idx = 0;
    auto maybe_record = [&](std::size_t step_no, double t_now) {
        while (rec_idx < config.record_times.size() &&
               static_cast<std::size_t>(std::llround(config.record_times[rec_idx] / grid.dt)) ==
                   step_no) {
            FieldState snap{t_now, u};
            traj.integrals.push_back(spatial_integral(snap, grid, 0.0, config.window));
            traj.snapshots.push_back(std::move(snap));
            ++rec_idx;
        }
    };

    maybe_record(0, 0.0);
    for (std::size_t n = 1; n <= n_steps; ++n) {
        sample_noise_layer(grid, stream, noise);
        detail::step_dispatch(u, next, grid, config.coeff, noise);
        u.swap(next);
        maybe_record(n, static_cast<double>(n) * grid.dt);
    }
    return traj;
}

/// Block integrals X_j = int_{e_{j-1}}^{e_j} [ sum_l a_l u(t_l, x) - k ] dx
/// for k = #weights, evaluated with the same midpoint rule as
/// spatial_integral. One field state per weight.
inline std::vector<double> block_sums(std::span<const FieldState> states, const GridSpec& grid,
                                      std::span<const double> weights,
                                      std::span<const double> block_edges) {
    if (states.size() != weights.size())
        throw ShapeMismatch("block_sums: one field state per weight required");
    if (block_edges.size() < 2) throw OutOfDomain("block_sums: need at least two block edges");
    for (const FieldState& s : states)
        if (s.values.size() != grid.n_cells)
            throw ShapeMismatch("block_sums: field/grid size mismatch");

    const double k = static_cast<double>(weights.size());
    std::vector<double> combined(grid.n_cells, -k);
    for (std::size_t l = 0; l < states.size(); ++l)
        for (std::size_t j = 0; j < grid.n_cells; ++j)
            combined[j] += weights[l] * states[l].values[j];

    FieldState merged{states.empty() ? 0.0 : states[0].t, std::move(combined)};
    std::vector<double> sums;
    sums.reserve(block_edges.size() - 1);
    for (std::size_t j = 0; j + 1 < block_edges.size(); ++j)
        sums.push_back(spatial_integral(merged, grid, block_edges[j], block_edges[j + 1]));
    return sums;
}

} // namespace shelab
