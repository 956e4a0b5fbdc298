#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "shelab/config.hpp"
#include "shelab/dual_pde.hpp"
#include "shelab/ensemble.hpp"
#include "shelab/grid.hpp"
#include "shelab/she_solver.hpp"

namespace shelab {

/// Full key schema; any key outside this table is a config error.
inline const std::map<std::string, std::vector<std::string>>& config_schema() {
    static const std::map<std::string, std::vector<std::string>> schema = {
        {"lattice", {"dx", "dt", "x_lo", "x_hi", "boundary"}},
        {"coefficients", {"gamma", "regularization"}},
        {"sim", {"horizon", "window", "record_times"}},
        {"ensemble",
         {"paths", "seed", "workers", "tests", "clip", "mgf_lambda", "mgf_windows",
          "lower_tail_a", "avg_windows", "max_windows", "probe_time"}},
        {"dual", {"lambda", "window", "horizon", "dx", "dt"}},
        {"rates", {"lambdas", "times", "a_values"}},
        {"manifest", {"version", "command", "seed", "out_dir", "workers"}},
    };
    return schema;
}

inline GridSpec resolve_lattice(const ConfigFile& cfg) {
    const double dx = cfg.get_double("lattice", "dx");
    const double dt = cfg.get_double("lattice", "dt", dx * dx / 2.0);
    const double x_lo = cfg.get_double("lattice", "x_lo");
    const double x_hi = cfg.get_double("lattice", "x_hi");
    const std::string boundary = cfg.get_string("lattice", "boundary", "periodic");
    if (boundary != "periodic")
        throw ConfigError("config (lattice.boundary): only 'periodic' is supported");
    return make_grid(x_lo, x_hi, dx, dt);
}

inline CoefficientSpec resolve_coefficients(const ConfigFile& cfg) {
    const double gamma = cfg.get_double("coefficients", "gamma", 0.5);
    const std::string reg = cfg.get_string("coefficients", "regularization", "exact");
    if (reg == "exact") return CoefficientSpec::exact(gamma);
    try {
        return CoefficientSpec::regularized(gamma, std::stoi(reg));
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError(
            "config (coefficients.regularization): expected 'exact' or an integer, got '" + reg +
            "'");
    }
}

inline SimConfig resolve_sim(const ConfigFile& cfg) {
    SimConfig sim;
    sim.grid = resolve_lattice(cfg);
    sim.coeff = resolve_coefficients(cfg);
    sim.horizon = cfg.get_double("sim", "horizon");
    sim.window = cfg.get_double("sim", "window");
    sim.record_times = cfg.get_doubles("sim", "record_times", {sim.horizon});
    sim.validate();
    return sim;
}

inline TestSelection resolve_tests(const ConfigFile& cfg) {
    TestSelection sel;
    if (!cfg.has("ensemble", "tests")) return sel;
    for (const std::string& name : cfg.get_strings("ensemble", "tests")) {
        if (name == "clt")
            sel.clt = true;
        else if (name == "ergodicity")
            sel.ergodicity = true;
        else if (name == "association")
            sel.association = true;
        else if (name == "covariance")
            sel.covariance = true;
        else if (name == "mgf")
            sel.mgf = true;
        else if (name == "extremes")
            sel.extremes = true;
        else
            throw ConfigError("config (ensemble.tests): unknown test selector '" + name + "'");
    }
    return sel;
}

inline EnsembleConfig resolve_ensemble(const ConfigFile& cfg,
                                       std::optional<std::uint64_t> seed_override,
                                       std::optional<std::size_t> workers_override) {
    EnsembleConfig ec;
    ec.sim = resolve_sim(cfg);
    ec.paths = static_cast<std::size_t>(cfg.get_u64("ensemble", "paths", 1000));
    ec.master_seed = seed_override ? *seed_override : cfg.get_u64("ensemble", "seed", 1);
    ec.workers = workers_override ? *workers_override
                                  : static_cast<std::size_t>(cfg.get_u64("ensemble", "workers", 0));
    ec.tests = resolve_tests(cfg);

    const double probe_time =
        cfg.get_double("ensemble", "probe_time",
                       ec.sim.record_times.empty() ? ec.sim.horizon : ec.sim.record_times.back());
    ec.probes = default_probe_plan(ec.sim, probe_time);
    ec.probes.clip_threshold = cfg.get_double("ensemble", "clip", 2.0);
    ec.probes.avg_windows = cfg.get_doubles("ensemble", "avg_windows", {});
    ec.probes.max_windows = cfg.get_doubles("ensemble", "max_windows", {});
    ec.probes.mgf_windows = cfg.get_doubles("ensemble", "mgf_windows", {});
    ec.validate();
    return ec;
}

inline DualConfig resolve_dual(const ConfigFile& cfg) {
    const double lambda = cfg.get_double("dual", "lambda");
    const double window = cfg.get_double("dual", "window");
    const double horizon = cfg.get_double("dual", "horizon");
    const double dx = cfg.get_double("dual", "dx", 0.01);
    const double dt = cfg.get_double("dual", "dt", 5e-4);
    return default_dual_config(lambda, window, horizon, dx, dt);
}

/// The manifest is the resolved config plus a [manifest] section; it is a
/// valid config file, so replaying it reproduces every output byte.
inline ConfigFile build_manifest(const ConfigFile& cfg, const std::string& command,
                                 std::uint64_t seed, std::size_t workers,
                                 const std::string& out_dir) {
    ConfigFile m = cfg;
    m.set("manifest", "version", std::string(kArtifactVersion));
    m.set("manifest", "command", command);
    m.set("manifest", "seed", static_cast<std::uint64_t>(seed));
    m.set("manifest", "workers", static_cast<std::uint64_t>(workers));
    m.set("manifest", "out_dir", out_dir);
    return m;
}

/// Trajectory CSV, one row per (record time, cell): header t,x,u.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const GridSpec& grid) {
    os << "t,x,u\n";
    os.precision(12);
    for (const FieldState& snap : traj.snapshots)
        for (std::size_t j = 0; j < snap.values.size(); ++j)
            os << snap.t << ',' << grid.cell_center(j) << ',' << snap.values[j] << '\n';
}

/// Dual profile CSV: header x,v.
inline void write_dual_csv(std::ostream& os, const DualSolution& sol, const GridSpec& grid) {
    os << "x,v\n";
    os.precision(12);
    for (std::size_t j = 0; j < sol.v.values.size(); ++j)
        os << grid.cell_center(j) << ',' << sol.v.values[j] << '\n';
}

} // namespace shelab
