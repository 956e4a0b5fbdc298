// shelab: simulation and verification laboratory for the stochastic heat
// equation with power-law diffusion coefficient.
//
// Subcommands:
//   simulate  one trajectory -> t,x,u CSV + manifest
//   verify    Monte Carlo test suite -> report CSV, summary, SVG plots
//   dual      deterministic dual PDE -> x,v CSV + mass/rate comparison
//   rates     closed-form rate tables as CSV

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shelab/analytic.hpp"
#include "shelab/config.hpp"
#include "shelab/dual_pde.hpp"
#include "shelab/ensemble.hpp"
#include "shelab/run_config.hpp"
#include "shelab/she_solver.hpp"
#include "shelab/stats.hpp"
#include "shelab/svg.hpp"

namespace fs = std::filesystem;
using namespace shelab;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::string out_dir = "out";
};

ConfigFile load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    ConfigFile cfg = ConfigFile::parse(in);
    cfg.enforce_schema(config_schema());
    return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
}

void write_manifest(const ConfigFile& cfg, const std::string& command, std::uint64_t seed,
                    std::size_t workers, const fs::path& out_dir) {
    const ConfigFile manifest = build_manifest(cfg, command, seed, workers, out_dir.string());
    write_file(out_dir / "manifest.cfg", manifest.serialize());
}

int cmd_simulate(const CommonOpts& opts) {
    const ConfigFile cfg = load_config(opts.config_path);
    SimConfig sim = resolve_sim(cfg);
    const std::uint64_t seed = opts.seed ? *opts.seed : cfg.get_u64("ensemble", "seed", 1);

    const Trajectory traj = simulate(sim, SeedScheme{seed, 0});

    fs::create_directories(opts.out_dir);
    {
        std::ofstream out(fs::path(opts.out_dir) / "trajectory.csv", std::ios::binary);
        write_trajectory_csv(out, traj, sim.grid);
    }
    write_manifest(cfg, "simulate", seed, 1, opts.out_dir);
    std::cout << "wrote " << (fs::path(opts.out_dir) / "trajectory.csv").string() << " ("
              << traj.snapshots.size() << " snapshots)\n";
    return 0;
}

void plot_covariance(const fs::path& dir, const RawStore& store, double t) {
    const auto& offs = store.config.probes.probe_offsets;
    const auto& u0 = store.probes[store.probe_index(0, 0)];
    std::vector<double> xs, emp, oracle;
    for (std::size_t oi = 0; oi < offs.size(); ++oi) {
        const auto ce = covariance(u0, store.probes[store.probe_index(0, oi)]);
        xs.push_back(offs[oi]);
        emp.push_back(ce.cov);
        oracle.push_back(cov_exact_half(t, offs[oi]));
    }
    SvgPlot plot("Spatial covariance vs exact integral", "offset x", "Cov(u(t,x), u(t,0))");
    plot.add_points(xs, emp, "#d62728", "Monte Carlo");
    plot.add_line(xs, oracle, "#1f77b4", "exact (gamma = 1/2)");
    std::ofstream out(dir / "covariance.svg");
    plot.write(out);
}

void plot_clt_histogram(const fs::path& dir, const RawStore& store, double t) {
    const auto& s = store.integrals[store.record_times.size() - 1];
    const double n_window = store.config.sim.window;
    std::vector<double> z(s.size());
    for (std::size_t p = 0; p < s.size(); ++p)
        z[p] = (s[p] - n_window) / std::sqrt(n_window * t);
    std::sort(z.begin(), z.end());
    const int bins = 60;
    const double lo = -4.0, hi = 4.0, width = (hi - lo) / bins;
    std::vector<double> edges(bins + 1), density(bins, 0.0);
    for (int b = 0; b <= bins; ++b) edges[b] = lo + b * width;
    for (double v : z)
        if (v >= lo && v < hi) density[static_cast<std::size_t>((v - lo) / width)] += 1.0;
    for (double& d : density) d /= static_cast<double>(z.size()) * width;
    std::vector<double> gx, gy;
    for (double x = lo; x <= hi + 1e-9; x += 0.05) {
        gx.push_back(x);
        gy.push_back(std::exp(-x * x / 2.0) / std::sqrt(2.0 * std::numbers::pi));
    }
    SvgPlot plot("Standardized S_{N,t} vs standard normal", "z", "density");
    plot.add_bars(edges, density, "#9ecae1", "Monte Carlo");
    plot.add_line(gx, gy, "#d62728", "N(0,1)");
    std::ofstream out(dir / "clt_histogram.svg");
    plot.write(out);
}

void plot_max_vs_logn(const fs::path& dir, const RawStore& store) {
    const auto& windows = store.config.probes.max_windows;
    std::vector<double> xs, ys;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        xs.push_back(std::log(windows[w]));
        ys.push_back(kahan_sum(store.maxima[w]) / static_cast<double>(store.paths));
    }
    SvgPlot plot("Window maximum vs log N", "log N", "mean max u");
    plot.add_points(xs, ys, "#2ca02c", "Monte Carlo");
    if (xs.size() >= 3) {
        const LineFit fit = fit_line(xs, ys);
        std::vector<double> fx = {xs.front(), xs.back()};
        std::vector<double> fy = {fit.intercept + fit.slope * fx[0],
                                  fit.intercept + fit.slope * fx[1]};
        plot.add_line(fx, fy, "#ff7f0e", "linear fit");
    }
    std::ofstream out(dir / "max_vs_logN.svg");
    plot.write(out);
}

void plot_mgf_trend(const fs::path& dir, const RawStore& store, double lambda, double t) {
    const auto& windows = store.config.probes.mgf_windows;
    std::vector<double> xs, ys;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        std::vector<double> expo(store.paths);
        for (std::size_t p = 0; p < store.paths; ++p)
            expo[p] = std::exp(-lambda * store.mgf_integrals[w][p]);
        const Summary m = summarize(expo);
        if (m.mean > 0.0) {
            xs.push_back(windows[w]);
            ys.push_back(std::log(m.mean) / windows[w]);
        }
    }
    const double rate = mgf_rate(lambda, t);
    SvgPlot plot("(1/N) log E[exp(-lambda S)] vs N", "N", "estimate");
    plot.add_points(xs, ys, "#1f77b4", "Monte Carlo");
    plot.add_line({xs.empty() ? 0.0 : xs.front(), xs.empty() ? 1.0 : xs.back()}, {rate, rate},
                  "#d62728", "N->inf rate");
    std::ofstream out(dir / "mgf_trend.svg");
    plot.write(out);
}

int cmd_verify(const CommonOpts& opts, bool skew_oracle) {
    const ConfigFile cfg = load_config(opts.config_path);
    EnsembleConfig ec = resolve_ensemble(cfg, opts.seed, opts.workers);
    const double t_probe = ec.probes.probe_time;

    EnsembleReport report;
    RawStore store;
    if (ec.tests.any()) {
        store = run_ensemble(ec);
        if (ec.tests.clt) {
            std::vector<double> ts;
            for (double t : ec.sim.record_times) ts.push_back(t);
            report.append(test_clt(store, ts));
        }
        if (ec.tests.ergodicity) report.append(test_ergodicity(store, t_probe));
        if (ec.tests.association)
            report.append(test_association(store, t_probe, {0.2, 0.35, 0.5, 0.65, 0.8},
                                           {1, 2, 3, 4, 5}));
        if (ec.tests.covariance) report.append(test_covariance(store, t_probe));
        if (ec.tests.mgf) {
            const double lambda = cfg.get_double("ensemble", "mgf_lambda", 1.0);
            report.append(estimate_log_mgf(store, lambda, t_probe));
            if (ec.probes.mgf_windows.size() >= 2)
                report.append(test_mgf_trend(store, lambda, t_probe));
        }
        if (ec.tests.extremes) {
            if (!ec.probes.max_windows.empty()) report.append(test_extremes(store, t_probe));
            const double a = cfg.get_double("ensemble", "lower_tail_a", 0.5);
            report.append(test_lower_tail(store, a, t_probe));
        }
    }

    if (skew_oracle) {
        // Negative control: corrupt every oracle so a healthy pipeline fails.
        for (auto& e : report.entries)
            if (e.oracle && *e.oracle != 0.0) {
                e.oracle = *e.oracle * 1.5;
                e.verdict = judge_two_sided(e.estimate, *e.oracle, e.tolerance, e.se);
            }
    }

    fs::create_directories(opts.out_dir);
    {
        std::ofstream out(fs::path(opts.out_dir) / "report.csv", std::ios::binary);
        report.write_csv(out);
    }
    {
        std::ofstream out(fs::path(opts.out_dir) / "summary.txt", std::ios::binary);
        report.write_summary(out);
    }
    if (ec.tests.any()) {
        const fs::path plot_dir = fs::path(opts.out_dir) / "plots";
        fs::create_directories(plot_dir);
        if (ec.tests.covariance) plot_covariance(plot_dir, store, t_probe);
        if (ec.tests.clt) plot_clt_histogram(plot_dir, store, t_probe);
        if (ec.tests.extremes && !ec.probes.max_windows.empty()) plot_max_vs_logn(plot_dir, store);
        if (ec.tests.mgf && !ec.probes.mgf_windows.empty())
            plot_mgf_trend(plot_dir, store, cfg.get_double("ensemble", "mgf_lambda", 1.0),
                           t_probe);
    }
    write_manifest(cfg, "verify", ec.master_seed, ec.workers, opts.out_dir);

    report.write_summary(std::cout);
    if (report.any_fail()) {
        std::cout << "verdict: FAIL\n";
        return 1;
    }
    if (report.any_inconclusive()) std::cout << "warning: inconclusive entries present\n";
    std::cout << "verdict: OK\n";
    return 0;
}

int cmd_dual(const CommonOpts& opts) {
    const ConfigFile cfg = load_config(opts.config_path);
    const DualConfig dual = resolve_dual(cfg);
    const DualSolution sol = solve_dual(dual);

    fs::create_directories(opts.out_dir);
    {
        std::ofstream out(fs::path(opts.out_dir) / "dual_profile.csv", std::ios::binary);
        write_dual_csv(out, sol, dual.grid);
    }
    write_manifest(cfg, "dual", 0, 1, opts.out_dir);

    std::cout.precision(10);
    std::cout << "mass = " << sol.mass << '\n';
    std::cout << "mass/N = " << sol.mass / dual.window << '\n';
    if (dual.lambda > 0.0 && dual.horizon > 0.0) {
        const double rate = -mgf_rate(dual.lambda, dual.horizon);
        std::cout << "2*lambda/(lambda*t+2) = " << rate << "  (mass/N - rate = "
                  << sol.mass / dual.window - rate << ")\n";
    }
    return 0;
}

int cmd_rates(const CommonOpts& opts) {
    std::vector<double> lambdas = {0.5, 1.0, 2.0, 4.0};
    std::vector<double> times = {0.5, 1.0, 2.0};
    std::vector<double> a_values = {0.25, 0.5, 0.75};
    if (!opts.config_path.empty()) {
        const ConfigFile cfg = load_config(opts.config_path);
        lambdas = cfg.get_doubles("rates", "lambdas", lambdas);
        times = cfg.get_doubles("rates", "times", times);
        a_values = cfg.get_doubles("rates", "a_values", a_values);
    }
    std::cout << "kind,param,t,value\n";
    std::cout.precision(12);
    for (double t : times)
        for (double lambda : lambdas)
            std::cout << "mgf_rate," << lambda << ',' << t << ',' << mgf_rate(lambda, t) << '\n';
    for (double t : times)
        for (double a : a_values)
            std::cout << "lower_tail_rate," << a << ',' << t << ',' << lower_tail_rate(a, t)
                      << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic heat equation simulation and verification lab"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::uint64_t seed_raw = 0;
    std::size_t workers_raw = 0;
    bool skew_oracle = false;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", opts.config_path, "config file path");
        if (config_required) c->required();
        sub->add_option("--seed", seed_raw, "master seed override")->each([&](const std::string&) {
            opts.seed = seed_raw;
        });
        sub->add_option("--workers", workers_raw, "worker threads (0 = hardware)")
            ->each([&](const std::string&) { opts.workers = workers_raw; });
        sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    };

    auto* sim = app.add_subcommand("simulate", "run one trajectory and export CSV");
    add_common(sim, true);
    auto* verify = app.add_subcommand("verify", "run the Monte Carlo verification suite");
    add_common(verify, true);
    verify->add_flag("--debug-skew-oracle", skew_oracle, "corrupt oracles (negative control)")
        ->group(""); // hidden
    auto* dual = app.add_subcommand("dual", "solve the dual PDE and export CSV");
    add_common(dual, true);
    auto* rates = app.add_subcommand("rates", "print closed-form rate tables as CSV");
    add_common(rates, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) != 0 ? 2 : 0;
    }

    try {
        if (sim->parsed()) return cmd_simulate(opts);
        if (verify->parsed()) return cmd_verify(opts, skew_oracle);
        if (dual->parsed()) return cmd_dual(opts);
        if (rates->parsed()) return cmd_rates(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
