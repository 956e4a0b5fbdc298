// End-to-end tests of the command line tool: spawns the built binary.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const fs::path dir = fs::temp_directory_path() / "shelab_cli_test";
    fs::create_directories(dir);
    const fs::path out_file = dir / "stdout.txt";
    const std::string cmd =
        std::string(SHELAB_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(out_file);
    std::ostringstream os;
    os << in.rdbuf();
    r.output = os.str();
    return r;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path dir = fs::temp_directory_path() / "shelab_cli_test";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

const char* kSimulateT0 = R"(
[lattice]
dx = 0.1
x_lo = -3.0
x_hi = 4.0

[coefficients]
gamma = 0.5

[sim]
horizon = 0.0
window = 1.0
record_times = 0.0
)";

} // namespace

TEST_CASE("simulate with T=0 emits a snapshot of ones") {
    const fs::path cfg = write_config("t0.cfg", kSimulateT0);
    const fs::path out = fs::temp_directory_path() / "shelab_cli_test" / "out_t0";
    fs::remove_all(out);
    const RunResult r =
        run_cli("simulate --config " + cfg.string() + " --out " + out.string());
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(out / "trajectory.csv");
    CHECK(csv.rfind("t,x,u\n", 0) == 0);
    CHECK(csv.find("0,-2.95,1\n") != std::string::npos);
    CHECK(fs::exists(out / "manifest.cfg"));
}

TEST_CASE("replaying the manifest reproduces the CSV byte for byte") {
    const fs::path cfg = write_config("replay.cfg", R"(
[lattice]
dx = 0.1
x_lo = -3.0
x_hi = 4.0

[coefficients]
gamma = 0.5

[sim]
horizon = 0.05
window = 1.0
record_times = 0.05

[ensemble]
seed = 777
)");
    const fs::path out1 = fs::temp_directory_path() / "shelab_cli_test" / "out_r1";
    const fs::path out2 = fs::temp_directory_path() / "shelab_cli_test" / "out_r2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    REQUIRE(run_cli("simulate --config " + cfg.string() + " --out " + out1.string()).exit_code ==
            0);
    // replay from the manifest itself
    REQUIRE(run_cli("simulate --config " + (out1 / "manifest.cfg").string() + " --out " +
                    out2.string())
                .exit_code == 0);
    CHECK(slurp(out1 / "trajectory.csv") == slurp(out2 / "trajectory.csv"));
}

TEST_CASE("CFL violation exits with code 2 and names the rule") {
    const fs::path cfg = write_config("cfl.cfg", R"(
[lattice]
dx = 0.1
dt = 0.01
x_lo = -3.0
x_hi = 4.0

[sim]
horizon = 0.05
window = 1.0
record_times = 0.05
)");
    const RunResult r = run_cli("simulate --config " + cfg.string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("CFL") != std::string::npos);
}

TEST_CASE("unknown config key exits with code 2 and a line diagnostic") {
    const fs::path cfg = write_config("typo.cfg", R"(
[lattice]
dx = 0.1
x_lo = -3.0
x_hi = 4.0
dy = 0.2
)");
    const RunResult r = run_cli("simulate --config " + cfg.string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("dy") != std::string::npos);
    CHECK(r.output.find("line 6") != std::string::npos);
}

TEST_CASE("verify with no tests produces an empty report and exit 0") {
    const fs::path cfg = write_config("empty.cfg", R"(
[lattice]
dx = 0.1
x_lo = -3.0
x_hi = 4.0

[sim]
horizon = 0.05
window = 1.0
record_times = 0.05

[ensemble]
paths = 100
)");
    const fs::path out = fs::temp_directory_path() / "shelab_cli_test" / "out_empty";
    fs::remove_all(out);
    const RunResult r = run_cli("verify --config " + cfg.string() + " --out " + out.string());
    CHECK(r.exit_code == 0);
    const std::string report = slurp(out / "report.csv");
    CHECK(report == "test,params,estimate,se,oracle,verdict\n");
}

TEST_CASE("verify runs a small suite, is seed-stable, and the skewed oracle fails") {
    const std::string cfg_text = R"(
[lattice]
dx = 0.1
x_lo = -3.0
x_hi = 7.0

[coefficients]
gamma = 0.5

[sim]
horizon = 0.25
window = 4.0
record_times = 0.125, 0.25

[ensemble]
paths = 2000
seed = 4242
tests = clt, covariance, mgf, extremes
mgf_lambda = 1.0
lower_tail_a = 0.5
max_windows = 1, 2, 4
mgf_windows = 2, 4
)";
    const fs::path cfg = write_config("suite.cfg", cfg_text);
    const fs::path out = fs::temp_directory_path() / "shelab_cli_test" / "out_suite";
    fs::remove_all(out);
    const RunResult r = run_cli("verify --config " + cfg.string() + " --out " + out.string() +
                                " --workers 2");
    INFO(r.output);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(out / "report.csv"));
    CHECK(fs::exists(out / "summary.txt"));
    CHECK(fs::exists(out / "plots" / "covariance.svg"));
    CHECK(fs::exists(out / "plots" / "clt_histogram.svg"));
    CHECK(fs::exists(out / "plots" / "max_vs_logN.svg"));
    CHECK(fs::exists(out / "plots" / "mgf_trend.svg"));
    const std::string report1 = slurp(out / "report.csv");
    CHECK(report1.find("clt.variance") != std::string::npos);
    CHECK(report1.find("mgf.duality_gap") != std::string::npos);
    CHECK(report1.find("extremes.max_slope") != std::string::npos);

    // identical rerun with a different worker count
    const fs::path out_rerun = fs::temp_directory_path() / "shelab_cli_test" / "out_suite2";
    fs::remove_all(out_rerun);
    const RunResult r2 = run_cli("verify --config " + cfg.string() + " --out " +
                                 out_rerun.string() + " --workers 1");
    CHECK(r2.exit_code == 0);
    CHECK(slurp(out_rerun / "report.csv") == report1);

    // negative control: corrupted oracles must flip the exit code
    const fs::path out_skew = fs::temp_directory_path() / "shelab_cli_test" / "out_skew";
    fs::remove_all(out_skew);
    const RunResult r3 = run_cli("verify --config " + cfg.string() + " --out " +
                                 out_skew.string() + " --debug-skew-oracle");
    CHECK(r3.exit_code == 1);
}

TEST_CASE("dual command emits the profile and the rate comparison") {
    const fs::path cfg = write_config("dual.cfg", R"(
[dual]
lambda = 1.0
window = 40.0
horizon = 1.0
dx = 0.02
dt = 0.001
)");
    const fs::path out = fs::temp_directory_path() / "shelab_cli_test" / "out_dual";
    fs::remove_all(out);
    const RunResult r = run_cli("dual --config " + cfg.string() + " --out " + out.string());
    INFO(r.output);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("mass/N") != std::string::npos);
    const std::string csv = slurp(out / "dual_profile.csv");
    CHECK(csv.rfind("x,v\n", 0) == 0);

    // lambda = 0 gives the zero profile
    const fs::path cfg0 = write_config("dual0.cfg", R"(
[dual]
lambda = 0.0
window = 8.0
horizon = 0.5
dx = 0.02
dt = 0.001
)");
    const RunResult r0 = run_cli("dual --config " + cfg0.string() + " --out " + out.string());
    CHECK(r0.exit_code == 0);
    CHECK(r0.output.find("mass = 0") != std::string::npos);
}

TEST_CASE("rates command prints both tables as CSV") {
    const RunResult r = run_cli("rates");
    CHECK(r.exit_code == 0);
    CHECK(r.output.rfind("kind,param,t,value", 0) == 0);
    CHECK(r.output.find("mgf_rate,2,1,-1\n") != std::string::npos);
    CHECK(r.output.find("lower_tail_rate,0.25,1,-0.5\n") != std::string::npos);
}

TEST_CASE("missing config exits with 2") {
    const RunResult r = run_cli("simulate --config /nonexistent/nowhere.cfg");
    CHECK(r.exit_code == 2);
}
