#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "shelab/config.hpp"
#include "shelab/run_config.hpp"

using namespace shelab;

namespace {

const char* kMinimal = R"(
# minimal simulate config
[lattice]
dx = 0.1
x_lo = -3.0
x_hi = 4.0

[coefficients]
gamma = 0.5
regularization = exact

[sim]
horizon = 0.0
window = 1.0
record_times = 0.0
)";

} // namespace

TEST_CASE("config parse and typed access") {
    ConfigFile cfg = ConfigFile::parse_string(kMinimal);
    CHECK(cfg.get_double("lattice", "dx") == Catch::Approx(0.1));
    CHECK(cfg.get_double("lattice", "dt", 123.0) == 123.0); // fallback
    CHECK(cfg.get_string("coefficients", "regularization") == "exact");
    CHECK(cfg.get_doubles("sim", "record_times") == std::vector<double>{0.0});
    CHECK_THROWS_AS(cfg.get_double("lattice", "missing"), ConfigError);
}

TEST_CASE("config rejects malformed input with line diagnostics") {
    CHECK_THROWS_WITH(ConfigFile::parse_string("[a]\nkey value\n"),
                      Catch::Matchers::ContainsSubstring("line 2"));
    CHECK_THROWS_WITH(ConfigFile::parse_string("key = 1\n"),
                      Catch::Matchers::ContainsSubstring("before any [section]"));
    CHECK_THROWS_WITH(ConfigFile::parse_string("[a\nk = 1\n"),
                      Catch::Matchers::ContainsSubstring("malformed section"));
    CHECK_THROWS_WITH(ConfigFile::parse_string("[a]\nk = 1\nk = 2\n"),
                      Catch::Matchers::ContainsSubstring("duplicate key"));
    CHECK_THROWS_WITH(ConfigFile::parse_string("[a]\nk = abc\n").get_double("a", "k"),
                      Catch::Matchers::ContainsSubstring("expected number"));
}

TEST_CASE("schema rejects unknown keys and sections") {
    ConfigFile bad = ConfigFile::parse_string("[lattice]\ndx = 0.1\ntypo_key = 2\n");
    CHECK_THROWS_WITH(bad.enforce_schema(config_schema()),
                      Catch::Matchers::ContainsSubstring("typo_key"));
    ConfigFile bad_section = ConfigFile::parse_string("[unknown]\nx = 1\n");
    CHECK_THROWS_AS(bad_section.enforce_schema(config_schema()), ConfigError);
    ConfigFile good = ConfigFile::parse_string(kMinimal);
    CHECK_NOTHROW(good.enforce_schema(config_schema()));
}

TEST_CASE("serialization round trip is the identity") {
    ConfigFile cfg = ConfigFile::parse_string(kMinimal);
    const std::string once = cfg.serialize();
    ConfigFile reparsed = ConfigFile::parse_string(once);
    CHECK(reparsed == cfg);
    CHECK(reparsed.serialize() == once); // idempotent
}

TEST_CASE("manifest is a valid config and round trips") {
    ConfigFile cfg = ConfigFile::parse_string(kMinimal);
    const ConfigFile manifest = build_manifest(cfg, "simulate", 42, 2, "out");
    CHECK_NOTHROW(manifest.enforce_schema(config_schema()));
    ConfigFile reparsed = ConfigFile::parse_string(manifest.serialize());
    CHECK(reparsed == manifest);
    CHECK(reparsed.get_u64("manifest", "seed", 0) == 42);
    CHECK(reparsed.get_string("manifest", "command") == "simulate");
    CHECK(reparsed.get_string("manifest", "version") == kArtifactVersion);
}

TEST_CASE("resolve_sim builds a validated config") {
    ConfigFile cfg = ConfigFile::parse_string(kMinimal);
    const SimConfig sim = resolve_sim(cfg);
    CHECK(sim.grid.n_cells == 70);
    CHECK(sim.grid.dt == Catch::Approx(0.005)); // dx^2/2 default
    CHECK(sim.window == 1.0);
    CHECK_FALSE(sim.coeff.is_regularized());
}

TEST_CASE("resolve_coefficients parses regularization") {
    ConfigFile cfg = ConfigFile::parse_string(
        "[lattice]\ndx = 0.1\nx_lo = -3\nx_hi = 4\n[coefficients]\ngamma = 0.3\nregularization "
        "= 8\n[sim]\nhorizon = 0\nwindow = 1\n");
    const CoefficientSpec spec = resolve_coefficients(cfg);
    CHECK(spec.is_regularized());
    CHECK(spec.n == 8);
    ConfigFile bad = ConfigFile::parse_string("[coefficients]\nregularization = maybe\n");
    CHECK_THROWS_AS(resolve_coefficients(bad), ConfigError);
}

TEST_CASE("resolve_tests rejects unknown selectors") {
    ConfigFile cfg = ConfigFile::parse_string("[ensemble]\ntests = clt, covariance\n");
    const TestSelection sel = resolve_tests(cfg);
    CHECK(sel.clt);
    CHECK(sel.covariance);
    CHECK_FALSE(sel.mgf);
    ConfigFile bad = ConfigFile::parse_string("[ensemble]\ntests = clt, nope\n");
    CHECK_THROWS_AS(resolve_tests(bad), ConfigError);
}
