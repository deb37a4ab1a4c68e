#include "finstab/acceptance.hpp"
#include "finstab/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace finstab;
namespace fs = std::filesystem;

namespace {

json heat_json() {
    return json::parse(R"J({
      "name": "heat-mode2",
      "model": {"frontend": {"kind": "Heat1D", "n_modes": 8}},
      "controller": {"variant": "BilinearPhi", "mu": 0.25},
      "initial_state": "mode2",
      "integration": {"t_max": 2.5},
      "checks": ["Decay", "Split", "Stability", "Bound"]
    })J");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("finstab_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("heat scenario writes artifacts and meets its bound") {
    const fs::path out = scratch("heat");
    const ScenarioReport rep = run_scenario(parse_scenario(heat_json()), out.string());
    CHECK(rep.exit_code == kExitOk);
    const json summary = json::parse(slurp(out / "summary.json"));
    const double bound = std::pow(1.0, 0.25) / (2 * 1.0 * 0.25);
    CHECK(summary["bound"]["value"].get<double>() == doctest::Approx(bound));
    CHECK(summary["settling_time"].get<double>() <= bound);
    CHECK(fs::exists(out / "trajectory.csv"));
    CHECK(slurp(out / "plot.svg").rfind("<svg", 0) == 0);

    std::istringstream csv(slurp(out / "trajectory.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header.rfind("t,", 0) == 0);
    CHECK(slurp(out / "trajectory.csv").find('\r') == std::string::npos);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
    json j = heat_json();
    j["initial_state"] = "wperp-random";
    j["seed"] = 42;
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    run_scenario(parse_scenario(j), a.string());
    run_scenario(parse_scenario(j), b.string());
    CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
}

TEST_CASE("parse errors name the offending key") {
    json j = heat_json();
    j["integration"]["tmax"] = 1.0;
    try {
        parse_scenario(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("tmax") != std::string::npos);
    }
    j = heat_json();
    j["controller"]["mu"] = "quarter";
    try {
        parse_scenario(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("mu") != std::string::npos);
    }
    const fs::path bad = scratch("bad.json");
    std::ofstream(bad) << "{\"name\": ";
    CHECK_THROWS_AS(load_scenario(bad.string()), ConfigError);
}

TEST_CASE("saturated wave run fails its decay check") {
    json j = json::parse(R"J({
      "name": "wave-saturated",
      "model": {"frontend": {"kind": "Wave1D", "n_modes": 4, "q": 2}},
      "controller": {"variant": "BilinearPhi", "mu": 0.25, "u_max": 5.0},
      "initial_state": "wperp-random(3)",
      "integration": {"t_max": 0.5},
      "checks": ["Decay"]
    })J");
    const ScenarioReport rep = run_scenario(parse_scenario(j));
    CHECK(rep.exit_code == kExitCheckFailed);
    CHECK_FALSE(rep.checks.at("Decay").passes);
    CHECK(rep.checks.at("Decay").detail.find("saturated") != std::string::npos);
}

TEST_CASE("exit codes") {
    json j = heat_json();
    j["controller"]["variant"] = "ZeroControl";
    j["checks"] = {"Decay"};
    CHECK(run_scenario(parse_scenario(j)).exit_code == kExitConfigError);

    j = heat_json();
    j["integration"]["dt_min"] = 1e-3;
    j["integration"]["dt_init"] = 1e-3;
    j["integration"]["rtol"] = 1e-14;
    j["integration"]["atol"] = 1e-16;
    const ScenarioReport stalled = run_scenario(parse_scenario(j));
    CHECK(stalled.exit_code == kExitStalled);
}

TEST_CASE("seed override from the environment") {
    json j = heat_json();
    j["seed"] = 1;
    const ScenarioConfig cfg = parse_scenario(j);
    setenv("FINSTAB_SEED", "77", 1);
    CHECK(effective_seed(cfg) == 77);
    unsetenv("FINSTAB_SEED");
    CHECK(effective_seed(cfg) == 1);
}

TEST_CASE("check command") {
    const CheckCommandReport rep = check_scenario(parse_scenario(heat_json()));
    CHECK(rep.exit_code == kExitOk);
    CHECK(rep.report.dump().find("h1") != std::string::npos);
}

TEST_CASE("suite listing, filtering and zero tolerance") {
    CHECK(acceptance_criteria().size() == 9);
    CHECK(glob_match("*heat*", "heat-settling-bound"));
    CHECK_FALSE(glob_match("wave*", "beam-rank-one"));

    AcceptanceOptions strict;
    strict.tol_scale = 0.0;
    const auto tight = run_acceptance("unobservability-barrier", strict);
    REQUIRE(tight.size() == 1);
    CHECK_FALSE(tight[0].passed);
    const auto other = run_acceptance("control-invariance");
    REQUIRE(other.size() == 1);
    CHECK(other[0].passed);
    CHECK(format_result_line(other[0]).rfind("PASS", 0) == 0);
}
