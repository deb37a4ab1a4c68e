#include "finstab/acceptance.hpp"
#include "finstab/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace finstab;

namespace {

int cmd_run(const std::string& config, const std::string& out) {
    ScenarioConfig cfg;
    try {
        cfg = load_scenario(config);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    std::optional<std::string> dir = out.empty() ? cfg.outputs.dir : std::optional<std::string>(out);
    const ScenarioReport rep = run_scenario(cfg, dir);
    if (!rep.error.empty()) std::cerr << rep.error << '\n';
    for (const auto& [name, c] : rep.checks) {
        std::cout << (c.passes ? "PASS " : (c.applicable ? "FAIL " : "N/A  ")) << name;
        if (!c.detail.empty()) std::cout << "  " << c.detail;
        std::cout << '\n';
    }
    if (rep.trajectory.settling_time) std::cout << "settling_time " << format_number(*rep.trajectory.settling_time) << '\n';
    if (rep.bound && rep.bound->value) std::cout << "bound " << format_number(*rep.bound->value) << '\n';
    return rep.exit_code;
}

int cmd_check(const std::string& config) {
    ScenarioConfig cfg;
    try {
        cfg = load_scenario(config);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    const CheckCommandReport rep = check_scenario(cfg);
    std::cout << rep.report.dump(2) << '\n';
    return rep.exit_code;
}

int cmd_suite(bool list, const std::string& filter, const AcceptanceOptions& opts) {
    if (list) {
        for (const auto& c : acceptance_criteria())
            if (glob_match(filter, c.name)) std::cout << c.id << ' ' << c.name << '\n';
        return 0;
    }
    const auto results = run_acceptance(filter, opts);
    std::cout << format_table(results);
    bool ok = true;
    for (const auto& r : results) {
        std::cout << format_result_line(r) << '\n';
        ok = ok && r.passed;
    }
    return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-time stabilization of bilinear and linear modal systems"};
    app.require_subcommand(1);

    std::string config, out, filter = "*";
    bool list = false;
    AcceptanceOptions opts;

    auto* run = app.add_subcommand("run", "Run a scenario and write its artifacts");
    run->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "Output directory");

    auto* check = app.add_subcommand("check", "Decomposition and hypothesis checks only");
    check->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);

    auto* suite = app.add_subcommand("suite", "Built-in acceptance scenarios");
    suite->add_flag("--list", list, "Print scenario names without running");
    suite->add_option("--filter", filter, "Glob on scenario names");
    suite->add_option("--tol-scale", opts.tol_scale, "Multiply every tolerance");
    suite->add_option("--seed", opts.seed, "Seed for randomized scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfigError;
    }
    if (const char* s = std::getenv("FINSTAB_SEED")) opts.seed = std::stoull(s);

    try {
        if (*run) return cmd_run(config, out);
        if (*check) return cmd_check(config);
        return cmd_suite(list, filter, opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}
