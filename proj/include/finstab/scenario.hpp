// Scenario files: parsing, the run pipeline (model -> decomposition ->
// controller -> simulation -> checks) and the assumption-only check command.

#pragma once

#include "finstab/io.hpp"
#include "finstab/transport_heat.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace finstab {

/// Bad configuration; the message names the offending key.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

enum class CheckKind { Decay, Split, Stability, Bound };
std::string to_string(CheckKind k);
CheckKind check_kind_from_string(const std::string& s);

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfigError = 2, kExitStalled = 3 };

struct OutputOpts {
    std::optional<std::string> dir;  // used when no output directory is passed in
    bool trajectory_csv = true;
    bool summary = true;
    bool plot = true;
    bool psi_csv = true;
};

struct Tolerances {
    double decay = 1e-6;
    double split = 1e-8;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 0;
    std::optional<FrontendSpec> frontend;
    std::optional<ModalModel> inline_model;
    json controller = json::object();      // resolved against the model at run time
    json initial_state;                    // array, preset string or {"preset": ...}
    IntegrationOpts integration;
    std::vector<CheckKind> checks;
    OutputOpts outputs;
    Tolerances tolerances;
    std::optional<double> analytic_delta;
    int h2_samples = 1000;
};

ScenarioConfig parse_scenario(const json& j);
ScenarioConfig load_scenario(const std::string& path);

/// The config seed, or FINSTAB_SEED when that is set.
std::uint64_t effective_seed(const ScenarioConfig& cfg);

/// Controller from its JSON stanza. Missing fields fall back to the
/// front-end preset (e.g. the beam's zeta / varpi, the wave's WaveK weights).
/// phi.mode = "initial" freezes WaveK at its value on P y0.
ControllerSpec resolve_controller(const json& j, const ModalModel& model, const Frontend* fe,
                                  const DecompositionResult& dec, const StateVec& y0);

struct ScenarioReport {
    std::string name;
    int exit_code = kExitOk;
    std::string error;
    Trajectory trajectory;
    std::optional<SettlingBound> bound;
    std::map<std::string, CheckReport> checks;
    json summary;
};

/// Runs the scenario; writes trajectory.csv / summary.json / plot.svg (and Psi
/// grids for the transport-heat model) into out_dir when given.
ScenarioReport run_scenario(const ScenarioConfig& cfg, const std::optional<std::string>& out_dir = std::nullopt);

struct CheckCommandReport {
    int exit_code = kExitOk;
    json report;
};

/// Decomposition and hypothesis certificates without simulating.
CheckCommandReport check_scenario(const ScenarioConfig& cfg);

}  // namespace finstab
