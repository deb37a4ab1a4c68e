#include "finstab/scenario.hpp"
#include "finstab/svg.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace finstab {

namespace fs = std::filesystem;

namespace {

void reject_unknown_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + (path.empty() ? key : path + "." + key) + "'");
        }
    }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json* find(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double get_number(const json& j, const std::string& key, const std::string& path, double def) {
    const json* v = find(j, key);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError("'" + join(path, key) + "' must be a number");
    return v->get<double>();
}

long get_integer(const json& j, const std::string& key, const std::string& path, long def) {
    const json* v = find(j, key);
    if (!v) return def;
    if (!v->is_number_integer()) throw ConfigError("'" + join(path, key) + "' must be an integer");
    return v->get<long>();
}

bool get_bool(const json& j, const std::string& key, const std::string& path, bool def) {
    const json* v = find(j, key);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError("'" + join(path, key) + "' must be true or false");
    return v->get<bool>();
}

std::string get_string(const json& j, const std::string& key, const std::string& path, const std::string& def) {
    const json* v = find(j, key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError("'" + join(path, key) + "' must be a string");
    return v->get<std::string>();
}

const json& require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError("'" + path + "' must be an object");
    return j;
}

// Rethrows model-layer validation errors as config errors under `path`.
template <class F>
auto keyed(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
}

FrontendSpec parse_frontend(const json& j) {
    require_object(j, "model.frontend");
    reject_unknown_keys(j, "model.frontend", {"kind", "n_modes", "q", "grid_n", "omega_h", "h_coeffs"});
    FrontendSpec fs;
    if (!find(j, "kind")) throw ConfigError("'model.frontend.kind' is required");
    fs.kind = keyed("model.frontend.kind", [&] { return frontend_kind_from_string(get_string(j, "kind", "model.frontend", "")); });
    const long default_modes = fs.kind == FrontendKind::Heat1D ? 16 : 8;
    fs.n_modes = static_cast<int>(get_integer(j, "n_modes", "model.frontend", default_modes));
    fs.q = static_cast<int>(get_integer(j, "q", "model.frontend", 1));
    fs.grid_n = static_cast<int>(get_integer(j, "grid_n", "model.frontend", 64));
    fs.omega_h = get_number(j, "omega_h", "model.frontend", 0.25);
    if (const json* h = find(j, "h_coeffs")) fs.h_coeffs = keyed("model.frontend.h_coeffs", [&] { return vec_from_json(*h, "model.frontend.h_coeffs"); });
    if (fs.n_modes < 1) throw ConfigError("'model.frontend.n_modes' must be positive");
    return fs;
}

IntegrationOpts parse_integration(const json& j) {
    require_object(j, "integration");
    reject_unknown_keys(j, "integration",
                        {"t_max", "rtol", "atol", "dt_init", "dt_min", "dt_max", "eps_settle", "sample_dt"});
    IntegrationOpts o;
    o.t_max = get_number(j, "t_max", "integration", o.t_max);
    o.rtol = get_number(j, "rtol", "integration", o.rtol);
    o.atol = get_number(j, "atol", "integration", o.atol);
    o.dt_init = get_number(j, "dt_init", "integration", o.dt_init);
    o.dt_min = get_number(j, "dt_min", "integration", o.dt_min);
    o.dt_max = get_number(j, "dt_max", "integration", o.dt_max);
    o.eps_settle = get_number(j, "eps_settle", "integration", o.eps_settle);
    o.sample_dt = get_number(j, "sample_dt", "integration", o.sample_dt);
    keyed("integration", [&] { o.validate(); return 0; });
    return o;
}

std::vector<std::string> control_labels(const ModalModel& model) {
    if (model.is_bilinear()) return {"u"};
    std::vector<std::string> out;
    for (Eigen::Index i = 1; i <= model.input_dim(); ++i) out.push_back("v" + std::to_string(i));
    return out;
}

std::vector<std::string> state_labels(const ModalModel& model) {
    std::vector<std::string> labels = model.basis_labels();
    if (labels.empty()) {
        for (Eigen::Index i = 1; i <= model.dim(); ++i) labels.push_back("y" + std::to_string(i));
    }
    return labels;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << text;
}

void write_outputs(const std::optional<std::string>& dir, const OutputOpts& outs, const Trajectory& traj,
                   const std::vector<std::string>& labels, const std::vector<std::string>& ctrl_labels,
                   const json& summary, const PlotOptions& plot) {
    if (!dir) return;
    fs::create_directories(*dir);
    if (outs.trajectory_csv && traj.size() > 0) {
        std::ostringstream os;
        write_trajectory_csv(os, traj, labels, ctrl_labels);
        write_text(fs::path(*dir) / "trajectory.csv", os.str());
    }
    if (outs.summary) write_text(fs::path(*dir) / "summary.json", summary.dump(2) + "\n");
    if (outs.plot && traj.size() > 0) write_text(fs::path(*dir) / "plot.svg", render_trajectory_svg(traj, plot));
}

json settling_json(const Trajectory& traj) {
    return traj.settling_time ? json(*traj.settling_time) : json(nullptr);
}

CheckReport bound_check(const std::optional<SettlingBound>& bound, const Trajectory& traj) {
    CheckReport c;
    if (!bound || !bound->value) {
        c.passes = false;
        c.detail = "settling bound is Unbounded";
        return c;
    }
    if (!traj.settling_time) {
        c.passes = false;
        c.max_violation = std::numeric_limits<double>::infinity();
        c.detail = "no settling within t_max";
        return c;
    }
    c.max_violation = *traj.settling_time - *bound->value;
    c.passes = c.max_violation <= 0.0;
    c.detail = "settling_time - bound";
    return c;
}

CheckReport decay_check(const Trajectory& traj, double rate, double mu, double tol) {
    CheckReport c = verify_decay(traj, rate, mu, tol);
    const Diagnostics& d = traj.diagnostics;
    if (d.saturation_events > 0 || d.phi_cap_events > 0) {
        c.passes = false;
        c.detail = "control saturated (" + std::to_string(d.saturation_events) + " steps) or phi capped (" +
                   std::to_string(d.phi_cap_events) + " steps): envelope not certified";
    }
    return c;
}

bool all_pass(const std::map<std::string, CheckReport>& checks) {
    for (const auto& [_, c] : checks) {
        if (c.applicable && !c.passes) return false;
    }
    return true;
}

json checks_json(const std::map<std::string, CheckReport>& checks) {
    json j = json::object();
    for (const auto& [k, c] : checks) j[k] = check_to_json(c);
    return j;
}

// --- transport-heat pipeline -------------------------------------------------

HybridState hybrid_initial_state(const HybridModel& hm, const json& j) {
    if (j.is_string() || (j.is_object() && find(j, "preset"))) {
        const std::string name = j.is_string() ? j.get<std::string>() : get_string(j, "preset", "initial_state", "");
        if (name != "default") throw ConfigError("'initial_state.preset' must be \"default\" for TransportHeat2D");
        return hm.default_initial_state();
    }
    if (!j.is_object()) throw ConfigError("'initial_state' must be \"default\" or {phi, psi} for TransportHeat2D");
    reject_unknown_keys(j, "initial_state", {"phi", "psi"});
    HybridState s = hm.zero_state();
    if (const json* p = find(j, "phi")) s.phi = keyed("initial_state.phi", [&] { return mat_from_json(*p, "initial_state.phi"); });
    if (const json* p = find(j, "psi")) s.psi = keyed("initial_state.psi", [&] { return mat_from_json(*p, "initial_state.psi"); });
    if (s.phi.rows() != hm.n_modes() || s.phi.cols() != hm.n_modes()) throw ConfigError("'initial_state.phi' must be n_modes x n_modes");
    if (s.psi.rows() != hm.grid_n() || s.psi.cols() != hm.grid_n()) throw ConfigError("'initial_state.psi' must be grid_n x grid_n");
    return s;
}

ScenarioReport run_hybrid(const ScenarioConfig& cfg, const std::optional<std::string>& out_dir) {
    ScenarioReport rep;
    rep.name = cfg.name;
    const FrontendSpec& fspec = *cfg.frontend;
    const HybridModel hm = keyed("model.frontend", [&] { return HybridModel(fspec.n_modes, fspec.grid_n, fspec.omega_h); });
    const HybridState s0 = hybrid_initial_state(hm, cfg.initial_state);

    const json& cj = cfg.controller;
    reject_unknown_keys(cj, "controller", {"variant", "mu", "dead_zone", "u_max", "phi"});
    const std::string variant = get_string(cj, "variant", "controller", "BilinearPhi");
    if (variant != "BilinearPhi" && variant != "ZeroControl") {
        throw ConfigError("'controller.variant' must be BilinearPhi or ZeroControl for TransportHeat2D");
    }
    if (const json* p = find(cj, "phi")) {
        if (get_string(*p, "kind", "controller.phi", "Zero") != "Zero") {
            throw ConfigError("'controller.phi.kind' must be Zero for TransportHeat2D");
        }
    }
    HybridRunOpts ro;
    ro.t_max = cfg.integration.t_max;
    ro.eps_settle = cfg.integration.eps_settle;
    ro.mu = get_number(cj, "mu", "controller", 0.25);
    ro.dead_zone = get_number(cj, "dead_zone", "controller", 1e-12);
    ro.u_max = get_number(cj, "u_max", "controller", 1e6);
    ro.zero_control = variant == "ZeroControl";
    if (!ro.zero_control && !(ro.mu > 0.0 && ro.mu < 0.5)) throw ConfigError("'controller.mu' must lie in (0, 1/2)");

    for (CheckKind k : cfg.checks) {
        if (k == CheckKind::Decay && ro.zero_control) throw ConfigError("'checks': Decay requires a controlled run");
    }

    rep.trajectory = simulate_hybrid(hm, s0, ro);
    const Trajectory& traj = rep.trajectory;

    const double v0 = hm.lyapunov(s0);
    const Eigen::Index oc = hm.omega_cells();
    const double outside = s0.psi.squaredNorm() - s0.psi.topLeftCorner(oc, oc).squaredNorm();
    SettlingBound b;
    b.v0 = v0;
    b.gamma = hm.gamma();
    if (ro.zero_control) {
        if (s0.phi.isZero(0.0) && s0.psi.isZero(0.0)) b.value = 0.0;
    } else {
        b.delta = outside > 0.0 ? hm.nilpotency_time() : 0.0;
        const double t1 = v0 > 0.0 ? std::pow(v0, ro.mu) / (2.0 * b.gamma * ro.mu) : 0.0;
        b.value = std::max(t1, b.delta);
    }
    rep.bound = b;

    for (CheckKind k : cfg.checks) {
        switch (k) {
            case CheckKind::Decay:
                rep.checks["Decay"] = decay_check(traj, hm.gamma(), ro.mu, cfg.tolerances.decay);
                break;
            case CheckKind::Stability:
                rep.checks["Stability"] = verify_lyapunov_stability(traj, 0.0);
                break;
            case CheckKind::Bound:
                rep.checks["Bound"] = bound_check(rep.bound, traj);
                break;
            case CheckKind::Split: {
                CheckReport c;
                c.applicable = false;
                c.detail = "no splitting identity for the hybrid model";
                rep.checks["Split"] = c;
                break;
            }
        }
    }

    const bool nilpotent = hm.verify_nilpotency(s0.psi, std::max(1.0, ro.t_max));
    rep.exit_code = all_pass(rep.checks) ? kExitOk : kExitCheckFailed;

    json s;
    s["name"] = cfg.name;
    s["seed"] = effective_seed(cfg);
    s["model"] = {{"kind", "TransportHeat2D"}, {"n_modes", hm.n_modes()}, {"grid_n", hm.grid_n()},
                  {"omega_h", hm.omega_h()}, {"omega_used", 0.0}};
    s["controller"] = {{"variant", variant}, {"mu", ro.mu}, {"dead_zone", ro.dead_zone}, {"u_max", ro.u_max}};
    s["decomposition"] = {{"gamma", hm.gamma()}, {"delta", hm.nilpotency_time()}, {"nilpotency_verified", nilpotent}};
    s["settling_time"] = settling_json(traj);
    s["bound"] = bound_to_json(b);
    s["checks"] = checks_json(rep.checks);
    s["diagnostics"] = diagnostics_to_json(traj.diagnostics);
    s["final_norm"] = traj.norms.back();
    s["exit_code"] = rep.exit_code;
    rep.summary = s;

    const std::optional<std::string> dir = out_dir ? out_dir : cfg.outputs.dir;
    if (dir) {
        // The CSV carries the heat coefficients; the Psi grids go to separate files.
        Trajectory slim = traj;
        const Eigen::Index np = static_cast<Eigen::Index>(hm.n_modes()) * hm.n_modes();
        for (auto& st : slim.states) st = Vec(st.head(np));
        std::vector<std::string> labels;
        for (int k = 0; k < hm.n_modes(); ++k)
            for (int j = 0; j < hm.n_modes(); ++j) labels.push_back("Phi_" + std::to_string(j) + "_" + std::to_string(k));
        PlotOptions po{cfg.name, ro.zero_control ? std::nullopt : std::optional<double>(hm.gamma()), ro.mu};
        write_outputs(dir, cfg.outputs, slim, labels, {"u"}, s, po);
        if (cfg.outputs.psi_csv) {
            auto dump = [&](const std::string& file, std::size_t idx) {
                std::ostringstream os;
                write_matrix_csv(os, hm.unflatten(traj.states[idx]).psi);
                write_text(fs::path(*dir) / file, os.str());
            };
            dump("psi_initial.csv", 0);
            for (std::size_t i = 0; i < traj.size(); ++i) {
                if (traj.times[i] == 1.0) dump("psi_t1.csv", i);
            }
            dump("psi_final.csv", traj.size() - 1);
        }
    }
    return rep;
}

// --- modal pipeline ---------------------------------------------------------

struct ModalSetup {
    std::optional<Frontend> fe;
    std::optional<ModalModel> model;
    DecompositionResult dec;
    std::optional<double> svd_distance;
};

ModalSetup setup_modal(const ScenarioConfig& cfg) {
    ModalSetup m;
    if (cfg.frontend) {
        m.fe = keyed("model.frontend", [&] { return build_frontend(*cfg.frontend); });
        if (cfg.analytic_delta) m.fe->analytic_delta = cfg.analytic_delta;
        m.model = m.fe->model;
        m.dec = keyed("analytic_delta", [&] { return m.fe->decomposition(); });
        const DecompositionResult svd = unobservable_subspace(*m.model);
        m.svd_distance = subspace_distance(m.model->metric(), svd.w_basis, m.dec.w_basis);
    } else {
        m.model = *cfg.inline_model;
        m.dec = unobservable_subspace(*m.model);
        keyed("analytic_delta", [&] { certify(*m.model, m.dec, cfg.analytic_delta); return 0; });
    }
    return m;
}

StateVec modal_initial_state(const ScenarioConfig& cfg, const ModalSetup& m, std::uint64_t seed) {
    const json& j = cfg.initial_state;
    const bool paired = m.fe && m.fe->spec.kind != FrontendKind::Heat1D;
    if (j.is_array()) {
        const Vec y = keyed("initial_state", [&] { return vec_from_json(j, "initial_state"); });
        if (y.size() != m.model->dim()) throw ConfigError("'initial_state' has wrong length");
        return y;
    }
    std::string preset;
    if (j.is_string()) {
        preset = j.get<std::string>();
    } else if (j.is_object() && find(j, "preset")) {
        reject_unknown_keys(j, "initial_state", {"preset"});
        preset = get_string(j, "preset", "initial_state", "");
    } else {
        throw ConfigError("'initial_state' must be an array, a preset string or {\"preset\": ...}");
    }
    return keyed("initial_state.preset", [&] { return state_preset(*m.model, m.dec, paired, preset, seed); });
}

}  // namespace

std::string to_string(CheckKind k) {
    switch (k) {
        case CheckKind::Decay: return "Decay";
        case CheckKind::Split: return "Split";
        case CheckKind::Stability: return "Stability";
        case CheckKind::Bound: return "Bound";
    }
    return "?";
}

CheckKind check_kind_from_string(const std::string& s) {
    if (s == "Decay") return CheckKind::Decay;
    if (s == "Split") return CheckKind::Split;
    if (s == "Stability") return CheckKind::Stability;
    if (s == "Bound") return CheckKind::Bound;
    throw InvalidInput("unknown check '" + s + "'");
}

namespace {

// Keys and scalar types only; model-dependent checks happen in resolve_controller.
void check_controller_shape(const json& j) {
    reject_unknown_keys(j, "controller", {"variant", "mu", "phi", "dead_zone", "u_max", "zeta", "varpi"});
    if (find(j, "variant")) {
        keyed("controller.variant", [&] { return control_variant_from_string(get_string(j, "variant", "controller", "")); });
    }
    for (const char* k : {"mu", "dead_zone", "u_max"}) get_number(j, k, "controller", 0.0);
    if (const json* p = find(j, "phi")) {
        require_object(*p, "controller.phi");
        reject_unknown_keys(*p, "controller.phi", {"kind", "K", "cap", "floor", "weights", "mode"});
        keyed("controller.phi.kind", [&] { return phi_kind_from_string(get_string(*p, "kind", "controller.phi", "Zero")); });
        for (const char* k : {"K", "cap", "floor"}) get_number(*p, k, "controller.phi", 0.0);
        get_string(*p, "mode", "controller.phi", "state");
    }
}

}  // namespace

ScenarioConfig parse_scenario(const json& j) {
    require_object(j, "<root>");
    reject_unknown_keys(j, "", {"name", "seed", "model", "controller", "initial_state", "integration", "checks",
                                "outputs", "tolerances", "analytic_delta", "h2_samples"});
    ScenarioConfig cfg;
    cfg.name = get_string(j, "name", "", cfg.name);
    if (const json* s = find(j, "seed")) {
        if (!s->is_number_integer() || s->get<long long>() < 0) throw ConfigError("'seed' must be a nonnegative integer");
        cfg.seed = s->get<std::uint64_t>();
    }

    const json* model = find(j, "model");
    if (!model) throw ConfigError("'model' is required");
    require_object(*model, "model");
    reject_unknown_keys(*model, "model", {"frontend", "inline"});
    const json* fe = find(*model, "frontend");
    const json* in = find(*model, "inline");
    if ((fe != nullptr) == (in != nullptr)) throw ConfigError("'model' needs exactly one of 'frontend' / 'inline'");
    if (fe) cfg.frontend = parse_frontend(*fe);
    if (in) cfg.inline_model = keyed("model.inline", [&] { return model_from_json(*in); });

    if (const json* c = find(j, "controller")) {
        cfg.controller = require_object(*c, "controller");
        check_controller_shape(cfg.controller);
    }

    const json* init = find(j, "initial_state");
    if (!init) throw ConfigError("'initial_state' is required");
    cfg.initial_state = *init;

    if (const json* integ = find(j, "integration")) cfg.integration = parse_integration(*integ);

    if (const json* checks = find(j, "checks")) {
        if (!checks->is_array()) throw ConfigError("'checks' must be an array of strings");
        for (const auto& c : *checks) {
            if (!c.is_string()) throw ConfigError("'checks' must be an array of strings");
            cfg.checks.push_back(keyed("checks", [&] { return check_kind_from_string(c.get<std::string>()); }));
        }
    }
    if (const json* o = find(j, "outputs")) {
        require_object(*o, "outputs");
        reject_unknown_keys(*o, "outputs", {"dir", "trajectory_csv", "summary", "plot", "psi_csv"});
        if (find(*o, "dir")) cfg.outputs.dir = get_string(*o, "dir", "outputs", "");
        cfg.outputs.trajectory_csv = get_bool(*o, "trajectory_csv", "outputs", true);
        cfg.outputs.summary = get_bool(*o, "summary", "outputs", true);
        cfg.outputs.plot = get_bool(*o, "plot", "outputs", true);
        cfg.outputs.psi_csv = get_bool(*o, "psi_csv", "outputs", true);
    }
    if (const json* t = find(j, "tolerances")) {
        require_object(*t, "tolerances");
        reject_unknown_keys(*t, "tolerances", {"decay", "split"});
        cfg.tolerances.decay = get_number(*t, "decay", "tolerances", cfg.tolerances.decay);
        cfg.tolerances.split = get_number(*t, "split", "tolerances", cfg.tolerances.split);
    }
    if (find(j, "analytic_delta")) cfg.analytic_delta = get_number(j, "analytic_delta", "", 0.0);
    cfg.h2_samples = static_cast<int>(get_integer(j, "h2_samples", "", cfg.h2_samples));
    if (cfg.h2_samples < 1) throw ConfigError("'h2_samples' must be positive");
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "': JSON parse error: " + e.what());
    }
    return parse_scenario(j);
}

std::uint64_t effective_seed(const ScenarioConfig& cfg) {
    if (const char* env = std::getenv("FINSTAB_SEED")) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw ConfigError("FINSTAB_SEED must be a nonnegative integer");
    }
    return cfg.seed;
}

ControllerSpec resolve_controller(const json& j, const ModalModel& model, const Frontend* fe,
                                  const DecompositionResult& dec, const StateVec& y0) {
    require_object(j, "controller");
    reject_unknown_keys(j, "controller", {"variant", "mu", "phi", "dead_zone", "u_max", "zeta", "varpi"});
    ControllerSpec spec;
    if (fe) {
        spec = fe->preset;
    } else {
        spec.variant = model.is_bilinear() ? ControlVariant::BilinearPhi : ControlVariant::LinearPhi;
    }
    if (find(j, "variant")) {
        spec.variant = keyed("controller.variant", [&] { return control_variant_from_string(get_string(j, "variant", "controller", "")); });
    }
    spec.mu = get_number(j, "mu", "controller", spec.mu);
    spec.dead_zone = get_number(j, "dead_zone", "controller", spec.dead_zone);
    spec.u_max = get_number(j, "u_max", "controller", spec.u_max);
    if (const json* z = find(j, "zeta")) spec.zeta = keyed("controller.zeta", [&] { return vec_from_json(*z, "controller.zeta"); });
    if (const json* w = find(j, "varpi")) spec.varpi = keyed("controller.varpi", [&] { return vec_from_json(*w, "controller.varpi"); });

    std::string mode = "state";
    if (const json* p = find(j, "phi")) {
        require_object(*p, "controller.phi");
        reject_unknown_keys(*p, "controller.phi", {"kind", "K", "cap", "floor", "weights", "mode"});
        const PhiKind kind = keyed("controller.phi.kind", [&] { return phi_kind_from_string(get_string(*p, "kind", "controller.phi", "Zero")); });
        mode = get_string(*p, "mode", "controller.phi", "state");
        if (mode != "state" && mode != "initial") throw ConfigError("'controller.phi.mode' must be \"state\" or \"initial\"");
        switch (kind) {
            case PhiKind::Zero:
                spec.phi = PhiSpec::zero();
                break;
            case PhiKind::Constant:
                spec.phi = keyed("controller.phi.K", [&] { return PhiSpec::constant_value(get_number(*p, "K", "controller.phi", 0.0)); });
                break;
            case PhiKind::WaveK: {
                Vec weights;
                Eigen::Index n_modes = model.dim() / 2;
                if (const json* w = find(*p, "weights")) {
                    weights = keyed("controller.phi.weights", [&] { return vec_from_json(*w, "controller.phi.weights"); });
                } else if (fe && fe->phi.kind == PhiKind::WaveK) {
                    weights = fe->phi.weights;
                } else {
                    throw ConfigError("'controller.phi.weights' is required for WaveK on this model");
                }
                if (fe && fe->phi.kind == PhiKind::WaveK) n_modes = fe->phi.n_modes;
                const double cap = get_number(*p, "cap", "controller.phi", 1e3);
                const double floor = get_number(*p, "floor", "controller.phi", 1e-12);
                spec.phi = keyed("controller.phi", [&] { return PhiSpec::wave_k(n_modes, weights, cap, floor); });
                break;
            }
        }
    }
    if (mode == "initial" && spec.phi.kind == PhiKind::WaveK) {
        spec.phi = PhiSpec::constant_value(evaluate_phi(spec.phi, Vec(dec.projection * y0)));
    }
    keyed("controller", [&] { validate(spec, model); return 0; });
    return spec;
}

ScenarioReport run_scenario(const ScenarioConfig& cfg, const std::optional<std::string>& out_dir) {
    ScenarioReport rep;
    rep.name = cfg.name;
    const std::optional<std::string> dir = out_dir ? out_dir : cfg.outputs.dir;
    auto fail = [&](int code, const std::string& msg) {
        rep.exit_code = code;
        rep.error = msg;
        rep.summary = {{"name", cfg.name}, {"exit_code", code}, {"error", msg}};
    };
    try {
        if (cfg.frontend && cfg.frontend->kind == FrontendKind::TransportHeat2D) return run_hybrid(cfg, out_dir);

        const std::uint64_t seed = effective_seed(cfg);
        const ModalSetup m = setup_modal(cfg);
        const ModalModel& model = *m.model;
        const DecompositionResult& dec = m.dec;
        if (model.is_bilinear()) {
            const ControlOperatorReport cr = validate_control_operator(model);
            if (!cr.passes) throw ConfigError("'model': control operator is not self-adjoint positive semidefinite");
        }
        const StateVec y0 = modal_initial_state(cfg, m, seed);
        const ControllerSpec spec = resolve_controller(cfg.controller, model, m.fe ? &*m.fe : nullptr, dec, y0);
        const FeedbackLaw law(spec, model, dec);

        for (CheckKind k : cfg.checks) {
            if (k == CheckKind::Decay && law.envelope_rate() <= 0.0) {
                throw ConfigError("'checks': Decay requires a certified gamma for this controller");
            }
        }

        std::string bound_note;
        try {
            rep.bound = settling_bound(spec, model, dec, y0);
        } catch (const InvalidInput& e) {
            bound_note = e.what();
        }

        try {
            rep.trajectory = simulate(model, law, y0, cfg.integration);
        } catch (const IntegrationStalled& e) {
            rep.trajectory = e.partial();
            fail(kExitStalled, e.what());
            rep.summary["settling_time"] = settling_json(rep.trajectory);
            rep.summary["diagnostics"] = diagnostics_to_json(rep.trajectory.diagnostics);
            write_outputs(dir, cfg.outputs, rep.trajectory, state_labels(model), control_labels(model), rep.summary,
                          PlotOptions{cfg.name, std::nullopt, spec.mu});
            return rep;
        }
        const Trajectory& traj = rep.trajectory;
        const double omega = quasi_contraction_type(model) + law.compensation_norm();

        for (CheckKind k : cfg.checks) {
            switch (k) {
                case CheckKind::Decay:
                    rep.checks["Decay"] = decay_check(traj, law.envelope_rate(), spec.mu, cfg.tolerances.decay);
                    break;
                case CheckKind::Split:
                    rep.checks["Split"] = verify_split(model, dec, spec, traj, cfg.tolerances.split);
                    break;
                case CheckKind::Stability:
                    rep.checks["Stability"] = verify_lyapunov_stability(traj, omega);
                    break;
                case CheckKind::Bound:
                    rep.checks["Bound"] = bound_check(rep.bound, traj);
                    break;
            }
        }
        rep.exit_code = all_pass(rep.checks) ? kExitOk : kExitCheckFailed;

        json s;
        s["name"] = cfg.name;
        s["seed"] = seed;
        s["model"] = {{"kind", m.fe ? to_string(m.fe->spec.kind) : std::string("inline")},
                      {"dim", model.dim()},
                      {"quasi_contraction_type", quasi_contraction_type(model)},
                      {"omega_used", omega}};
        s["controller"] = controller_to_json(spec);
        json dj = decomposition_to_json(dec);
        dj.erase("w_basis");
        dj.erase("wperp_basis");
        if (m.svd_distance) dj["svd_vs_exact_distance"] = *m.svd_distance;
        if (spec.variant != ControlVariant::ZeroControl && dec.dim_wperp() > 0) {
            Rng rng(seed);
            dj["h2"] = h2_to_json(check_h2(model, dec, spec.phi, cfg.h2_samples, rng));
        }
        s["decomposition"] = dj;
        s["initial_state"] = to_json(y0);
        s["settling_time"] = settling_json(traj);
        s["bound"] = rep.bound ? bound_to_json(*rep.bound) : json{{"value", nullptr}, {"unbounded", true}, {"detail", bound_note}};
        s["checks"] = checks_json(rep.checks);
        s["diagnostics"] = diagnostics_to_json(traj.diagnostics);
        s["final_norm"] = traj.norms.back();
        s["exit_code"] = rep.exit_code;
        rep.summary = s;

        const bool has_rate = law.envelope_rate() > 0.0;
        write_outputs(dir, cfg.outputs, traj, state_labels(model), control_labels(model), s,
                      PlotOptions{cfg.name, has_rate ? std::optional<double>(law.envelope_rate()) : std::nullopt, spec.mu});
    } catch (const InvalidInput& e) {
        fail(kExitConfigError, e.what());
    } catch (const InconsistentOperator& e) {
        fail(kExitCheckFailed, e.what());
    }
    return rep;
}

CheckCommandReport check_scenario(const ScenarioConfig& cfg) {
    CheckCommandReport out;
    try {
        if (cfg.frontend && cfg.frontend->kind == FrontendKind::TransportHeat2D) {
            const FrontendSpec& f = *cfg.frontend;
            const HybridModel hm = keyed("model.frontend", [&] { return HybridModel(f.n_modes, f.grid_n, f.omega_h); });
            const bool nil = hm.verify_nilpotency(hm.default_initial_state().psi, 2.0);
            out.report = {{"model", "TransportHeat2D"},
                          {"gamma", hm.gamma()},
                          {"delta", hm.nilpotency_time()},
                          {"h1", {{"holds", false},
                                  {"detail", "the transport flow carries patch mass out of the patch"}}},
                          {"h2", {{"holds", true}, {"detail", "phi = 0: heat part dissipative, transport part contractive"}}},
                          {"h3_holds", true},
                          {"h4_holds", nil}};
            out.exit_code = kExitCheckFailed;
            return out;
        }
        const ModalSetup m = setup_modal(cfg);
        const ModalModel& model = *m.model;
        const std::uint64_t seed = effective_seed(cfg);
        json r;
        r["model"] = model_to_json(model);
        r["quasi_contraction_type"] = quasi_contraction_type(model);
        const ControlOperatorReport cr = validate_control_operator(model);
        r["control_operator"] = {{"applicable", cr.applicable},
                                 {"self_adjoint_residual", cr.self_adjoint_residual},
                                 {"min_rayleigh_quotient", cr.min_rayleigh_quotient},
                                 {"passes", cr.passes}};
        r["decomposition"] = decomposition_to_json(m.dec);
        const H1Report h1 = check_h1(model, m.dec);
        r["h1"] = {{"holds", h1.holds},
                   {"residual", h1.residual},
                   {"generator_self_adjoint", h1.generator_self_adjoint},
                   {"generator_skew_adjoint", h1.generator_skew_adjoint}};
        if (m.svd_distance) r["svd_vs_exact_distance"] = *m.svd_distance;

        PhiSpec phi = m.fe ? m.fe->phi : PhiSpec::zero();
        if (find(cfg.controller, "phi")) {
            const StateVec y0 = modal_initial_state(cfg, m, seed);
            phi = resolve_controller(cfg.controller, model, m.fe ? &*m.fe : nullptr, m.dec, y0).phi;
        }
        bool h2_ok = true;
        if (m.dec.dim_wperp() > 0) {
            Rng rng(seed);
            const H2Report h2 = check_h2(model, m.dec, phi, cfg.h2_samples, rng);
            r["h2"] = h2_to_json(h2);
            h2_ok = h2.holds;
        }
        const bool ok = (!cr.applicable || cr.passes) && h1.holds && h2_ok && m.dec.h3_holds;
        out.exit_code = ok ? kExitOk : kExitCheckFailed;
        r["all_hold"] = ok;
        out.report = r;
    } catch (const InvalidInput& e) {
        out.exit_code = kExitConfigError;
        out.report = {{"error", e.what()}};
    }
    return out;
}

}  // namespace finstab
