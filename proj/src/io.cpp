#include "finstab/io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace finstab {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

json to_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json to_json(const Mat& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vec(m.row(i).transpose())));
    return out;
}

Vec vec_from_json(const json& j, const std::string& key) {
    if (!j.is_array()) throw InvalidInput("'" + key + "' must be an array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InvalidInput("'" + key + "' must be an array of numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Mat mat_from_json(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty()) throw InvalidInput("'" + key + "' must be a non-empty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw InvalidInput("'" + key + "' rows must have equal length");
        m.row(static_cast<Eigen::Index>(i)) = vec_from_json(j[i], key).transpose();
    }
    return m;
}

json model_to_json(const ModalModel& model) {
    json j;
    j["dim"] = model.dim();
    j["metric"] = to_json(model.metric());
    j["generator"] = to_json(model.generator());
    if (model.control_op()) j["control_op"] = to_json(*model.control_op());
    if (model.input_map()) j["input_map"] = to_json(*model.input_map());
    j["basis_labels"] = model.basis_labels();
    return j;
}

ModalModel model_from_json(const json& j) {
    if (!j.is_object()) throw InvalidInput("'model.inline' must be an object");
    if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long>() < 1) {
        throw InvalidInput("'model.inline.dim' must be a positive integer");
    }
    const auto n = static_cast<Eigen::Index>(j["dim"].get<long>());

    Mat metric;
    const json& jm = j.value("metric", json("identity"));
    if (jm.is_string()) {
        if (jm.get<std::string>() != "identity") throw InvalidInput("'model.inline.metric' must be \"identity\" or a matrix");
        metric = Mat::Identity(n, n);
    } else {
        metric = mat_from_json(jm, "model.inline.metric");
    }

    if (!j.contains("generator")) throw InvalidInput("'model.inline.generator' is required");
    Mat gen;
    const json& jg = j["generator"];
    if (jg.is_object()) {
        if (!jg.contains("diagonal")) throw InvalidInput("'model.inline.generator' object needs 'diagonal'");
        gen = vec_from_json(jg["diagonal"], "model.inline.generator.diagonal").asDiagonal();
    } else {
        gen = mat_from_json(jg, "model.inline.generator");
    }
    if (gen.rows() != n) throw InvalidInput("'model.inline.generator' does not match dim");

    std::vector<std::string> labels;
    if (j.contains("basis_labels")) {
        if (!j["basis_labels"].is_array()) throw InvalidInput("'model.inline.basis_labels' must be an array");
        for (const auto& s : j["basis_labels"]) {
            if (!s.is_string()) throw InvalidInput("'model.inline.basis_labels' must hold strings");
            labels.push_back(s.get<std::string>());
        }
    }
    const bool has_b = j.contains("control_op");
    const bool has_l = j.contains("input_map");
    if (has_b == has_l) throw InvalidInput("'model.inline' needs exactly one of 'control_op' / 'input_map'");
    if (has_b) return ModalModel::bilinear(metric, gen, mat_from_json(j["control_op"], "model.inline.control_op"), labels);
    Mat l;
    const json& jl = j["input_map"];
    if (jl.is_array() && !jl.empty() && jl[0].is_number()) {
        l = vec_from_json(jl, "model.inline.input_map");
    } else {
        l = mat_from_json(jl, "model.inline.input_map");
    }
    return ModalModel::linear(metric, gen, l, labels);
}

json decomposition_to_json(const DecompositionResult& dec) {
    json j;
    j["dim_w"] = dec.dim_w();
    j["dim_wperp"] = dec.dim_wperp();
    j["w_basis"] = to_json(Mat(dec.w_basis.transpose()));
    j["wperp_basis"] = to_json(Mat(dec.wperp_basis.transpose()));
    j["gamma"] = dec.gamma ? json(*dec.gamma) : json(nullptr);
    j["delta"] = dec.delta ? json(*dec.delta) : json("NotNilpotent");
    j["h1"] = {{"holds", dec.h1_holds}, {"residual", dec.h1_residual}};
    j["h3_holds"] = dec.h3_holds;
    j["h4_holds"] = dec.h4_holds;
    return j;
}

json phi_to_json(const PhiSpec& phi) {
    json j{{"kind", to_string(phi.kind)}};
    if (phi.kind == PhiKind::Constant) j["K"] = phi.constant;
    if (phi.kind == PhiKind::WaveK) {
        j["cap"] = phi.cap;
        j["floor"] = phi.floor;
        j["weights"] = to_json(phi.weights);
    }
    return j;
}

json controller_to_json(const ControllerSpec& spec) {
    json j{{"variant", to_string(spec.variant)},
           {"mu", spec.mu},
           {"phi", phi_to_json(spec.phi)},
           {"dead_zone", spec.dead_zone},
           {"u_max", spec.u_max}};
    if (spec.zeta) j["zeta"] = to_json(*spec.zeta);
    if (spec.varpi) j["varpi"] = to_json(*spec.varpi);
    return j;
}

json bound_to_json(const SettlingBound& b) {
    json j{{"value", b.value ? json(*b.value) : json(nullptr)},
           {"unbounded", !b.bounded()},
           {"v0", b.v0},
           {"gamma", b.gamma},
           {"delta", b.delta}};
    if (b.rank_one_alternative) j["rank_one_statement_value"] = *b.rank_one_alternative;
    return j;
}

json check_to_json(const CheckReport& c) {
    json j{{"applicable", c.applicable}, {"passes", c.passes}, {"max_violation", c.max_violation},
           {"tolerance", c.tolerance}};
    if (c.worst_index) j["worst_index"] = *c.worst_index;
    if (!c.detail.empty()) j["detail"] = c.detail;
    return j;
}

json diagnostics_to_json(const Diagnostics& d) {
    return json{{"steps_accepted", d.steps_accepted},
                {"steps_rejected", d.steps_rejected},
                {"saturation_events", d.saturation_events},
                {"phi_cap_events", d.phi_cap_events},
                {"v_increase_events", d.v_increase_events},
                {"rearm_events", d.rearm_events},
                {"latch_time", d.latch_time ? json(*d.latch_time) : json(nullptr)},
                {"clamp_time", d.clamp_time ? json(*d.clamp_time) : json(nullptr)},
                {"clamped_norm", d.clamped_norm}};
}

json h2_to_json(const H2Report& r) {
    json j{{"holds", r.holds},
           {"min_margin", r.min_margin},
           {"lipschitz_estimate", r.lipschitz_estimate},
           {"samples", r.samples}};
    if (r.exact_min_margin) j["exact_min_margin"] = *r.exact_min_margin;
    return j;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& state_labels,
                          const std::vector<std::string>& control_labels) {
    os << 't';
    for (const auto& s : state_labels) os << ',' << s;
    for (const auto& s : control_labels) os << ',' << s;
    os << ",V\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << format_number(traj.times[i]);
        for (Eigen::Index k = 0; k < traj.states[i].size(); ++k) os << ',' << format_number(traj.states[i](k));
        for (Eigen::Index k = 0; k < traj.controls[i].size(); ++k) os << ',' << format_number(traj.controls[i](k));
        os << ',' << format_number(traj.lyapunov[i]) << '\n';
    }
}

void write_matrix_csv(std::ostream& os, const Mat& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            if (k) os << ',';
            os << format_number(m(i, k));
        }
        os << '\n';
    }
}

}  // namespace finstab
