#include "finstab/frontends.hpp"

#include <cmath>
#include <numbers>
#include <regex>

namespace finstab {

namespace {

constexpr double kPi = std::numbers::pi;

Mat coordinate_span(const std::vector<bool>& mask, bool want_perp) {
    const auto n = static_cast<Eigen::Index>(mask.size());
    Mat out(n, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (mask[static_cast<std::size_t>(i)] != want_perp) continue;
        out.conservativeResize(Eigen::NoChange, out.cols() + 1);
        out.col(out.cols() - 1) = Vec::Unit(n, i);
    }
    return out;
}

std::vector<std::string> paired_labels(const std::string& first, const std::string& second, int n) {
    std::vector<std::string> out;
    for (int j = 1; j <= n; ++j) out.push_back(first + std::to_string(j));
    for (int j = 1; j <= n; ++j) out.push_back(second + std::to_string(j));
    return out;
}

}  // namespace

std::string to_string(FrontendKind k) {
    switch (k) {
        case FrontendKind::Heat1D: return "Heat1D";
        case FrontendKind::TransportHeat2D: return "TransportHeat2D";
        case FrontendKind::Wave1D: return "Wave1D";
        case FrontendKind::Beam1D: return "Beam1D";
    }
    return "?";
}

FrontendKind frontend_kind_from_string(const std::string& s) {
    if (s == "Heat1D") return FrontendKind::Heat1D;
    if (s == "TransportHeat2D") return FrontendKind::TransportHeat2D;
    if (s == "Wave1D") return FrontendKind::Wave1D;
    if (s == "Beam1D") return FrontendKind::Beam1D;
    throw InvalidInput("unknown frontend kind '" + s + "'");
}

Vec mode_frequencies(int count) {
    Vec w(count);
    for (int j = 0; j < count; ++j) w(j) = (j + 1) * kPi;
    return w;
}

Mat Frontend::exact_w() const { return coordinate_span(wperp_mask, false); }

DecompositionResult Frontend::decomposition() const {
    DecompositionResult dec = decomposition_from_coordinates(model, wperp_mask);
    certify(model, dec, analytic_delta);
    return dec;
}

Frontend heat_model(const FrontendSpec& spec) {
    const int n = spec.n_modes;
    if (n < 2) throw InvalidInput("heat model needs n_modes >= 2");
    Vec diag(n);
    std::vector<std::string> labels;
    for (int j = 1; j <= n; ++j) {
        diag(j - 1) = -(j * kPi) * (j * kPi);
        labels.push_back("phi" + std::to_string(j));
    }
    Mat b = Mat::Identity(n, n);
    b(0, 0) = 0.0;
    std::vector<bool> mask(static_cast<std::size_t>(n), true);
    mask[0] = false;

    ControllerSpec preset;
    preset.variant = ControlVariant::BilinearPhi;
    preset.mu = 0.25;
    preset.phi = PhiSpec::zero();
    return Frontend{spec, ModalModel::bilinear(Mat::Identity(n, n), diag.asDiagonal(), b, labels),
                    mask, PhiSpec::zero(), std::nullopt, preset};
}

Frontend wave_model(const FrontendSpec& spec) {
    const int n = spec.n_modes;
    const int q = spec.q;
    if (n < 1) throw InvalidInput("wave model needs n_modes >= 1");
    if (q < 1 || q > n) throw InvalidInput("wave model needs 1 <= q <= n_modes");
    const Vec freq = mode_frequencies(n);
    Mat a = Mat::Zero(2 * n, 2 * n);
    Mat b = Mat::Zero(2 * n, 2 * n);
    std::vector<bool> mask(static_cast<std::size_t>(2 * n), false);
    for (int j = 0; j < n; ++j) {
        a(j, n + j) = freq(j);
        a(n + j, j) = -freq(j);
        if (j < q) {
            b(n + j, n + j) = 1.0;
            mask[static_cast<std::size_t>(j)] = true;
            mask[static_cast<std::size_t>(n + j)] = true;
        }
    }
    const PhiSpec phi = PhiSpec::wave_k(n, freq.head(q), 1e3);
    ControllerSpec preset;
    preset.variant = ControlVariant::BilinearPhi;
    preset.mu = 0.25;
    preset.phi = phi;
    return Frontend{spec, ModalModel::bilinear(Mat::Identity(2 * n, 2 * n), a, b, paired_labels("a", "b", n)),
                    mask, phi, std::nullopt, preset};
}

Frontend beam_model(const FrontendSpec& spec) {
    const int n = spec.n_modes;
    if (n < 1) throw InvalidInput("beam model needs n_modes >= 1");
    Vec h = spec.h_coeffs.size() == 0 ? Vec(Vec::Unit(n, 0)) : spec.h_coeffs;
    if (h.size() != n) throw InvalidInput("beam h_coeffs must have n_modes entries");
    if (!h.allFinite() || h.isZero(0.0)) throw InvalidInput("beam profile h must be nonzero");

    Mat a = Mat::Zero(2 * n, 2 * n);
    Vec weight(2 * n);
    Mat l = Mat::Zero(2 * n, 1);
    std::vector<bool> mask(static_cast<std::size_t>(2 * n), false);
    for (int j = 0; j < n; ++j) {
        const double w = (j + 1) * kPi;
        const double lambda = w * w * w * w;
        a(j, n + j) = 1.0;
        a(n + j, j) = -lambda;
        weight(j) = lambda;
        weight(n + j) = 1.0;
        l(n + j, 0) = h(j);
        // Distinct eigenvalues: the observable modes are exactly those h touches.
        if (h(j) != 0.0) {
            mask[static_cast<std::size_t>(j)] = true;
            mask[static_cast<std::size_t>(n + j)] = true;
        }
    }
    FrontendSpec stored = spec;
    stored.h_coeffs = h;

    ControllerSpec preset;
    preset.variant = ControlVariant::RankOne;
    preset.mu = 0.25;
    preset.zeta = Vec(l.col(0));
    preset.varpi = Vec::Ones(1);
    return Frontend{stored,
                    ModalModel::linear(weight.asDiagonal(), a, l, paired_labels("alpha", "beta", n)),
                    mask, PhiSpec::zero(), std::nullopt, preset};
}

Frontend build_frontend(const FrontendSpec& spec) {
    switch (spec.kind) {
        case FrontendKind::Heat1D: return heat_model(spec);
        case FrontendKind::Wave1D: return wave_model(spec);
        case FrontendKind::Beam1D: return beam_model(spec);
        case FrontendKind::TransportHeat2D:
            throw InvalidInput("TransportHeat2D is a hybrid model; use HybridModel");
    }
    throw InvalidInput("unknown frontend kind");
}

StateVec initial_state_preset(const Frontend& fe, const DecompositionResult& dec, const std::string& preset,
                              std::uint64_t default_seed) {
    return state_preset(fe.model, dec, fe.spec.kind != FrontendKind::Heat1D, preset, default_seed);
}

StateVec state_preset(const ModalModel& model, const DecompositionResult& dec, bool paired,
                      const std::string& preset, std::uint64_t default_seed) {
    const Eigen::Index dim = model.dim();
    static const std::regex random_re(R"(^(wperp|w)-random(?:\((\d+)\))?$)");
    std::smatch match;
    if (std::regex_match(preset, match, random_re)) {
        Rng rng(match[2].matched ? std::stoull(match[2].str()) : default_seed);
        const Mat& basis = match[1].str() == "w" ? dec.w_basis : dec.wperp_basis;
        if (basis.cols() == 0) throw InvalidInput("preset '" + preset + "': subspace is {0}");
        return random_unit_in_span(rng, model.metric(), basis);
    }

    const Eigen::Index half = paired ? dim / 2 : dim;
    static const std::regex term_re(R"(\s*([+-]?)\s*(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*\*\s*)?(mode|pos|vel)(\d+)\s*)");
    StateVec y = StateVec::Zero(dim);
    auto it = preset.cbegin();
    bool any = false;
    while (it != preset.cend()) {
        std::smatch t;
        if (!std::regex_search(it, preset.cend(), t, term_re, std::regex_constants::match_continuous)) {
            throw InvalidInput("unknown initial-state preset '" + preset + "'");
        }
        if (any && t[1].str().empty()) throw InvalidInput("preset terms must be joined by + or -");
        double c = t[2].matched ? std::stod(t[2].str()) : 1.0;
        if (t[1].str() == "-") c = -c;
        const long k = std::stol(t[4].str());
        if (k < 1 || k > half) throw InvalidInput("preset '" + preset + "': mode index out of range");
        Eigen::Index idx = k - 1;
        if (t[3].str() == "vel") {
            if (!paired) throw InvalidInput("velK presets need a second-order model");
            idx += half;
        }
        y(idx) += c;
        any = true;
        it = t[0].second;
    }
    if (!any) throw InvalidInput("empty initial-state preset");
    return y;
}

}  // namespace finstab
