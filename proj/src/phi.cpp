#include "finstab/phi.hpp"
#include "finstab/operator_model.hpp"

#include <algorithm>
#include <cmath>

namespace finstab {

namespace {

double raw_wave_k(const PhiSpec& phi, const Vec& y) {
    const Eigen::Index q = phi.weights.size();
    if (y.size() < 2 * phi.n_modes) throw InvalidInput("WaveK: state shorter than 2*n_modes");
    double k = 0.0;
    for (Eigen::Index i = 0; i < q; ++i) {
        const double a = y(i);
        const double b = y(phi.n_modes + i);
        k = std::max(k, phi.weights(i) * std::abs(a) / std::max(std::abs(b), phi.floor));
    }
    return k;
}

}  // namespace

PhiSpec PhiSpec::constant_value(double k) {
    if (!(k >= 0.0)) throw InvalidInput("phi constant must be nonnegative");
    PhiSpec p;
    p.kind = PhiKind::Constant;
    p.constant = k;
    return p;
}

PhiSpec PhiSpec::wave_k(Eigen::Index n_modes, Vec weights, double cap, double floor) {
    if (weights.size() < 1 || weights.size() > n_modes) {
        throw InvalidInput("WaveK: need 1 <= q <= n_modes weights");
    }
    if (!(cap > 0.0) || !(floor > 0.0)) throw InvalidInput("WaveK: cap and floor must be positive");
    PhiSpec p;
    p.kind = PhiKind::WaveK;
    p.n_modes = n_modes;
    p.weights = std::move(weights);
    p.cap = cap;
    p.floor = floor;
    return p;
}

bool PhiSpec::capped_at(const Vec& y) const {
    return kind == PhiKind::WaveK && raw_wave_k(*this, y) > cap;
}

double evaluate_phi(const PhiSpec& phi, const Vec& y) {
    switch (phi.kind) {
        case PhiKind::Zero: return 0.0;
        case PhiKind::Constant: return phi.constant;
        case PhiKind::WaveK: return std::min(phi.cap, raw_wave_k(phi, y));
    }
    return 0.0;
}

std::string to_string(PhiKind kind) {
    switch (kind) {
        case PhiKind::Zero: return "Zero";
        case PhiKind::Constant: return "Constant";
        case PhiKind::WaveK: return "WaveK";
    }
    return "?";
}

PhiKind phi_kind_from_string(const std::string& s) {
    if (s == "Zero") return PhiKind::Zero;
    if (s == "Constant") return PhiKind::Constant;
    if (s == "WaveK") return PhiKind::WaveK;
    throw InvalidInput("unknown phi kind '" + s + "'");
}

}  // namespace finstab
