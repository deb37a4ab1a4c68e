#include "finstab/transport_heat.hpp"

#include <cmath>
#include <numbers>

namespace finstab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kSubsteps = 2;
}  // namespace

HybridModel::HybridModel(int n_modes, int grid_n, double omega_h)
    : n_modes_(n_modes), grid_n_(grid_n), omega_h_(omega_h) {
    if (n_modes < 1) throw InvalidInput("transport-heat: n_modes must be >= 1");
    if (grid_n < 1) throw InvalidInput("transport-heat: grid_n must be >= 1");
    if (!(omega_h > 0.0 && omega_h < 1.0)) throw InvalidInput("transport-heat: omega_h must lie in (0, 1)");
    const double cells = omega_h * grid_n;
    omega_cells_ = static_cast<int>(std::lround(cells));
    if (std::abs(cells - omega_cells_) > 1e-9 || omega_cells_ < 1) {
        throw InvalidInput("transport-heat: omega_h must be a multiple of 1/grid_n");
    }
    eig_.resize(n_modes, n_modes);
    for (int j = 0; j < n_modes; ++j)
        for (int k = 0; k < n_modes; ++k) eig_(j, k) = heat_eigenvalue(j, k);
    cos_table_.resize(n_modes, grid_n);
    for (int j = 0; j < n_modes; ++j)
        for (int i = 0; i < grid_n; ++i) cos_table_(j, i) = cosine_mode(j, (i + 0.5) / grid_n);
}

double HybridModel::heat_eigenvalue(int j, int k) { return -(j * j + k * k) * kPi * kPi; }

double HybridModel::cosine_mode(int j, double x) {
    return j == 0 ? 1.0 : std::numbers::sqrt2 * std::cos(j * kPi * x);
}

HybridState HybridModel::zero_state() const {
    return {Mat::Zero(n_modes_, n_modes_), Mat::Zero(grid_n_, grid_n_)};
}

double HybridModel::norm_squared(const HybridState& s) const {
    return s.phi.squaredNorm() + grid_l2_squared(s.psi);
}

double HybridModel::lyapunov(const HybridState& s) const {
    const double cell = 1.0 / (static_cast<double>(grid_n_) * grid_n_);
    return s.phi.squaredNorm() + s.psi.topLeftCorner(omega_cells_, omega_cells_).squaredNorm() * cell;
}

double HybridModel::control(const HybridState& s, double mu, double dead_zone, double u_max,
                            bool latched) const {
    const double v = lyapunov(s);
    if (latched || v <= dead_zone) return 0.0;
    return std::max(-std::pow(v, -mu), -u_max);
}

Mat HybridModel::transport_step(const Mat& psi, const std::vector<double>& u_sub) const {
    if (psi.rows() != grid_n_ || psi.cols() != grid_n_) throw InvalidInput("transport_step: grid size mismatch");
    if (u_sub.empty()) throw InvalidInput("transport_step: need at least one control sample");
    const int nsub = static_cast<int>(u_sub.size());
    const double h = 1.0 / grid_n_;
    Mat out = Mat::Zero(grid_n_, grid_n_);
    for (int ix = 0; ix + 1 < grid_n_; ++ix) {
        for (int iy = 0; iy + 1 < grid_n_; ++iy) {
            const double v = psi(ix, iy);
            if (v == 0.0) continue;
            double expo = 0.0;
            for (int k = 0; k < nsub; ++k) {
                const double frac = (k + 0.5) / nsub;
                const double x = (ix + 0.5 + frac) * h;
                const double y = (iy + 0.5 + frac) * h;
                if (x < omega_h_ && y < omega_h_) expo += u_sub[static_cast<std::size_t>(k)] * h / nsub;
            }
            out(ix + 1, iy + 1) = expo == 0.0 ? v : v * std::exp(expo);
        }
    }
    return out;
}

HybridState HybridModel::step(const HybridState& s, double u) const {
    HybridState out;
    out.phi = s.phi.cwiseProduct(((eig_.array() + u) * dt()).exp().matrix());
    out.psi = transport_step(s.psi, std::vector<double>(kSubsteps, u));
    return out;
}

Mat HybridModel::reconstruct_heat(const Mat& phi) const {
    // field(ix, iy) = sum_jk phi(j,k) c_j(x) c_k(y)
    return cos_table_.transpose() * phi * cos_table_;
}

Mat HybridModel::project_heat(const Mat& field) const {
    const double cell = 1.0 / (static_cast<double>(grid_n_) * grid_n_);
    return cos_table_ * field * cos_table_.transpose() * cell;
}

double HybridModel::grid_l2_squared(const Mat& field) const {
    return field.squaredNorm() / (static_cast<double>(grid_n_) * grid_n_);
}

Vec HybridModel::flatten(const HybridState& s) const {
    Vec out(s.phi.size() + s.psi.size());
    out.head(s.phi.size()) = s.phi.reshaped();
    out.tail(s.psi.size()) = s.psi.reshaped();
    return out;
}

HybridState HybridModel::unflatten(const Vec& v) const {
    const Eigen::Index np = static_cast<Eigen::Index>(n_modes_) * n_modes_;
    if (v.size() != np + static_cast<Eigen::Index>(grid_n_) * grid_n_) {
        throw InvalidInput("unflatten: wrong vector length");
    }
    HybridState s;
    s.phi = v.head(np).reshaped(n_modes_, n_modes_);
    s.psi = v.tail(v.size() - np).reshaped(grid_n_, grid_n_);
    return s;
}

bool HybridModel::verify_nilpotency(const Mat& psi0, double t_max) const {
    Mat psi = psi0;
    const std::vector<double> zero(kSubsteps, 0.0);
    const long steps = std::lround(std::ceil(t_max * grid_n_));
    for (long k = 1; k <= steps; ++k) {
        psi = transport_step(psi, zero);
        if (k >= grid_n_ && !psi.isZero(0.0)) return false;
    }
    return true;
}

HybridState HybridModel::default_initial_state() const {
    HybridState s = zero_state();
    s.phi(0, 0) = 0.5;
    if (n_modes_ > 1) s.phi(1, 1) = 0.3;
    for (int ix = 0; ix < grid_n_; ++ix)
        for (int iy = 0; iy < grid_n_; ++iy)
            s.psi(ix, iy) = std::sin(kPi * (ix + 0.5) / grid_n_) * std::sin(kPi * (iy + 0.5) / grid_n_);
    return s;
}

Trajectory simulate_hybrid(const HybridModel& model, const HybridState& s0, const HybridRunOpts& opts) {
    if (!(opts.t_max >= 0.0)) throw InvalidInput("simulate_hybrid: t_max must be >= 0");
    if (!opts.zero_control && !(opts.mu > 0.0 && opts.mu < 0.5)) {
        throw InvalidInput("simulate_hybrid: mu must lie in (0, 1/2)");
    }
    if (s0.phi.rows() != model.n_modes() || s0.phi.cols() != model.n_modes() ||
        s0.psi.rows() != model.grid_n() || s0.psi.cols() != model.grid_n()) {
        throw InvalidInput("simulate_hybrid: initial state has wrong shape");
    }
    const double dt = model.dt();
    const double mu = opts.mu;
    auto remaining = [&](double v) { return std::pow(std::max(v, 0.0), mu) / (2.0 * model.gamma() * mu); };

    Trajectory traj;
    Diagnostics& diag = traj.diagnostics;
    HybridState s = s0;
    bool latched = false;
    auto control_at = [&](const HybridState& st) {
        return opts.zero_control ? 0.0 : model.control(st, mu, opts.dead_zone, opts.u_max, latched);
    };
    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.states.push_back(model.flatten(s));
        traj.controls.push_back(Vec::Constant(1, control_at(s)));
        traj.lyapunov.push_back(model.lyapunov(s));
        traj.norms.push_back(std::sqrt(model.norm_squared(s)));
        traj.error_bound.push_back(0.0);
    };

    record(0.0);
    const long steps = std::lround(std::ceil(opts.t_max * model.grid_n() - 1e-9));
    for (long k = 1; k <= steps; ++k) {
        const double v_old = model.lyapunov(s);
        const double u = control_at(s);
        if (u <= -opts.u_max) ++diag.saturation_events;
        s = model.step(s, u);
        ++diag.steps_accepted;
        const double t = static_cast<double>(k) / model.grid_n();
        const double v = model.lyapunov(s);

        if (!opts.zero_control) {
            if (!latched) {
                if (v > v_old * (1.0 + 1e-9) + 1e-15) ++diag.v_increase_events;
                if (v_old > opts.dead_zone && v <= opts.dead_zone) {
                    latched = true;
                    diag.latch_time = t;
                }
            } else if (v > 2.0 * opts.dead_zone) {
                ++diag.rearm_events;
            }
            const bool entering = v > 0.0 && v < opts.dead_zone && remaining(v) <= dt;
            const bool overshoot = v > 0.0 && v_old > 0.0 && remaining(v_old) <= dt;
            if (entering || overshoot) {
                HybridState snapped = s;
                snapped.phi.setZero();
                snapped.psi.topLeftCorner(model.omega_cells(), model.omega_cells()).setZero();
                HybridState removed{s.phi, s.psi - snapped.psi};
                diag.clamped_norm = std::max(diag.clamped_norm, std::sqrt(model.norm_squared(removed)));
                s = std::move(snapped);
                if (!latched) {
                    latched = true;
                    diag.latch_time = t;
                }
                if (!diag.clamp_time) diag.clamp_time = t;
            }
        }
        record(t);
    }
    traj.settling_time = detect_settling(traj.times, traj.norms, opts.eps_settle);
    return traj;
}

}  // namespace finstab
