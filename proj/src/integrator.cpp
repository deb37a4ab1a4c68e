#include "finstab/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace finstab {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB5{35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
constexpr std::array<double, 7> kB4{5179.0 / 57600,    0, 7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

struct StepResult {
    Vec y;
    Vec err;
    bool saturated = false;
    bool phi_capped = false;
};

StepResult dp45_step(const ModalModel& model, const FeedbackLaw& law, const Vec& y, double h,
                     bool latched) {
    std::array<Vec, 7> k;
    StepResult out;
    const Mat& a = model.generator();
    for (int i = 0; i < 7; ++i) {
        Vec yi = y;
        for (int j = 0; j < i; ++j) {
            if (kA[i][j] != 0.0) yi.noalias() += h * kA[i][j] * k[j];
        }
        if (i == 6) out.y = yi;
        const ControlValue c = law.evaluate(yi, latched);
        out.saturated = out.saturated || c.saturated;
        out.phi_capped = out.phi_capped || c.phi_capped;
        k[i] = a * yi + law.actuation(yi, c);
    }
    out.err = Vec::Zero(y.size());
    for (int i = 0; i < 7; ++i) out.err.noalias() += h * (kB5[i] - kB4[i]) * k[i];
    return out;
}

double metric_norm(const Mat& m, const Vec& x) { return std::sqrt(std::max(0.0, x.dot(m * x))); }

// Law-specific quantity compared against the dead zone.
double visible(const FeedbackLaw& law, double v) {
    return law.spec().variant == ControlVariant::RankOne ? std::sqrt(v) : v;
}

}  // namespace

void IntegrationOpts::validate() const {
    if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw InvalidInput("t_max must be >= 0");
    if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidInput("rtol and atol must be positive");
    if (!(dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max)) {
        throw InvalidInput("need 0 < dt_min <= dt_init <= dt_max");
    }
    if (!(eps_settle > 0.0)) throw InvalidInput("eps_settle must be positive");
    if (sample_dt < 0.0) throw InvalidInput("sample_dt must be >= 0");
}

Vec closed_loop_field(const ModalModel& model, const FeedbackLaw& law, const StateVec& y, bool latched) {
    return model.generator() * y + law.actuation(y, law.evaluate(y, latched));
}

Vec closed_loop_field(const ModalModel& model, const DecompositionResult& dec,
                      const ControllerSpec& spec, const StateVec& y) {
    return closed_loop_field(model, FeedbackLaw(spec, model, dec), y);
}

std::optional<double> detect_settling(const std::vector<double>& times, const std::vector<double>& norms,
                                      double eps) {
    std::optional<double> out;
    for (std::size_t i = times.size(); i-- > 0;) {
        if (!(norms[i] <= eps)) break;
        out = times[i];
    }
    return out;
}

Trajectory simulate(const ModalModel& model, const FeedbackLaw& law, const StateVec& y0,
                    const IntegrationOpts& opts) {
    opts.validate();
    if (y0.size() != model.dim()) throw InvalidInput("simulate: initial state has wrong dimension");
    if (!y0.allFinite()) throw InvalidInput("simulate: initial state is not finite");

    const Mat& m = model.metric();
    const ControllerSpec& spec = law.spec();
    const double dz = spec.dead_zone;
    const double mu = spec.mu;
    const double rate = law.envelope_rate();
    const bool can_clamp = rate > 0.0 && spec.variant != ControlVariant::ZeroControl;
    auto remaining = [&](double v) { return std::pow(std::max(v, 0.0), mu) / (2.0 * rate * mu); };

    Trajectory traj;
    Diagnostics& diag = traj.diagnostics;
    bool latched = false;
    double err_acc = 0.0;
    Vec y = y0;

    auto record = [&](double t) {
        const ControlValue c = law.evaluate(y, latched);
        traj.times.push_back(t);
        traj.states.push_back(y);
        traj.controls.push_back(c.value);
        traj.lyapunov.push_back(c.lyapunov);
        traj.norms.push_back(metric_norm(m, y));
        traj.error_bound.push_back(err_acc);
    };

    const double sdt = opts.effective_sample_dt();
    const long n_samples = sdt > 0.0 ? static_cast<long>(std::ceil(opts.t_max / sdt - 1e-9)) : 0;
    auto sample_time = [&](long k) { return k >= n_samples ? opts.t_max : k * sdt; };

    double t = 0.0;
    double h = opts.dt_init;
    double v = law.lyapunov(y);
    record(0.0);

    for (long k = 1; k <= n_samples; ++k) {
        const double target = sample_time(k);
        while (true) {
            const double gap = target - t;
            if (gap <= 1e-13 * std::max(1.0, std::abs(target))) break;
            h = std::min(h, opts.dt_max);
            const bool hitting = gap <= h * (1.0 + 1e-12);
            const double h_step = hitting ? gap : h;

            StepResult st = dp45_step(model, law, y, h_step, latched);
            double err = 0.0;
            if (st.y.allFinite() && st.err.allFinite()) {
                for (Eigen::Index i = 0; i < y.size(); ++i) {
                    const double sc = opts.atol + opts.rtol * std::max(std::abs(y(i)), std::abs(st.y(i)));
                    err += (st.err(i) / sc) * (st.err(i) / sc);
                }
                err = std::sqrt(err / std::max<Eigen::Index>(1, y.size()));
            } else {
                err = std::numeric_limits<double>::infinity();
            }

            if (err > 1.0) {
                ++diag.steps_rejected;
                if (h <= opts.dt_min) {
                    traj.settling_time = detect_settling(traj.times, traj.norms, opts.eps_settle);
                    throw IntegrationStalled("integration stalled at t = " + std::to_string(t) +
                                                 " (step at dt_min fails the error test)",
                                             std::move(traj));
                }
                const double f = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
                h = std::max(opts.dt_min, h_step * f);
                continue;
            }

            ++diag.steps_accepted;
            err_acc += metric_norm(m, st.err);
            if (st.saturated) ++diag.saturation_events;
            if (st.phi_capped) ++diag.phi_cap_events;
            const double v_old = v;
            t = hitting ? target : t + h_step;
            y = st.y;
            v = law.lyapunov(y);

            double factor = err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
            if (v < 10.0 * dz) factor = std::min(factor, 1.2);
            double h_next = h_step * factor;
            if (hitting && factor >= 1.0) h_next = std::max(h_next, h);
            h = std::clamp(h_next, opts.dt_min, opts.dt_max);

            if (!latched) {
                if (v > v_old * (1.0 + 1e-9) + 1e-15) ++diag.v_increase_events;
                if (visible(law, v_old) > dz && visible(law, v) <= dz) {
                    latched = true;
                    diag.latch_time = t;
                }
            } else if (v > 2.0 * dz) {
                ++diag.rearm_events;
            }

            if (can_clamp && v > 0.0) {
                const bool entering = visible(law, v) < dz && remaining(v) <= h;
                const bool overshoot = v_old > 0.0 && remaining(v_old) <= h_step;
                if (entering || overshoot) {
                    const Vec yc = law.clamp(y);
                    diag.clamped_norm = std::max(diag.clamped_norm, metric_norm(m, y - yc));
                    y = yc;
                    v = law.lyapunov(y);
                    if (!latched) {
                        latched = true;
                        diag.latch_time = t;
                    }
                    if (!diag.clamp_time) diag.clamp_time = t;
                }
            }
        }
        t = target;
        record(target);
    }

    traj.settling_time = detect_settling(traj.times, traj.norms, opts.eps_settle);
    return traj;
}

Trajectory simulate(const ModalModel& model, const DecompositionResult& dec, const ControllerSpec& spec,
                    const StateVec& y0, const IntegrationOpts& opts) {
    return simulate(model, FeedbackLaw(spec, model, dec), y0, opts);
}

namespace {

std::size_t pre_settling_end(const Trajectory& traj) {
    if (!traj.settling_time) return traj.size();
    std::size_t i = 0;
    while (i < traj.size() && traj.times[i] < *traj.settling_time) ++i;
    return i;
}

void note_violation(CheckReport& rep, double excess, std::size_t i) {
    if (!rep.worst_index || excess > rep.max_violation) {
        rep.max_violation = excess;
        rep.worst_index = i;
    }
}

}  // namespace

CheckReport verify_decay(const Trajectory& traj, double gamma, double mu, double tol) {
    CheckReport rep;
    rep.tolerance = tol;
    if (traj.size() == 0) {
        rep.passes = true;
        return rep;
    }
    const double e0 = std::pow(std::max(traj.lyapunov[0], 0.0), mu);
    const std::size_t end = pre_settling_end(traj);
    for (std::size_t i = 0; i < end; ++i) {
        const double lhs = std::pow(std::max(traj.lyapunov[i], 0.0), mu);
        // V vanishes identically once the envelope reaches zero.
        const double rhs = std::max(e0 - 2.0 * gamma * mu * traj.times[i], 0.0);
        note_violation(rep, lhs - rhs, i);
    }
    rep.passes = !rep.worst_index || rep.max_violation <= tol;
    return rep;
}

CheckReport verify_split(const ModalModel& model, const DecompositionResult& dec, const ControllerSpec& spec,
                         const Trajectory& traj, double tol) {
    CheckReport rep;
    const Mat& m = model.metric();
    const Mat& a = model.generator();
    const Mat ip = dec.complement();
    if (traj.size() == 0) {
        rep.passes = true;
        return rep;
    }
    const double scale = std::max(1.0, traj.norms[0]);
    rep.tolerance = tol * scale;
    const Vec w0 = ip * traj.states[0];

    if (spec.variant != ControlVariant::BilinearGrad) {
        if (!dec.h1_holds) {
            rep.applicable = false;
            rep.detail = "H1 fails: the W-component is not decoupled";
            return rep;
        }
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const Vec pred = expm(traj.times[i] * a) * w0;
            const double e = metric_norm(m, ip * traj.states[i] - pred);
            note_violation(rep, e - rep.tolerance - 10.0 * traj.error_bound[i], i);
        }
        rep.detail = "free evolution of (I-P)y";
        rep.passes = rep.max_violation <= 0.0;
        return rep;
    }

    // y2' = A y2 + g,  g = (I-P) A P y.
    const Mat iap = ip * a * dec.projection;
    std::vector<Vec> g(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) g[i] = iap * traj.states[i];

    auto propagate = [&](std::size_t stride) {
        std::vector<Vec> integral(traj.size());
        integral[0] = Vec::Zero(a.rows());
        double cached_dt = -1.0;
        Mat e1;
        std::size_t prev = 0;
        for (std::size_t i = stride; i < traj.size(); i += stride) {
            const double dt = traj.times[i] - traj.times[prev];
            if (std::abs(dt - cached_dt) > 1e-14 * std::max(1.0, dt)) {
                e1 = expm(dt * a);
                cached_dt = dt;
            }
            integral[i] = e1 * integral[prev] + 0.5 * dt * (e1 * g[prev] + g[i]);
            prev = i;
        }
        return integral;
    };
    const std::vector<Vec> fine = propagate(1);
    const std::vector<Vec> coarse = propagate(2);

    double quad_est = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (i % 2 == 0 && i > 0) quad_est = metric_norm(m, fine[i] - coarse[i]) / 3.0;
        const Vec pred = expm(traj.times[i] * a) * w0 + fine[i];
        const double e = metric_norm(m, ip * traj.states[i] - pred);
        note_violation(rep, e - rep.tolerance - 10.0 * quad_est - 10.0 * traj.error_bound[i], i);
    }
    rep.detail = "variation of constants with trapezoidal forcing";
    rep.passes = rep.max_violation <= 0.0;
    return rep;
}

CheckReport verify_lyapunov_stability(const Trajectory& traj, double omega) {
    CheckReport rep;
    rep.tolerance = 1e-9;
    if (traj.size() == 0) {
        rep.passes = true;
        return rep;
    }
    const double n0 = traj.norms[0];
    const double w = std::max(omega, 0.0);
    const std::size_t end = pre_settling_end(traj);
    for (std::size_t i = 0; i < end; ++i) {
        const double bound = n0 * std::exp(w * traj.times[i] / 2.0) * (1.0 + 1e-9);
        note_violation(rep, traj.norms[i] - bound, i);
    }
    rep.passes = !rep.worst_index || rep.max_violation <= 0.0;
    return rep;
}

}  // namespace finstab
