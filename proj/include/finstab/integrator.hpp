// Closed-loop simulation with an embedded Runge-Kutta pair, settling
// detection, and trajectory-level checks of the decay envelope, the
// W / W-perp splitting and the pre-settling norm bound.

#pragma once

#include "finstab/controllers.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace finstab {

struct IntegrationOpts {
    double t_max = 1.0;
    double rtol = 1e-10;
    double atol = 1e-13;
    double dt_init = 1e-4;
    double dt_min = 1e-14;
    double dt_max = 1e-2;
    double eps_settle = 1e-8;
    double sample_dt = 0.0;  // 0 means t_max / 2000

    double effective_sample_dt() const { return sample_dt > 0.0 ? sample_dt : t_max / 2000.0; }
    /// Throws InvalidInput unless 0 < dt_min <= dt_init <= dt_max and all
    /// tolerances are positive.
    void validate() const;
};

struct Diagnostics {
    long steps_accepted = 0;
    long steps_rejected = 0;
    long saturation_events = 0;   // accepted steps whose control hit u_max
    long phi_cap_events = 0;      // accepted steps where WaveK hit its cap
    long v_increase_events = 0;   // accepted steps with V growing (before latching)
    long rearm_events = 0;        // accepted steps with V > 2 dead_zone after latching
    std::optional<double> latch_time;
    std::optional<double> clamp_time;
    double clamped_norm = 0.0;    // size of the removed component
};

struct Trajectory {
    std::vector<double> times;
    std::vector<StateVec> states;
    std::vector<Vec> controls;
    std::vector<double> lyapunov;
    std::vector<double> norms;         // metric norm of each state
    std::vector<double> error_bound;   // accumulated local error estimates
    std::optional<double> settling_time;
    Diagnostics diagnostics;

    std::size_t size() const { return times.size(); }
};

class IntegrationStalled : public std::runtime_error {
public:
    IntegrationStalled(const std::string& what, Trajectory partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const Trajectory& partial() const { return partial_; }

private:
    Trajectory partial_;
};

/// A y + u(y) B y  (bilinear)  or  A y + L v(y)  (linear).
Vec closed_loop_field(const ModalModel& model, const FeedbackLaw& law, const StateVec& y,
                      bool latched = false);
Vec closed_loop_field(const ModalModel& model, const DecompositionResult& dec,
                      const ControllerSpec& spec, const StateVec& y);

/// Dormand-Prince 5(4) with the control evaluated at every stage. Steps are
/// truncated to land on the sample grid. Once the law's dead zone is entered
/// the singular term is latched off; the state is clamped onto {V = 0} when
/// the decay envelope certifies extinction within the step (see README).
Trajectory simulate(const ModalModel& model, const FeedbackLaw& law, const StateVec& y0,
                    const IntegrationOpts& opts);
Trajectory simulate(const ModalModel& model, const DecompositionResult& dec,
                    const ControllerSpec& spec, const StateVec& y0, const IntegrationOpts& opts);

/// First sample time after which every sample has norm <= eps.
std::optional<double> detect_settling(const std::vector<double>& times,
                                      const std::vector<double>& norms, double eps);

struct CheckReport {
    bool applicable = true;
    bool passes = false;
    double max_violation = 0.0;  // largest (lhs - rhs), <= 0 when passing
    std::optional<std::size_t> worst_index;
    double tolerance = 0.0;
    std::string detail;
};

/// V(t)^mu <= V(0)^mu - 2 gamma mu t + tol at every sample before settling.
CheckReport verify_decay(const Trajectory& traj, double gamma, double mu, double tol);

/// W-component identity. ZeroControl and the phi-type / rank-one laws: the
/// W-part evolves freely, |(I-P)y(t) - e^{tA}(I-P)y0| <= tol (requires H1).
/// Gradient law: variation of constants with the forcing (I-P)A Py
/// integrated by the trapezoidal rule; the tolerance adds a Richardson
/// estimate of the quadrature error.
CheckReport verify_split(const ModalModel& model, const DecompositionResult& dec,
                         const ControllerSpec& spec, const Trajectory& traj, double tol = 1e-8);

/// |y(t)| <= |y0| exp(max(omega, 0) t / 2) (1 + 1e-9) at every sample before settling.
CheckReport verify_lyapunov_stability(const Trajectory& traj, double omega);

}  // namespace finstab
