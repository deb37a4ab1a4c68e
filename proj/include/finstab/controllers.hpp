// Finite-time feedback laws and their settling-time bounds.
//
// Every law acts on the W-perp component Py only. The exact indicator of the
// set {BPy != 0} is replaced by a dead zone: below `dead_zone` (on V, |L*Py|^2
// or |<Py, zeta>| depending on the law) the singular term is switched off.

#pragma once

#include "finstab/decomposition.hpp"

#include <optional>
#include <string>

namespace finstab {

enum class ControlVariant {
    BilinearPhi,   // u = -(<BPy,Py>^{-mu} + phi(Py))
    BilinearGrad,  // u = -(<BPy,Py>^{-mu} + <APy,BPy>/|BPy|^2)
    LinearPhi,     // v = -(w/|w|^{2mu} + phi(Py) w),  w = L*Py
    RankOne,       // v = -(s|s|^{-2mu} + <Py,A*zeta>/|zeta|^2) varpi,  s = <Py,zeta>
    ZeroControl,
};

std::string to_string(ControlVariant v);
ControlVariant control_variant_from_string(const std::string& s);

struct ControllerSpec {
    ControlVariant variant = ControlVariant::BilinearPhi;
    double mu = 0.25;
    PhiSpec phi;
    double dead_zone = 1e-12;
    double u_max = 1e6;
    std::optional<Vec> zeta;
    std::optional<Vec> varpi;
};

/// Thrown when B fails to be positive along the trajectory (V < -1e-12).
class InconsistentOperator : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Checks mu ranges, dead zone, model kind and the rank-one data (zeta != 0,
/// |L varpi - zeta| < 1e-9). Throws InvalidInput.
void validate(const ControllerSpec& spec, const ModalModel& model);

struct ControlValue {
    Vec value;                // size 1 for bilinear laws, m for linear laws
    double lyapunov = 0.0;    // V(y) for the law
    bool dead_zone = false;   // singular term switched off
    bool saturated = false;   // |u| hit u_max
    bool phi_capped = false;  // WaveK hit its cap
};

/// A feedback law bound to a model and its decomposition. Operator products
/// that do not depend on the state are formed once here.
class FeedbackLaw {
public:
    FeedbackLaw(ControllerSpec spec, const ModalModel& model, const DecompositionResult& dec);

    const ControllerSpec& spec() const { return spec_; }

    /// Control at state y. With `latched` the singular term is held off
    /// (the rank-one compensation term stays active).
    ControlValue evaluate(const StateVec& y, bool latched = false) const;

    /// Control contribution to dy/dt: u B y or L v.
    Vec actuation(const StateVec& y, const ControlValue& c) const;

    /// Lyapunov function of the law (without evaluating the control).
    double lyapunov(const StateVec& y) const;

    /// Decay rate in  (1/2) dV/dt <= -rate * V^{1-mu}: gamma for the
    /// B-based laws, |zeta|^2 for the rank-one law, 0 for ZeroControl.
    double envelope_rate() const { return envelope_rate_; }

    /// Removes the part of Py the law can see (the range of B on W-perp, or the
    /// zeta direction), i.e. snaps the state onto {V = 0}.
    StateVec clamp(const StateVec& y) const;

    /// Norm of the bounded perturbation N y = <y, PA*zeta> zeta / |zeta|^2 of
    /// the rank-one law (0 for the other laws).
    double compensation_norm() const;

private:
    double visible_quantity(const StateVec& py, double v) const;

    ControllerSpec spec_;
    Mat metric_;
    Mat a_;
    Mat b_;   // B, or L L* for linear models
    Mat l_;   // input map (linear models)
    Mat ls_;  // L* = L^T M
    Mat p_;
    Mat visible_proj_;  // projector onto range(B) within W-perp
    Vec zeta_, varpi_, p_zeta_, adj_zeta_;
    double zeta_sq_ = 1.0;
    double envelope_rate_ = 0.0;
};

// Single-law entry points (validate the variant, then evaluate).
double control_bilinear_phi(const ControllerSpec& spec, const ModalModel& model,
                            const DecompositionResult& dec, const StateVec& y);
double control_bilinear_grad(const ControllerSpec& spec, const ModalModel& model,
                             const DecompositionResult& dec, const StateVec& y);
Vec control_linear_phi(const ControllerSpec& spec, const ModalModel& model,
                       const DecompositionResult& dec, const StateVec& y);
Vec control_rank_one(const ControllerSpec& spec, const ModalModel& model,
                     const DecompositionResult& dec, const StateVec& y);

struct SettlingBound {
    std::optional<double> value;  // empty: Unbounded
    double v0 = 0.0;              // Lyapunov value at P y0
    double gamma = 0.0;           // rate used
    double delta = 0.0;           // nilpotency horizon used
    /// Rank-one law only: the estimate |<y01,zeta>|^mu / (mu |zeta|^2) (maxed
    /// with delta), reported next to the value used.
    std::optional<double> rank_one_alternative;
    bool bounded() const { return value.has_value(); }
};

SettlingBound settling_bound(const ControllerSpec& spec, const ModalModel& model,
                             const DecompositionResult& dec, const StateVec& y0);

}  // namespace finstab
