#include "finstab/controllers.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace finstab {

namespace {

constexpr double kNegativeVTol = 1e-12;

bool is_linear_variant(ControlVariant v) {
    return v == ControlVariant::LinearPhi || v == ControlVariant::RankOne;
}

void require_variant(const ControllerSpec& spec, ControlVariant v) {
    if (spec.variant != v) {
        throw InvalidInput("controller variant is " + to_string(spec.variant) + ", expected " +
                           to_string(v));
    }
}

}  // namespace

std::string to_string(ControlVariant v) {
    switch (v) {
        case ControlVariant::BilinearPhi: return "BilinearPhi";
        case ControlVariant::BilinearGrad: return "BilinearGrad";
        case ControlVariant::LinearPhi: return "LinearPhi";
        case ControlVariant::RankOne: return "RankOne";
        case ControlVariant::ZeroControl: return "ZeroControl";
    }
    return "?";
}

ControlVariant control_variant_from_string(const std::string& s) {
    if (s == "BilinearPhi") return ControlVariant::BilinearPhi;
    if (s == "BilinearGrad") return ControlVariant::BilinearGrad;
    if (s == "LinearPhi") return ControlVariant::LinearPhi;
    if (s == "RankOne") return ControlVariant::RankOne;
    if (s == "ZeroControl") return ControlVariant::ZeroControl;
    throw InvalidInput("unknown controller variant '" + s + "'");
}

void validate(const ControllerSpec& spec, const ModalModel& model) {
    switch (spec.variant) {
        case ControlVariant::BilinearPhi:
        case ControlVariant::LinearPhi:
            if (!(spec.mu > 0.0 && spec.mu < 0.5)) throw InvalidInput("mu must lie in (0, 1/2)");
            break;
        case ControlVariant::BilinearGrad:
        case ControlVariant::RankOne:
            if (!(spec.mu > 0.0 && spec.mu < 1.0)) throw InvalidInput("mu must lie in (0, 1)");
            break;
        case ControlVariant::ZeroControl:
            break;
    }
    if (!(spec.dead_zone > 0.0)) throw InvalidInput("dead_zone must be positive");
    if (!(spec.u_max > 0.0)) throw InvalidInput("u_max must be positive");
    if (is_linear_variant(spec.variant) && !model.input_map()) {
        throw InvalidInput(to_string(spec.variant) + " requires a model with an input_map");
    }
    if ((spec.variant == ControlVariant::BilinearPhi || spec.variant == ControlVariant::BilinearGrad) &&
        !model.control_op()) {
        throw InvalidInput(to_string(spec.variant) + " requires a model with a control_op");
    }
    if (spec.variant == ControlVariant::RankOne) {
        if (!spec.zeta || !spec.varpi) throw InvalidInput("RankOne requires zeta and varpi");
        if (spec.zeta->size() != model.dim()) throw InvalidInput("zeta has wrong dimension");
        if (spec.varpi->size() != model.input_dim()) throw InvalidInput("varpi has wrong dimension");
        if (spec.zeta->norm() == 0.0) throw InvalidInput("RankOne requires a nonzero zeta");
        const double mismatch = (*model.input_map() * *spec.varpi - *spec.zeta).norm();
        if (mismatch >= 1e-9) throw InvalidInput("RankOne requires L varpi = zeta");
    }
}

FeedbackLaw::FeedbackLaw(ControllerSpec spec, const ModalModel& model, const DecompositionResult& dec)
    : spec_(std::move(spec)),
      metric_(model.metric()),
      a_(model.generator()),
      b_(model.effective_control_op()),
      p_(dec.projection) {
    validate(spec_, model);
    if (model.input_map()) {
        l_ = *model.input_map();
        ls_ = model.input_adjoint();
    }
    // Range of B inside W-perp, for clamping onto {V = 0}.
    if (dec.dim_wperp() > 0) {
        const Mat& q = dec.wperp_basis;
        Eigen::SelfAdjointEigenSolver<Mat> es(sym(q.transpose() * metric_ * b_ * q));
        const Vec& ev = es.eigenvalues();
        const double cutoff = kKernelRelTol * std::max(ev.maxCoeff(), 0.0);
        Mat range(model.dim(), 0);
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            if (ev(i) > cutoff && ev(i) > 0.0) {
                range.conservativeResize(Eigen::NoChange, range.cols() + 1);
                range.col(range.cols() - 1) = q * es.eigenvectors().col(i);
            }
        }
        range = metric_orthonormalize(metric_, range);
        visible_proj_ = range * range.transpose() * metric_;
    } else {
        visible_proj_ = Mat::Zero(model.dim(), model.dim());
    }

    switch (spec_.variant) {
        case ControlVariant::RankOne:
            zeta_ = *spec_.zeta;
            varpi_ = *spec_.varpi;
            zeta_sq_ = zeta_.dot(metric_ * zeta_);
            p_zeta_ = p_ * zeta_;
            adj_zeta_ = model.generator_adjoint() * zeta_;
            envelope_rate_ = zeta_sq_;
            break;
        case ControlVariant::ZeroControl:
            envelope_rate_ = 0.0;
            break;
        default:
            envelope_rate_ = dec.gamma.value_or(0.0);
            break;
    }
}

double FeedbackLaw::lyapunov(const StateVec& y) const {
    const Vec py = p_ * y;
    switch (spec_.variant) {
        case ControlVariant::RankOne: {
            const double s = py.dot(metric_ * zeta_);
            return s * s;
        }
        case ControlVariant::LinearPhi:
            return (ls_ * py).squaredNorm();
        default:
            return (b_ * py).dot(metric_ * py);
    }
}

ControlValue FeedbackLaw::evaluate(const StateVec& y, bool latched) const {
    if (y.size() != metric_.rows()) throw InvalidInput("control: state dimension mismatch");
    ControlValue out;
    const Vec py = p_ * y;
    switch (spec_.variant) {
        case ControlVariant::ZeroControl: {
            out.value = Vec::Zero(l_.size() ? l_.cols() : 1);
            out.lyapunov = (b_ * py).dot(metric_ * py);
            out.dead_zone = true;
            return out;
        }
        case ControlVariant::BilinearPhi:
        case ControlVariant::BilinearGrad: {
            const Vec bpy = b_ * py;
            const double v = bpy.dot(metric_ * py);
            if (v < -kNegativeVTol) {
                throw InconsistentOperator("<BPy, Py> < 0: control operator is not positive");
            }
            out.lyapunov = std::max(v, 0.0);
            double u = 0.0;
            if (spec_.variant == ControlVariant::BilinearPhi) {
                if (latched || v <= spec_.dead_zone) {
                    out.dead_zone = true;
                } else {
                    const double phi = evaluate_phi(spec_.phi, py);
                    out.phi_capped = spec_.phi.capped_at(py);
                    u = -(std::pow(v, -spec_.mu) + phi);
                }
            } else {
                const double bnorm2 = bpy.dot(metric_ * bpy);
                if (latched || bnorm2 <= spec_.dead_zone || v <= 0.0) {
                    out.dead_zone = true;
                } else {
                    u = -(std::pow(v, -spec_.mu) + (a_ * py).dot(metric_ * bpy) / bnorm2);
                }
            }
            if (std::abs(u) > spec_.u_max) {
                u = std::copysign(spec_.u_max, u);
                out.saturated = true;
            }
            out.value = Vec::Constant(1, u);
            return out;
        }
        case ControlVariant::LinearPhi: {
            const Vec w = ls_ * py;
            const double w2 = w.squaredNorm();
            out.lyapunov = w2;
            if (latched || w2 <= spec_.dead_zone) {
                out.dead_zone = true;
                out.value = Vec::Zero(w.size());
                return out;
            }
            const double phi = evaluate_phi(spec_.phi, py);
            out.phi_capped = spec_.phi.capped_at(py);
            out.value = -(w / std::pow(w2, spec_.mu) + phi * w);
            break;
        }
        case ControlVariant::RankOne: {
            const double s = py.dot(metric_ * zeta_);
            out.lyapunov = s * s;
            double first = 0.0;
            if (latched || std::abs(s) <= spec_.dead_zone) {
                out.dead_zone = true;
            } else {
                first = -s * std::pow(std::abs(s), -2.0 * spec_.mu);
            }
            const double second = -py.dot(metric_ * adj_zeta_) / zeta_sq_;
            out.value = (first + second) * varpi_;
            break;
        }
    }
    const double mag = out.value.norm();
    if (mag > spec_.u_max) {
        out.value *= spec_.u_max / mag;
        out.saturated = true;
    }
    return out;
}

Vec FeedbackLaw::actuation(const StateVec& y, const ControlValue& c) const {
    if (spec_.variant == ControlVariant::ZeroControl) return Vec::Zero(y.size());
    if (is_linear_variant(spec_.variant)) return l_ * c.value;
    return c.value(0) * (b_ * y);
}

StateVec FeedbackLaw::clamp(const StateVec& y) const {
    if (spec_.variant == ControlVariant::RankOne) {
        const double s = (p_ * y).dot(metric_ * zeta_);
        const double pz2 = p_zeta_.dot(metric_ * p_zeta_);
        if (pz2 <= 0.0) return y;
        return y - (s / pz2) * p_zeta_;
    }
    return y - visible_proj_ * y;
}

double FeedbackLaw::compensation_norm() const {
    if (spec_.variant != ControlVariant::RankOne) return 0.0;
    const Vec pa = p_ * adj_zeta_;
    return std::sqrt(pa.dot(metric_ * pa)) / std::sqrt(zeta_sq_);
}

double control_bilinear_phi(const ControllerSpec& spec, const ModalModel& model,
                            const DecompositionResult& dec, const StateVec& y) {
    require_variant(spec, ControlVariant::BilinearPhi);
    return FeedbackLaw(spec, model, dec).evaluate(y).value(0);
}

double control_bilinear_grad(const ControllerSpec& spec, const ModalModel& model,
                             const DecompositionResult& dec, const StateVec& y) {
    require_variant(spec, ControlVariant::BilinearGrad);
    return FeedbackLaw(spec, model, dec).evaluate(y).value(0);
}

Vec control_linear_phi(const ControllerSpec& spec, const ModalModel& model,
                       const DecompositionResult& dec, const StateVec& y) {
    require_variant(spec, ControlVariant::LinearPhi);
    return FeedbackLaw(spec, model, dec).evaluate(y).value;
}

Vec control_rank_one(const ControllerSpec& spec, const ModalModel& model,
                     const DecompositionResult& dec, const StateVec& y) {
    require_variant(spec, ControlVariant::RankOne);
    return FeedbackLaw(spec, model, dec).evaluate(y).value;
}

SettlingBound settling_bound(const ControllerSpec& spec, const ModalModel& model,
                             const DecompositionResult& dec, const StateVec& y0) {
    validate(spec, model);
    SettlingBound out;
    const Mat& m = model.metric();
    const Vec y01 = dec.projection * y0;
    const Vec y02 = y0 - y01;
    const double y0_norm = std::sqrt(std::max(0.0, y0.dot(m * y0)));
    const bool w_part = std::sqrt(std::max(0.0, y02.dot(m * y02))) > 1e-12 * std::max(1.0, y0_norm);

    if (spec.variant == ControlVariant::ZeroControl) {
        if (y0_norm == 0.0) out.value = 0.0;
        return out;
    }

    const FeedbackLaw law(spec, model, dec);
    out.v0 = law.lyapunov(y0);
    out.gamma = law.envelope_rate();
    const double mu = spec.mu;

    bool needs_delta = w_part;
    if (spec.variant == ControlVariant::BilinearGrad && !dec.h1_holds) needs_delta = true;
    if (needs_delta && !dec.delta) return out;  // Unbounded
    out.delta = needs_delta ? *dec.delta : dec.delta.value_or(0.0);
    if (!needs_delta) out.delta = 0.0;

    if (out.gamma <= 0.0) throw InvalidInput("settling_bound: no certified gamma");
    const double t1 = out.v0 > 0.0 ? std::pow(out.v0, mu) / (2.0 * out.gamma * mu) : 0.0;

    switch (spec.variant) {
        case ControlVariant::BilinearPhi:
        case ControlVariant::LinearPhi:
            out.value = std::max(t1, out.delta);
            break;
        case ControlVariant::BilinearGrad:
            out.value = t1 + out.delta;
            break;
        case ControlVariant::RankOne: {
            out.value = std::max(t1, out.delta);
            const double s0 = std::sqrt(out.v0);
            const double stated = s0 > 0.0 ? std::pow(s0, mu) / (mu * out.gamma) : 0.0;
            out.rank_one_alternative = std::max(stated, out.delta);
            break;
        }
        case ControlVariant::ZeroControl:
            break;
    }
    return out;
}

}  // namespace finstab
