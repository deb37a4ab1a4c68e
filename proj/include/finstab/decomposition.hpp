// Unobservable-subspace decomposition H = W (+) W-perp of a modal model and the
// numerical certificates for the four standing hypotheses:
//
//   H1  W-perp is invariant under the flow of A;
//   H2  <Ay, By> <= phi(y) |By|^2 on W-perp;
//   H3  gamma <Bx, x> <= |Bx|^2 on W-perp;
//   H4  the flow restricted to W is nilpotent (vanishes after delta).

#pragma once

#include "finstab/operator_model.hpp"
#include "finstab/phi.hpp"

#include <optional>
#include <string>
#include <vector>

namespace finstab {

struct DecompositionResult {
    Mat w_basis;      // n x dim W, metric-orthonormal columns
    Mat wperp_basis;  // n x dim W-perp, metric-orthonormal columns
    Mat projection;   // P: metric-orthogonal projector onto W-perp

    std::optional<double> gamma;
    std::optional<double> delta;
    bool h1_holds = false;
    bool h3_holds = false;
    bool h4_holds = false;
    double h1_residual = 0.0;

    Eigen::Index dim_w() const { return w_basis.cols(); }
    Eigen::Index dim_wperp() const { return wperp_basis.cols(); }
    Mat complement() const { return Mat::Identity(projection.rows(), projection.cols()) - projection; }
};

/// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kKernelRelTol = 1e-10;

/// W = ker [B; BA; ...; BA^{n-1}] via SVD. A and B are normalised to unit
/// spectral norm first; this leaves the kernel unchanged and keeps the high
/// powers of stiff generators representable. Linear models use B = L L*.
DecompositionResult unobservable_subspace(const ModalModel& model);

/// Builds bases and P from a known spanning set of W (e.g. an analytic
/// description supplied by a PDE front-end).
DecompositionResult decomposition_from_w(const ModalModel& model, const Mat& w_span);

/// Exact decomposition when W and W-perp are spanned by coordinate axes and
/// the metric is diagonal: P = diag(wperp_mask) with entries exactly 0 or 1.
/// Throws InvalidInput for a non-diagonal metric.
DecompositionResult decomposition_from_coordinates(const ModalModel& model,
                                                   const std::vector<bool>& wperp_mask);

struct H1Report {
    double residual = 0.0;  // max_v |(I-P)Av| / max(1, |Av|) over W-perp basis
    bool holds = false;
    bool generator_self_adjoint = false;
    bool generator_skew_adjoint = false;
};
H1Report check_h1(const ModalModel& model, const DecompositionResult& dec);

/// Largest gamma with gamma <Bx,x> <= |Bx|^2 on W-perp: the smallest strictly
/// positive eigenvalue of B restricted to W-perp (1 if W-perp = {0}).
/// Throws InvalidInput if B is not positive semidefinite there.
double compute_gamma(const ModalModel& model, const DecompositionResult& dec);

struct DeltaResult {
    std::optional<double> delta;  // empty means NotNilpotent
    bool nilpotent() const { return delta.has_value(); }
};

/// delta = 0 for W = {0}. A matrix flow restricted to a nontrivial invariant
/// subspace is injective, so without an analytic value from a front-end with a
/// genuinely nilpotent semigroup the result is NotNilpotent.
DeltaResult compute_delta(const ModalModel& model, const DecompositionResult& dec,
                          std::optional<double> analytic_delta = std::nullopt);

struct H2Report {
    double min_margin = 0.0;        // over samples of phi|By|^2 - <Ay,By>
    double lipschitz_estimate = 0.0;
    std::optional<double> exact_min_margin;  // for constant phi
    Eigen::Index samples = 0;
    bool holds = false;
};

/// Monte-Carlo certificate of H2 on metric-unit vectors of W-perp; holds iff
/// the min margin is >= -1e-9 (and the exact quadratic-form minimum too, when
/// phi is constant).
H2Report check_h2(const ModalModel& model, const DecompositionResult& dec, const PhiSpec& phi,
                  Eigen::Index samples, Rng& rng);

/// Fills gamma/delta/h1/h3/h4 in place.
void certify(const ModalModel& model, DecompositionResult& dec,
             std::optional<double> analytic_delta = std::nullopt);

}  // namespace finstab
