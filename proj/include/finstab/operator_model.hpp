// Finite-dimensional truncations of  dy/dt = A y + u B y  (bilinear) and
// dy/dt = A y + L v  (linear) on a state space carrying an explicit metric.

#pragma once

#include "finstab/linalg.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace finstab {

/// Thrown for malformed inputs: dimension mismatches, invalid parameters.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Coefficients of a state in the model basis.
using StateVec = Vec;

/// A truncated operator model. Immutable once built; construct through
/// `ModalModel::bilinear` or `ModalModel::linear`, which enforce the
/// structural invariants (square sizes, symmetric positive-definite metric,
/// exactly one of control operator / input map).
class ModalModel {
public:
    static ModalModel bilinear(Mat metric, Mat generator, Mat control_op,
                               std::vector<std::string> labels = {});
    static ModalModel linear(Mat metric, Mat generator, Mat input_map,
                             std::vector<std::string> labels = {});

    Eigen::Index dim() const { return generator_.rows(); }
    const Mat& metric() const { return metric_; }
    const Mat& generator() const { return generator_; }
    const std::optional<Mat>& control_op() const { return control_op_; }
    const std::optional<Mat>& input_map() const { return input_map_; }
    const std::vector<std::string>& basis_labels() const { return labels_; }

    bool is_bilinear() const { return control_op_.has_value(); }
    /// Number of input channels (1 for bilinear models).
    Eigen::Index input_dim() const { return input_map_ ? input_map_->cols() : 1; }

    /// Metric adjoint of the generator, M^{-1} A^T M.
    Mat generator_adjoint() const;
    /// Metric adjoint of the input map, L^T M (maps states to inputs).
    Mat input_adjoint() const;
    /// The operator the decomposition works with: B, or L L* for linear models.
    Mat effective_control_op() const;

private:
    ModalModel() = default;
    void check_structure() const;

    Mat metric_;
    Mat generator_;
    std::optional<Mat> control_op_;
    std::optional<Mat> input_map_;
    std::vector<std::string> labels_;
};

/// x^T M y.
double inner(const ModalModel& model, const StateVec& x, const StateVec& y);
double norm(const ModalModel& model, const StateVec& x);

/// Smallest w with <Ax, x> <= w <x, x> for all x: the top generalized
/// eigenvalue of (sym(M A), M).
double quasi_contraction_type(const ModalModel& model);
double quasi_contraction_type(const Mat& metric, const Mat& generator);

struct ControlOperatorReport {
    bool applicable = true;
    double self_adjoint_residual = 0.0;
    double min_rayleigh_quotient = 0.0;
    bool passes = false;
};

/// Self-adjointness residual max|<Be_i,e_j> - <e_i,Be_j>| and the minimum
/// Rayleigh quotient of B in the metric. Passes iff residual < 1e-10 and
/// quotient > -1e-10. Not applicable to linear models.
ControlOperatorReport validate_control_operator(const ModalModel& model);

}  // namespace finstab
