#include "finstab/operator_model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace finstab {

namespace {

constexpr double kSymmetryTol = 1e-12;

void require_square(const Mat& m, Eigen::Index n, const char* what) {
    if (m.rows() != n || m.cols() != n) {
        throw InvalidInput(std::string(what) + " must be " + std::to_string(n) + "x" +
                           std::to_string(n));
    }
}

std::vector<std::string> default_labels(Eigen::Index n) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out.push_back("x" + std::to_string(i + 1));
    return out;
}

}  // namespace

ModalModel ModalModel::bilinear(Mat metric, Mat generator, Mat control_op,
                                std::vector<std::string> labels) {
    ModalModel m;
    m.metric_ = std::move(metric);
    m.generator_ = std::move(generator);
    m.control_op_ = std::move(control_op);
    m.labels_ = labels.empty() ? default_labels(m.generator_.rows()) : std::move(labels);
    m.check_structure();
    return m;
}

ModalModel ModalModel::linear(Mat metric, Mat generator, Mat input_map,
                              std::vector<std::string> labels) {
    ModalModel m;
    m.metric_ = std::move(metric);
    m.generator_ = std::move(generator);
    m.input_map_ = std::move(input_map);
    m.labels_ = labels.empty() ? default_labels(m.generator_.rows()) : std::move(labels);
    m.check_structure();
    return m;
}

void ModalModel::check_structure() const {
    const Eigen::Index n = generator_.rows();
    if (n <= 0) throw InvalidInput("model dimension must be positive");
    require_square(generator_, n, "generator");
    require_square(metric_, n, "metric");
    if (control_op_.has_value() == input_map_.has_value()) {
        throw InvalidInput("exactly one of control_op / input_map must be present");
    }
    if (control_op_) require_square(*control_op_, n, "control_op");
    if (input_map_) {
        if (input_map_->rows() != n || input_map_->cols() < 1) {
            throw InvalidInput("input_map must be " + std::to_string(n) + "xm with m >= 1");
        }
    }
    if (static_cast<Eigen::Index>(labels_.size()) != n) {
        throw InvalidInput("basis_labels must have one entry per mode");
    }
    if ((metric_ - metric_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
        throw InvalidInput("metric is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(metric_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
        throw InvalidInput("metric is not positive definite");
    }
    if (!generator_.allFinite() || !metric_.allFinite()) {
        throw InvalidInput("model contains non-finite entries");
    }
}

Mat ModalModel::generator_adjoint() const {
    return metric_.llt().solve(generator_.transpose() * metric_);
}

Mat ModalModel::input_adjoint() const {
    if (!input_map_) throw InvalidInput("model has no input_map");
    return input_map_->transpose() * metric_;
}

Mat ModalModel::effective_control_op() const {
    if (control_op_) return *control_op_;
    return *input_map_ * input_adjoint();
}

double inner(const ModalModel& model, const StateVec& x, const StateVec& y) {
    if (x.size() != model.dim() || y.size() != model.dim()) {
        throw InvalidInput("inner: state dimension does not match model");
    }
    return x.dot(model.metric() * y);
}

double norm(const ModalModel& model, const StateVec& x) {
    return std::sqrt(std::max(0.0, inner(model, x, x)));
}

double quasi_contraction_type(const Mat& metric, const Mat& generator) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(sym(metric * generator), metric,
                                                      Eigen::EigenvaluesOnly);
    return ges.eigenvalues().maxCoeff();
}

double quasi_contraction_type(const ModalModel& model) {
    return quasi_contraction_type(model.metric(), model.generator());
}

ControlOperatorReport validate_control_operator(const ModalModel& model) {
    ControlOperatorReport rep;
    if (!model.control_op()) {
        rep.applicable = false;
        return rep;
    }
    const Mat& m = model.metric();
    const Mat& b = *model.control_op();
    // <Be_i, e_j> - <e_i, Be_j> = (B^T M - M B)_{ij}
    rep.self_adjoint_residual = (b.transpose() * m - m * b).cwiseAbs().maxCoeff();
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(sym(m * b), m, Eigen::EigenvaluesOnly);
    rep.min_rayleigh_quotient = ges.eigenvalues().minCoeff();
    rep.passes = rep.self_adjoint_residual < 1e-10 && rep.min_rayleigh_quotient > -1e-10;
    return rep;
}

}  // namespace finstab
