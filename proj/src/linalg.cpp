#include "finstab/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace finstab {

Mat null_space(const Mat& a, double rel_tol) {
    const Eigen::Index n = a.cols();
    if (n == 0) return Mat(0, 0);
    if (a.rows() == 0) return Mat::Identity(n, n);
    // Pad with zero rows so the full V is always n x n.
    Mat padded = a;
    if (a.rows() < n) {
        padded = Mat::Zero(n, n);
        padded.topRows(a.rows()) = a;
    }
    Eigen::JacobiSVD<Mat> svd(padded, Eigen::ComputeFullV);
    const Vec& s = svd.singularValues();
    const double cutoff = rel_tol * (s.size() > 0 ? s(0) : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff && s(i) > 0.0) ++rank;
    }
    return svd.matrixV().rightCols(n - rank);
}

Mat metric_orthonormalize(const Mat& m, const Mat& x, double drop_tol) {
    Mat out(x.rows(), 0);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        Vec v = x.col(j);
        const double original = std::sqrt(std::max(0.0, v.dot(m * v)));
        if (original == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index k = 0; k < out.cols(); ++k) {
                v -= out.col(k).dot(m * v) * out.col(k);
            }
        }
        const double nv = std::sqrt(std::max(0.0, v.dot(m * v)));
        if (nv <= drop_tol * original) continue;
        out.conservativeResize(Eigen::NoChange, out.cols() + 1);
        out.col(out.cols() - 1) = v / nv;
    }
    return out;
}

double subspace_distance(const Mat& m, const Mat& u, const Mat& v) {
    if (u.cols() != v.cols()) return 1.0;
    if (u.cols() == 0) return 0.0;
    const Mat r = Eigen::LLT<Mat>(m).matrixU();
    // Euclidean orthonormal bases of the mapped subspaces.
    const Mat qu = Eigen::HouseholderQR<Mat>(r * u).householderQ() *
                   Mat::Identity(u.rows(), u.cols());
    const Mat qv = Eigen::HouseholderQR<Mat>(r * v).householderQ() *
                   Mat::Identity(v.rows(), v.cols());
    const Mat resid = qv - qu * (qu.transpose() * qv);
    Eigen::JacobiSVD<Mat> svd(resid);
    return std::min(1.0, svd.singularValues()(0));
}

Mat expm(const Mat& a) { return a.exp(); }

Vec random_normal(Rng& rng, Eigen::Index n) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(rng);
    return v;
}

Vec random_unit_in_span(Rng& rng, const Mat& m, const Mat& basis) {
    if (basis.cols() == 0) throw std::invalid_argument("random_unit_in_span: empty basis");
    Vec c = random_normal(rng, basis.cols());
    c /= c.norm();
    Vec v = basis * c;
    return v / std::sqrt(v.dot(m * v));
}

}  // namespace finstab
