#include "finstab/decomposition.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace finstab {

namespace {

double spectral_norm(const Mat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
}

// Restriction of a metric-self-adjoint operator to span(q), q metric-orthonormal.
Mat restrict_to(const Mat& m, const Mat& op, const Mat& q) {
    return sym(q.transpose() * m * op * q);
}

DecompositionResult assemble(const ModalModel& model, const Mat& w_basis) {
    const Mat& m = model.metric();
    const Eigen::Index n = model.dim();
    DecompositionResult dec;
    dec.w_basis = w_basis;
    // W-perp = ker(W^T M).
    const Mat comp = w_basis.cols() == 0 ? Mat::Identity(n, n)
                                         : null_space(w_basis.transpose() * m, kKernelRelTol);
    dec.wperp_basis = metric_orthonormalize(m, comp);
    if (dec.dim_w() + dec.dim_wperp() != n) {
        throw std::runtime_error("decomposition: dim W + dim W-perp != n");
    }
    dec.projection = dec.wperp_basis * dec.wperp_basis.transpose() * m;
    return dec;
}

}  // namespace

DecompositionResult unobservable_subspace(const ModalModel& model) {
    const Eigen::Index n = model.dim();
    Mat b = model.effective_control_op();
    Mat a = model.generator();
    const double nb = spectral_norm(b);
    const double na = spectral_norm(a);
    if (nb == 0.0) return assemble(model, Mat::Identity(n, n));
    b /= nb;
    if (na > 0.0) a /= na;

    Mat stacked(n * n, n);
    Mat block = b;
    for (Eigen::Index k = 0; k < n; ++k) {
        stacked.middleRows(k * n, n) = block;
        block = block * a;
    }
    const Mat kernel = null_space(stacked, kKernelRelTol);
    return assemble(model, metric_orthonormalize(model.metric(), kernel));
}

DecompositionResult decomposition_from_w(const ModalModel& model, const Mat& w_span) {
    if (w_span.rows() != model.dim()) throw InvalidInput("W basis has wrong row count");
    return assemble(model, metric_orthonormalize(model.metric(), w_span));
}

DecompositionResult decomposition_from_coordinates(const ModalModel& model,
                                                   const std::vector<bool>& wperp_mask) {
    const Mat& m = model.metric();
    const Eigen::Index n = model.dim();
    if (static_cast<Eigen::Index>(wperp_mask.size()) != n) throw InvalidInput("mask has wrong length");
    if (!(m - Mat(m.diagonal().asDiagonal())).isZero(0.0)) {
        throw InvalidInput("coordinate decomposition needs a diagonal metric");
    }
    const auto n_perp = static_cast<Eigen::Index>(std::count(wperp_mask.begin(), wperp_mask.end(), true));
    DecompositionResult dec;
    dec.w_basis = Mat::Zero(n, n - n_perp);
    dec.wperp_basis = Mat::Zero(n, n_perp);
    dec.projection = Mat::Zero(n, n);
    Eigen::Index iw = 0, ip = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = 1.0 / std::sqrt(m(i, i));
        if (wperp_mask[static_cast<std::size_t>(i)]) {
            dec.wperp_basis(i, ip++) = s;
            dec.projection(i, i) = 1.0;
        } else {
            dec.w_basis(i, iw++) = s;
        }
    }
    return dec;
}

H1Report check_h1(const ModalModel& model, const DecompositionResult& dec) {
    const Mat& a = model.generator();
    const Mat& m = model.metric();
    H1Report rep;
    const Mat ip = dec.complement();
    for (Eigen::Index j = 0; j < dec.dim_wperp(); ++j) {
        const Vec av = a * dec.wperp_basis.col(j);
        const Vec leak = ip * av;
        const double r = std::sqrt(std::max(0.0, leak.dot(m * leak))) /
                         std::max(1.0, std::sqrt(std::max(0.0, av.dot(m * av))));
        rep.residual = std::max(rep.residual, r);
    }
    rep.holds = rep.residual < 1e-9;
    const Mat ma = m * a;
    const double scale = std::max(1.0, ma.cwiseAbs().maxCoeff());
    rep.generator_self_adjoint = (ma - ma.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
    rep.generator_skew_adjoint = (ma + ma.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
    return rep;
}

double compute_gamma(const ModalModel& model, const DecompositionResult& dec) {
    if (dec.dim_wperp() == 0) return 1.0;
    const Mat b = model.effective_control_op();
    const Mat bw = restrict_to(model.metric(), b, dec.wperp_basis);
    Eigen::SelfAdjointEigenSolver<Mat> es(bw, Eigen::EigenvaluesOnly);
    const Vec& ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    if (ev.minCoeff() < -1e-10 * std::max(1.0, std::abs(top))) {
        throw InvalidInput("compute_gamma: B is not positive semidefinite on W-perp");
    }
    const double cutoff = kKernelRelTol * std::max(top, 0.0);
    double gamma = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > cutoff && ev(i) > 0.0) {
            gamma = ev(i);
            break;
        }
    }
    if (gamma <= 0.0) throw InvalidInput("compute_gamma: B vanishes on a nontrivial W-perp");
    return gamma;
}

DeltaResult compute_delta(const ModalModel& /*model*/, const DecompositionResult& dec,
                          std::optional<double> analytic_delta) {
    if (analytic_delta && *analytic_delta < 0.0) {
        throw InvalidInput("compute_delta: analytic delta must be nonnegative");
    }
    if (dec.dim_w() == 0) return {0.0};
    if (analytic_delta) return {*analytic_delta};
    return {};
}

H2Report check_h2(const ModalModel& model, const DecompositionResult& dec, const PhiSpec& phi,
                  Eigen::Index samples, Rng& rng) {
    if (samples <= 0) throw InvalidInput("check_h2: samples must be positive");
    H2Report rep;
    rep.samples = samples;
    if (dec.dim_wperp() == 0) {
        rep.holds = true;
        return rep;
    }
    const Mat& m = model.metric();
    const Mat& a = model.generator();
    const Mat b = model.effective_control_op();

    rep.min_margin = std::numeric_limits<double>::infinity();
    Vec prev_y, prev_img;
    for (Eigen::Index s = 0; s < samples; ++s) {
        const Vec y = random_unit_in_span(rng, m, dec.wperp_basis);
        const Vec by = b * y;
        const double phi_y = evaluate_phi(phi, y);
        const double margin = phi_y * by.dot(m * by) - (a * y).dot(m * by);
        rep.min_margin = std::min(rep.min_margin, margin);
        const Vec img = phi_y * by;
        if (s > 0) {
            const Vec dy = y - prev_y;
            const Vec di = img - prev_img;
            const double den = std::sqrt(dy.dot(m * dy));
            if (den > 1e-14) {
                rep.lipschitz_estimate = std::max(rep.lipschitz_estimate, std::sqrt(di.dot(m * di)) / den);
            }
        }
        prev_y = y;
        prev_img = img;
    }
    rep.holds = rep.min_margin >= -1e-9;

    if (phi.kind != PhiKind::WaveK) {
        const double k = evaluate_phi(phi, Vec::Zero(model.dim()));
        const Mat q = dec.wperp_basis;
        const Mat form = q.transpose() * (k * b.transpose() * m * b - sym(a.transpose() * m * b)) * q;
        Eigen::SelfAdjointEigenSolver<Mat> es(sym(form), Eigen::EigenvaluesOnly);
        rep.exact_min_margin = es.eigenvalues().minCoeff();
        rep.holds = rep.holds && *rep.exact_min_margin >= -1e-9;
    }
    return rep;
}

void certify(const ModalModel& model, DecompositionResult& dec, std::optional<double> analytic_delta) {
    const H1Report h1 = check_h1(model, dec);
    dec.h1_holds = h1.holds;
    dec.h1_residual = h1.residual;
    try {
        dec.gamma = compute_gamma(model, dec);
        dec.h3_holds = true;
    } catch (const InvalidInput&) {
        dec.gamma.reset();
        dec.h3_holds = false;
    }
    const DeltaResult d = compute_delta(model, dec, analytic_delta);
    dec.delta = d.delta;
    dec.h4_holds = d.nilpotent();
}

}  // namespace finstab
