#include "finstab/decomposition.hpp"
#include "finstab/frontends.hpp"

#include <doctest.h>

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>

using namespace finstab;

namespace {
constexpr double kPi = std::numbers::pi;

// Rank by plain SVD, unrelated to the library's scaled Krylov stack.
Eigen::Index svd_rank(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    const Vec& s = svd.singularValues();
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 1e-12 * s(0)) ++r;
    return r;
}
}  // namespace

TEST_CASE("heat: W = span(e1)") {
    Mat a = Mat::Zero(3, 3);
    a.diagonal() << -kPi * kPi, -4 * kPi * kPi, -9 * kPi * kPi;
    Mat b = Mat::Identity(3, 3);
    b(0, 0) = 0;
    const ModalModel m = ModalModel::bilinear(Mat::Identity(3, 3), a, b);
    const DecompositionResult dec = unobservable_subspace(m);
    REQUIRE(dec.dim_w() == 1);
    CHECK(dec.dim_wperp() == 2);
    CHECK(std::abs(std::abs(dec.w_basis(0, 0)) - 1.0) < 1e-12);
    CHECK(compute_gamma(m, dec) == doctest::Approx(1.0));
    CHECK_FALSE(compute_delta(m, dec).nilpotent());
}

TEST_CASE("identity control operator: W = {0}") {
    const Mat i3 = Mat::Identity(3, 3);
    const ModalModel m = ModalModel::bilinear(i3, Mat::Random(3, 3), i3);
    const DecompositionResult dec = unobservable_subspace(m);
    CHECK(dec.dim_w() == 0);
    CHECK((dec.projection - i3).norm() < 1e-12);
    REQUIRE(compute_delta(m, dec).nilpotent());
    CHECK(*compute_delta(m, dec).delta == 0.0);
}

TEST_CASE("Jordan block with partial observation is fully observable") {
    Mat a(2, 2);
    a << 0, 1, 0, 0;
    Mat b = Mat::Zero(2, 2);
    b(0, 0) = 1;
    Mat stack(4, 2);
    stack << b, b * a;
    REQUIRE(svd_rank(stack) == 2);
    const DecompositionResult dec = unobservable_subspace(ModalModel::bilinear(Mat::Identity(2, 2), a, b));
    CHECK(dec.dim_w() == 0);
}

TEST_CASE("H1 checks") {
    FrontendSpec fs;
    fs.n_modes = 5;
    const Frontend heat = heat_model(fs);
    CHECK(check_h1(heat.model, unobservable_subspace(heat.model)).holds);
    fs.kind = FrontendKind::Wave1D;
    fs.q = 2;
    const Frontend wave = wave_model(fs);
    CHECK(check_h1(wave.model, unobservable_subspace(wave.model)).holds);

    // A = [[0,1],[0,0]] with W-perp = span(e1): A e1 = 0, so W-perp is invariant.
    Mat a(2, 2);
    a << 0, 1, 0, 0;
    Mat b = Mat::Zero(2, 2);
    b(0, 0) = 1;
    const ModalModel m = ModalModel::bilinear(Mat::Identity(2, 2), a, b);
    const DecompositionResult dec = decomposition_from_coordinates(m, {true, false});
    const H1Report h1 = check_h1(m, dec);
    CHECK(h1.holds);
    CHECK(h1.residual == 0.0);
}

TEST_CASE("gamma examples") {
    Mat b = Mat::Zero(2, 2);
    b.diagonal() << 2, 3;
    const ModalModel m = ModalModel::bilinear(Mat::Identity(2, 2), Mat::Zero(2, 2), b);
    const double gamma = compute_gamma(m, unobservable_subspace(m));
    // Oracle: grid minimum of |Bx|^2 / <Bx,x> over the unit circle.
    double best = 1e300;
    for (int k = 0; k < 200000; ++k) {
        const double th = 2 * kPi * k / 200000.0;
        const double c = std::cos(th), s = std::sin(th);
        best = std::min(best, (4 * c * c + 9 * s * s) / (2 * c * c + 3 * s * s));
    }
    CHECK(gamma == doctest::Approx(best).epsilon(1e-8));

    // Metric-orthogonal projection: gamma = 1.
    Mat g = Mat::Random(4, 2);
    const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
    const Mat proj = q.leftCols(2) * q.leftCols(2).transpose();
    const ModalModel pm = ModalModel::bilinear(Mat::Identity(4, 4), Mat::Zero(4, 4), proj);
    CHECK(compute_gamma(pm, unobservable_subspace(pm)) == doctest::Approx(1.0));
}

TEST_CASE("H2 for the heat model with phi = 0") {
    FrontendSpec fs;
    fs.n_modes = 6;
    const Frontend heat = heat_model(fs);
    Rng rng(3);
    const H2Report r = check_h2(heat.model, heat.decomposition(), PhiSpec::zero(), 500, rng);
    CHECK(r.holds);
}

TEST_CASE("property: SVD kernel matches brute-force sampling of B e^{tA} x") {
    Rng rng(99);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 15; ++trial) {
        const int n = 2 + trial % 5;
        const int dw = trial % n;
        Mat g(n, n);
        for (int i = 0; i < n * n; ++i) g.data()[i] = nd(rng);
        const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
        Mat blk(n, n);
        for (int i = 0; i < n * n; ++i) blk.data()[i] = nd(rng) / n;
        blk.bottomLeftCorner(n - dw, dw).setZero();
        Mat bd = Mat::Zero(n, n);
        for (int i = dw; i < n; ++i) bd(i, i) = 0.5 + (i - dw);
        const Mat a = q * blk * q.transpose();
        Mat b = q * bd * q.transpose();
        b = 0.5 * (b + b.transpose());
        const ModalModel m = ModalModel::bilinear(Mat::Identity(n, n), a, b);
        const DecompositionResult dec = unobservable_subspace(m);

        // Brute force: directions x with |B e^{tA} x| tiny for every sampled t.
        Mat stacked(41 * n, n);
        for (int k = 0; k <= 40; ++k) stacked.middleRows(k * n, n) = b * expm(a * (5.0 * k / 40));
        Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
        const Vec s = svd.singularValues();
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) > 1e-9 * s(0)) ++rank;
        const Mat oracle = svd.matrixV().rightCols(n - rank);
        REQUIRE(oracle.cols() == dec.dim_w());
        if (dec.dim_w() > 0) {
            const Mat diff = dec.w_basis * dec.w_basis.transpose() - oracle * oracle.transpose();
            CHECK(Eigen::JacobiSVD<Mat>(diff).singularValues()(0) < 1e-8);
        }
        // Sampled x: both sides agree on which states are invisible.
        for (int k = 0; k < 20; ++k) {
            const Vec x = dec.w_basis * random_normal(rng, dec.dim_w());
            for (int t = 0; t <= 10; ++t) CHECK((b * expm(a * (0.5 * t)) * x).norm() < 1e-8 * (1 + x.norm()));
        }
    }
}

TEST_CASE("property: P commutes with B, and with A when H1 holds") {
    for (int n : {3, 6}) {
        for (auto kind : {FrontendKind::Heat1D, FrontendKind::Wave1D}) {
            FrontendSpec fs;
            fs.kind = kind;
            fs.n_modes = n;
            fs.q = 2;
            const Frontend fe = build_frontend(fs);
            const DecompositionResult dec = unobservable_subspace(fe.model);
            const Mat& p = dec.projection;
            const Mat& b = *fe.model.control_op();
            const Mat& a = fe.model.generator();
            CHECK((p * b - b * p).norm() < 1e-9);
            REQUIRE(check_h1(fe.model, dec).holds);
            CHECK((p * a - a * p).norm() < 1e-9 * a.norm());
        }
    }
}

TEST_CASE("property: gamma two-sided certificate") {
    Rng rng(5);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 4;
        Mat g(n, n);
        for (int i = 0; i < n * n; ++i) g.data()[i] = nd(rng);
        Mat b = g * g.transpose();
        b = 0.5 * (b + b.transpose());
        const ModalModel m = ModalModel::bilinear(Mat::Identity(n, n), Mat::Zero(n, n), b);
        const DecompositionResult dec = unobservable_subspace(m);
        const double gamma = compute_gamma(m, dec);
        bool attained = false;
        for (int s = 0; s < 1000; ++s) {
            const Vec x = dec.projection * random_normal(rng, n);
            const Vec bx = b * x;
            CHECK(gamma * bx.dot(x) <= bx.squaredNorm() * (1 + 1e-10));
            attained = attained || bx.squaredNorm() <= gamma * (1 + 1e-6) * bx.dot(x);
        }
        // The minimising direction is the bottom eigenvector; add it as a sample.
        Eigen::SelfAdjointEigenSolver<Mat> es(b);
        const Vec e = es.eigenvectors().col(0);
        attained = attained || (b * e).squaredNorm() <= gamma * (1 + 1e-6) * (b * e).dot(e);
        CHECK(attained);
    }
}
