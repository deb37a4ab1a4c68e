#include "finstab/frontends.hpp"
#include "finstab/operator_model.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace finstab;

namespace {
constexpr double kPi = std::numbers::pi;

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}
}  // namespace

TEST_CASE("inner product examples") {
    const Mat i2 = Mat::Identity(2, 2);
    const ModalModel id = ModalModel::bilinear(i2, Mat::Zero(2, 2), i2);
    CHECK(inner(id, v2(1, 0), v2(0, 1)) == 0.0);
    CHECK(inner(id, v2(3, 4), v2(3, 4)) == 25.0);
    Mat m = Mat::Zero(2, 2);
    m.diagonal() << 2, 3;
    const ModalModel w = ModalModel::bilinear(m, Mat::Zero(2, 2), i2);
    CHECK(inner(w, v2(1, 1), v2(1, 1)) == doctest::Approx(2.0 + 3.0));
    CHECK_THROWS_AS(inner(w, v2(1, 1), Vec::Ones(3)), InvalidInput);
}

TEST_CASE("model structure is enforced") {
    const Mat i2 = Mat::Identity(2, 2);
    Mat bad_metric = i2;
    bad_metric(0, 1) = 0.5;
    CHECK_THROWS_AS(ModalModel::bilinear(bad_metric, i2, i2), InvalidInput);
    CHECK_THROWS_AS(ModalModel::bilinear(-i2, i2, i2), InvalidInput);
    CHECK_THROWS_AS(ModalModel::bilinear(i2, Mat::Identity(3, 3), i2), InvalidInput);
    CHECK_THROWS_AS(ModalModel::linear(i2, i2, Mat::Ones(3, 1)), InvalidInput);
}

TEST_CASE("quasi-contraction type") {
    const Mat i2 = Mat::Identity(2, 2);
    Mat heat = Mat::Zero(2, 2);
    heat.diagonal() << -kPi * kPi, -4 * kPi * kPi;
    CHECK(quasi_contraction_type(i2, heat) == doctest::Approx(-9.8696044).epsilon(1e-8));
    Mat skew(2, 2);
    skew << 0, 1, -1, 0;
    CHECK(std::abs(quasi_contraction_type(i2, skew)) < 1e-14);
    Mat s(2, 2);
    s << 1, 0, 0, -1;
    CHECK(quasi_contraction_type(i2, s) == doctest::Approx(1.0));
}

TEST_CASE("control operator validation") {
    const Mat i2 = Mat::Identity(2, 2);
    auto r = validate_control_operator(ModalModel::bilinear(i2, Mat::Zero(2, 2), i2));
    CHECK(r.passes);
    CHECK(r.self_adjoint_residual == 0.0);
    CHECK(r.min_rayleigh_quotient == doctest::Approx(1.0));

    Mat proj = i2;
    proj(0, 0) = 0.0;
    r = validate_control_operator(ModalModel::bilinear(i2, Mat::Zero(2, 2), proj));
    CHECK(r.passes);
    CHECK(std::abs(r.min_rayleigh_quotient) < 1e-14);

    Mat nilp(2, 2);
    nilp << 0, 1, 0, 0;
    r = validate_control_operator(ModalModel::bilinear(i2, Mat::Zero(2, 2), nilp));
    CHECK_FALSE(r.passes);
    CHECK(r.self_adjoint_residual == doctest::Approx(1.0));
}

TEST_CASE("property: metric inner product is positive definite") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const Mat g = Mat::Random(4, 4);
        const Mat m = g * g.transpose() + 0.1 * Mat::Identity(4, 4);
        const ModalModel model = ModalModel::bilinear(m, Mat::Zero(4, 4), Mat::Identity(4, 4));
        const Vec x = random_normal(rng, 4);
        CHECK(inner(model, x, x) > 0.0);
        CHECK(inner(model, Vec::Zero(4), Vec::Zero(4)) == 0.0);
    }
}

TEST_CASE("property: quasi-contraction type is invariant under orthogonal change of basis") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Mat a(4, 4);
        for (int i = 0; i < 16; ++i) a.data()[i] = random_normal(rng, 1)(0);
        Mat g(4, 4);
        for (int i = 0; i < 16; ++i) g.data()[i] = random_normal(rng, 1)(0);
        const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
        const Mat i4 = Mat::Identity(4, 4);
        CHECK(quasi_contraction_type(i4, q.transpose() * a * q) ==
              doctest::Approx(quasi_contraction_type(i4, a)).epsilon(1e-10));
    }
}

TEST_CASE("property: front-end control operators validate") {
    for (auto kind : {FrontendKind::Heat1D, FrontendKind::Wave1D, FrontendKind::Beam1D}) {
        FrontendSpec fs;
        fs.kind = kind;
        fs.n_modes = 6;
        fs.q = 2;
        const Frontend fe = build_frontend(fs);
        const auto r = validate_control_operator(fe.model);
        CHECK((r.passes || !r.applicable));
    }
}
