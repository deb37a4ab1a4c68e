#include "finstab/controllers.hpp"
#include "finstab/frontends.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace finstab;

namespace {
constexpr double kPi = std::numbers::pi;

Frontend heat(int n = 4) {
    FrontendSpec fs;
    fs.n_modes = n;
    return heat_model(fs);
}

ControllerSpec spec_of(ControlVariant v, double mu) {
    ControllerSpec s;
    s.variant = v;
    s.mu = mu;
    return s;
}
}  // namespace

TEST_CASE("BilinearPhi examples") {
    const Frontend fe = heat();
    const DecompositionResult dec = fe.decomposition();
    const ControllerSpec s = spec_of(ControlVariant::BilinearPhi, 0.25);
    CHECK(control_bilinear_phi(s, fe.model, dec, Vec::Unit(4, 1)) == doctest::Approx(-1.0));
    CHECK(control_bilinear_phi(s, fe.model, dec, Vec::Unit(4, 0)) == 0.0);
    const long double oracle = -1.0L / std::sqrt(std::sqrt(4.0L));
    CHECK(control_bilinear_phi(s, fe.model, dec, 2.0 * Vec::Unit(4, 1)) ==
          doctest::Approx(static_cast<double>(oracle)).epsilon(1e-14));
}

TEST_CASE("BilinearGrad examples") {
    const Mat i2 = Mat::Identity(2, 2);
    const ModalModel trivial = ModalModel::bilinear(i2, Mat::Zero(2, 2), i2);
    const DecompositionResult all = unobservable_subspace(trivial);
    const ControllerSpec half = spec_of(ControlVariant::BilinearGrad, 0.5);
    Vec y(2);
    y << 0.6, 0.8;
    CHECK(control_bilinear_grad(half, trivial, all, y) == doctest::Approx(-1.0));

    const Frontend fe = heat();
    const ControllerSpec s = spec_of(ControlVariant::BilinearGrad, 0.25);
    CHECK(control_bilinear_grad(s, fe.model, fe.decomposition(), Vec::Unit(4, 1)) ==
          doctest::Approx(4 * kPi * kPi - 1).epsilon(1e-12));
    CHECK(control_bilinear_grad(s, fe.model, fe.decomposition(), Vec::Unit(4, 0)) == 0.0);
}

TEST_CASE("LinearPhi examples") {
    const Mat i2 = Mat::Identity(2, 2);
    const ModalModel full = ModalModel::linear(i2, Mat::Zero(2, 2), i2);
    const ControllerSpec s = spec_of(ControlVariant::LinearPhi, 0.25);
    Vec y(2);
    y << 0.6, 0.8;
    const Vec v = control_linear_phi(s, full, unobservable_subspace(full), y);
    CHECK((v + y).norm() < 1e-14);

    const ModalModel col = ModalModel::linear(i2, Mat::Zero(2, 2), Mat(Vec::Unit(2, 0)));
    const DecompositionResult dec = unobservable_subspace(col);
    Vec y4(2);
    y4 << 4, 0;
    CHECK(control_linear_phi(s, col, dec, y4)(0) == doctest::Approx(-4.0 / std::sqrt(4.0)));
    CHECK(control_linear_phi(s, col, dec, Vec::Unit(2, 1)).norm() == 0.0);
}

TEST_CASE("RankOne examples") {
    // Two-mode rotation with zeta = e1, varpi = 1, L = e1.
    Mat a(2, 2);
    a << 0, 1, -1, 0;
    const Mat i2 = Mat::Identity(2, 2);
    const ModalModel m = ModalModel::linear(i2, a, Mat(Vec::Unit(2, 0)));
    const DecompositionResult dec = decomposition_from_coordinates(m, {true, true});
    ControllerSpec s = spec_of(ControlVariant::RankOne, 0.25);
    s.zeta = Vec::Unit(2, 0);
    s.varpi = Vec::Ones(1);
    // A* zeta = -e2 here, so Py = e1 is orthogonal to it and s = 1.
    CHECK(control_rank_one(s, m, dec, Vec::Unit(2, 0))(0) == doctest::Approx(-1.0));
    CHECK(control_rank_one(s, m, dec, 4.0 * Vec::Unit(2, 0))(0) == doctest::Approx(-4.0 / std::sqrt(4.0)));
    CHECK(control_rank_one(s, m, dec, Vec::Zero(2)).norm() == 0.0);
}

TEST_CASE("settling bounds") {
    const Mat i1 = Mat::Identity(1, 1);
    const ModalModel m = ModalModel::bilinear(i1, Mat::Zero(1, 1), i1);
    DecompositionResult dec = unobservable_subspace(m);
    certify(m, dec);
    const SettlingBound b = settling_bound(spec_of(ControlVariant::BilinearPhi, 0.25), m, dec, Vec::Ones(1));
    REQUIRE(b.bounded());
    CHECK(*b.value == doctest::Approx(std::pow(1.0, 0.25) / (2 * 1 * 0.25)));

    const Frontend fe = heat();
    const SettlingBound z = settling_bound(spec_of(ControlVariant::BilinearPhi, 0.25), fe.model,
                                           fe.decomposition(), Vec::Zero(4));
    REQUIRE(z.bounded());
    CHECK(*z.value == 0.0);

    FrontendSpec bs;
    bs.kind = FrontendKind::Beam1D;
    bs.n_modes = 3;
    const Frontend beam = beam_model(bs);
    const SettlingBound r = settling_bound(beam.preset, beam.model, beam.decomposition(), Vec::Unit(6, 3));
    REQUIRE(r.bounded());
    CHECK(*r.value == doctest::Approx(2.0));
}

TEST_CASE("spec validation") {
    const Frontend fe = heat();
    CHECK_THROWS_AS(validate(spec_of(ControlVariant::BilinearPhi, 0.5), fe.model), InvalidInput);
    CHECK_NOTHROW(validate(spec_of(ControlVariant::BilinearGrad, 0.75), fe.model));
    CHECK_THROWS_AS(validate(spec_of(ControlVariant::LinearPhi, 0.25), fe.model), InvalidInput);
    ControllerSpec dz = spec_of(ControlVariant::BilinearPhi, 0.25);
    dz.dead_zone = 0.0;
    CHECK_THROWS_AS(validate(dz, fe.model), InvalidInput);
}

TEST_CASE("property: BilinearPhi scaling law") {
    const Frontend fe = heat(8);
    const DecompositionResult dec = fe.decomposition();
    const ControllerSpec s = spec_of(ControlVariant::BilinearPhi, 0.25);
    Rng rng(1);
    for (int k = 0; k < 100; ++k) {
        const Vec y = random_normal(rng, 8);
        const double u = control_bilinear_phi(s, fe.model, dec, y);
        for (double c : {0.5, 2.0, 10.0}) {
            const double uc = control_bilinear_phi(s, fe.model, dec, c * y);
            CHECK(uc == doctest::Approx(std::pow(c, -0.5) * u).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: control vanishes on W and ignores W components") {
    Rng rng(2);
    for (auto kind : {FrontendKind::Heat1D, FrontendKind::Wave1D, FrontendKind::Beam1D}) {
        FrontendSpec fs;
        fs.kind = kind;
        fs.n_modes = 5;
        fs.q = 2;
        const Frontend fe = build_frontend(fs);
        const DecompositionResult dec = fe.decomposition();
        const FeedbackLaw law(fe.preset, fe.model, dec);
        for (int k = 0; k < 50; ++k) {
            const Vec w = dec.w_basis * random_normal(rng, dec.dim_w());
            const Vec y = random_normal(rng, fe.model.dim());
            if (kind != FrontendKind::Beam1D) CHECK(law.evaluate(w).value.norm() == 0.0);
            const Vec u1 = law.evaluate(y).value;
            const Vec u2 = law.evaluate(y + w).value;
            CHECK((u1.array() == u2.array()).all());
        }
    }
}

TEST_CASE("property: rank-one compensation term is linear") {
    FrontendSpec fs;
    fs.kind = FrontendKind::Beam1D;
    fs.n_modes = 3;
    Vec h(3);
    h << 1, 0.5, 0;
    fs.h_coeffs = h;
    const Frontend fe = beam_model(fs);
    const DecompositionResult dec = fe.decomposition();
    ControllerSpec s = fe.preset;
    s.dead_zone = 1e300;  // first term always dead-zoned
    Rng rng(4);
    for (int k = 0; k < 50; ++k) {
        const Vec y = random_normal(rng, 6), z = random_normal(rng, 6);
        const Vec d = control_rank_one(s, fe.model, dec, y + z) - control_rank_one(s, fe.model, dec, y) -
                      control_rank_one(s, fe.model, dec, z);
        CHECK(d.norm() < 1e-9 * (1 + control_rank_one(s, fe.model, dec, y).norm()));
    }
}
