#include "finstab/frontends.hpp"
#include "finstab/integrator.hpp"
#include "finstab/transport_heat.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace finstab;

namespace {
constexpr double kPi = std::numbers::pi;

FrontendSpec spec(FrontendKind k, int n, int q = 1) {
    FrontendSpec fs;
    fs.kind = k;
    fs.n_modes = n;
    fs.q = q;
    return fs;
}
}  // namespace

TEST_CASE("heat model") {
    const Frontend fe = heat_model(spec(FrontendKind::Heat1D, 3));
    const Vec d = fe.model.generator().diagonal();
    CHECK(d(0) == doctest::Approx(-9.8696044).epsilon(1e-8));
    CHECK(d(1) == doctest::Approx(-39.4784176).epsilon(1e-8));
    CHECK(d(2) == doctest::Approx(-88.8264396).epsilon(1e-8));
    const DecompositionResult svd = unobservable_subspace(fe.model);
    CHECK(subspace_distance(fe.model.metric(), svd.w_basis, fe.exact_w()) < 1e-8);
    CHECK(compute_gamma(fe.model, svd) == doctest::Approx(1.0));
    CHECK_THROWS_AS(heat_model(spec(FrontendKind::Heat1D, 1)), InvalidInput);
}

TEST_CASE("wave model") {
    const Frontend fe = wave_model(spec(FrontendKind::Wave1D, 6, 2));
    const DecompositionResult svd = unobservable_subspace(fe.model);
    CHECK(subspace_distance(fe.model.metric(), svd.w_basis, fe.exact_w()) < 1e-8);

    // <Ay, By> on W-perp equals sum_i -lambda_i alpha_i beta_i in energy coordinates.
    Rng rng(3);
    const DecompositionResult dec = fe.decomposition();
    for (int k = 0; k < 20; ++k) {
        const Vec y = dec.projection * random_normal(rng, 12);
        const Mat& a = fe.model.generator();
        const Mat& b = *fe.model.control_op();
        double oracle = 0.0;
        for (int i = 0; i < 2; ++i) oracle += -(i + 1) * kPi * y(i) * y(6 + i);
        CHECK(inner(fe.model, a * y, b * y) == doctest::Approx(oracle).epsilon(1e-12));
    }
    CHECK_THROWS_AS(wave_model(spec(FrontendKind::Wave1D, 3, 4)), InvalidInput);
}

TEST_CASE("beam model") {
    const Frontend fe = beam_model(spec(FrontendKind::Beam1D, 4));
    CHECK(fe.model.metric()(0, 0) == doctest::Approx(97.409091).epsilon(1e-7));
    const Mat adj = fe.model.input_adjoint();
    CHECK(adj.leftCols(4).norm() == 0.0);
    CHECK(adj(0, 4) == 1.0);
    const DecompositionResult svd = unobservable_subspace(fe.model);
    CHECK(svd.dim_wperp() == 2);
    CHECK(subspace_distance(fe.model.metric(), svd.w_basis, fe.exact_w()) < 1e-8);
}

TEST_CASE("presets") {
    const Frontend heat = heat_model(spec(FrontendKind::Heat1D, 4));
    const DecompositionResult hd = heat.decomposition();
    Vec expected = Vec::Zero(4);
    expected(1) = 1.0;
    expected(2) = 0.5;
    CHECK(initial_state_preset(heat, hd, "mode2+0.5*mode3") == expected);
    CHECK_THROWS_AS(initial_state_preset(heat, hd, "mode9"), InvalidInput);
    CHECK_THROWS_AS(initial_state_preset(heat, hd, "vel1"), InvalidInput);
    CHECK_THROWS_AS(initial_state_preset(heat, hd, "banana"), InvalidInput);

    const Frontend wave = wave_model(spec(FrontendKind::Wave1D, 4, 2));
    const DecompositionResult wd = wave.decomposition();
    const Vec r1 = initial_state_preset(wave, wd, "wperp-random(5)");
    CHECK(r1 == initial_state_preset(wave, wd, "wperp-random(5)"));
    CHECK(norm(wave.model, r1) == doctest::Approx(1.0));
    CHECK((wd.complement() * r1).norm() == 0.0);
    CHECK(initial_state_preset(wave, wd, "vel2")(5) == 1.0);
}

TEST_CASE("transport-heat model") {
    const HybridModel hm(4, 16, 0.25);
    CHECK(HybridModel::heat_eigenvalue(1, 1) == doctest::Approx(-19.7392088).epsilon(1e-8));

    // Zero control: Phi_00 is frozen, Psi is gone after one time unit.
    HybridRunOpts o;
    o.zero_control = true;
    o.t_max = 1.5;
    HybridState s0 = hm.zero_state();
    s0.phi(0, 0) = 1.0;
    s0.psi.setRandom();
    const Trajectory tr = simulate_hybrid(hm, s0, o);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const HybridState s = hm.unflatten(tr.states[i]);
        CHECK(s.phi(0, 0) == 1.0);
        if (tr.times[i] >= 1.0) CHECK(s.psi.isZero(0.0));
    }
    CHECK(hm.verify_nilpotency(s0.psi, 2.0));
}

TEST_CASE("transport step") {
    const HybridModel hm(2, 8, 0.5);
    // Constant control, path fully inside the patch: exact factor e^{c dt}.
    Mat psi = Mat::Zero(8, 8);
    psi(0, 0) = 1.0;
    const Mat out = hm.transport_step(psi, {-2.0, -2.0});
    CHECK(out(1, 1) == doctest::Approx(std::exp(-2.0 / 8.0)).epsilon(1e-15));

    // Single cell traced along the diagonal with no control.
    psi.setZero();
    psi(2, 5) = 3.0;
    Mat cur = psi;
    for (int k = 1; k <= 4; ++k) {
        cur = hm.transport_step(cur, {0.0, 0.0});
        if (k <= 2) {
            CHECK(cur(2 + k, 5 + k) == 3.0);
            CHECK(cur.sum() == 3.0);
        } else {
            CHECK(cur.isZero(0.0));
        }
    }
}

TEST_CASE("property: Parseval consistency for band-limited heat fields") {
    const HybridModel hm(6, 64, 0.25);
    Rng rng(9);
    for (int k = 0; k < 10; ++k) {
        Mat phi = Mat::Zero(6, 6);
        for (int i = 0; i < 36; ++i) phi.data()[i] = random_normal(rng, 1)(0);
        const double modal = phi.squaredNorm();
        CHECK(hm.grid_l2_squared(hm.reconstruct_heat(phi)) == doctest::Approx(modal).epsilon(1e-6));
        CHECK((hm.project_heat(hm.reconstruct_heat(phi)) - phi).norm() < 1e-6 * phi.norm());
    }
}

TEST_CASE("property: uncontrolled wave and beam flows conserve the metric norm") {
    for (auto kind : {FrontendKind::Wave1D, FrontendKind::Beam1D}) {
        const Frontend fe = build_frontend(spec(kind, 4, 2));
        ControllerSpec none;
        none.variant = ControlVariant::ZeroControl;
        IntegrationOpts o;
        o.t_max = 1.0;
        o.rtol = 1e-12;
        o.atol = 1e-14;
        o.dt_max = kind == FrontendKind::Beam1D ? 1e-3 : 1e-2;
        Rng rng(17);
        const Vec y0 = random_normal(rng, 8);
        const Trajectory tr = simulate(fe.model, fe.decomposition(), none, y0, o);
        const double n0 = tr.norms.front();
        for (std::size_t i = 0; i < tr.size(); ++i)
            CHECK(std::abs(tr.norms[i] - n0) <= 1e-9 * n0 * std::max(1.0, tr.times[i]));
    }
}
