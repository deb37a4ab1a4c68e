#include "finstab/frontends.hpp"
#include "finstab/integrator.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace finstab;

namespace {
constexpr double kPi = std::numbers::pi;

Frontend heat(int n = 6) {
    FrontendSpec fs;
    fs.n_modes = n;
    return heat_model(fs);
}

IntegrationOpts opts(double t_max) {
    IntegrationOpts o;
    o.t_max = t_max;
    return o;
}
}  // namespace

TEST_CASE("closed-loop field examples") {
    const Frontend fe = heat();
    const DecompositionResult dec = fe.decomposition();
    const ControllerSpec s = fe.preset;
    const Vec w = Vec::Unit(6, 0);
    CHECK((closed_loop_field(fe.model, dec, s, w) - fe.model.generator() * w).norm() == 0.0);
    const Vec f = closed_loop_field(fe.model, dec, s, Vec::Unit(6, 1));
    CHECK(f(1) == doctest::Approx(-4 * kPi * kPi - 1).epsilon(1e-13));
    CHECK(closed_loop_field(fe.model, dec, s, Vec::Zero(6)).norm() == 0.0);
}

TEST_CASE("heat run from mode 2 settles before the bound") {
    const Frontend fe = heat();
    const DecompositionResult dec = fe.decomposition();
    const Trajectory tr = simulate(fe.model, dec, fe.preset, Vec::Unit(6, 1), opts(2.5));
    REQUIRE(tr.settling_time);
    CHECK(*tr.settling_time <= 2.0);
    for (std::size_t i = 1; i < tr.size(); ++i) {
        if (tr.times[i] >= *tr.settling_time) break;
        CHECK(tr.lyapunov[i] < tr.lyapunov[i - 1]);
    }
    const CheckReport d = verify_decay(tr, 1.0, 0.25, 1e-6);
    CHECK(d.passes);
}

TEST_CASE("zero initial state") {
    const Frontend fe = heat();
    const Trajectory tr = simulate(fe.model, fe.decomposition(), fe.preset, Vec::Zero(6), opts(0.1));
    REQUIRE(tr.settling_time);
    CHECK(*tr.settling_time == 0.0);
    for (const auto& y : tr.states) CHECK(y.norm() == 0.0);
}

TEST_CASE("uncontrolled wave conserves energy and never settles") {
    FrontendSpec fs;
    fs.kind = FrontendKind::Wave1D;
    fs.n_modes = 4;
    fs.q = 2;
    const Frontend fe = wave_model(fs);
    ControllerSpec none;
    none.variant = ControlVariant::ZeroControl;
    IntegrationOpts o = opts(1.0);
    o.rtol = 1e-12;
    o.atol = 1e-14;
    Rng rng(8);
    const Vec y0 = random_normal(rng, 8);
    const Trajectory tr = simulate(fe.model, fe.decomposition(), none, y0, o);
    CHECK_FALSE(tr.settling_time);
    for (double n : tr.norms) CHECK(std::abs(n - y0.norm()) <= 1e-9 * y0.norm());
    CHECK(verify_lyapunov_stability(tr, 0.0).passes);
}

TEST_CASE("decay checker") {
    const Frontend fe = heat();
    Trajectory tr = simulate(fe.model, fe.decomposition(), fe.preset, Vec::Unit(6, 1), opts(1.0));
    CHECK(verify_decay(tr, 1.0, 0.25, 1e-6).passes);

    Trajectory flat;
    flat.times = {0.0, 0.5, 1.0};
    flat.lyapunov = {0.0, 0.0, 0.0};
    flat.norms = {0.0, 0.0, 0.0};
    flat.states = {Vec::Zero(1), Vec::Zero(1), Vec::Zero(1)};
    flat.settling_time = 0.0;
    CHECK(verify_decay(flat, 1.0, 0.25, 1e-6).passes);

    tr.settling_time.reset();
    tr.lyapunov[5] *= 10.0;
    const CheckReport bad = verify_decay(tr, 1.0, 0.25, 1e-6);
    CHECK_FALSE(bad.passes);
    REQUIRE(bad.worst_index);
    CHECK(*bad.worst_index == 5);
}

TEST_CASE("split checker") {
    const Frontend fe = heat();
    const DecompositionResult dec = fe.decomposition();
    Vec y0 = Vec::Unit(6, 0) + Vec::Unit(6, 1);
    const Trajectory tr = simulate(fe.model, dec, fe.preset, y0, opts(0.5));
    for (std::size_t i = 0; i < tr.size(); ++i)
        CHECK(std::abs(tr.states[i](0) - std::exp(-kPi * kPi * tr.times[i])) <= 1e-8);
    CHECK(verify_split(fe.model, dec, fe.preset, tr).passes);

    const Trajectory perp = simulate(fe.model, dec, fe.preset, Vec::Unit(6, 2), opts(0.5));
    for (const auto& y : perp.states) CHECK((dec.complement() * y).norm() == 0.0);
}

TEST_CASE("stability checker negative control") {
    const Frontend fe = heat();
    Trajectory tr = simulate(fe.model, fe.decomposition(), fe.preset, Vec::Unit(6, 1), opts(0.2));
    CHECK(verify_lyapunov_stability(tr, 0.0).passes);
    tr.settling_time.reset();
    tr.norms[3] = 2.0 * tr.norms[0];
    CHECK_FALSE(verify_lyapunov_stability(tr, 0.0).passes);
}

TEST_CASE("settling detection") {
    CHECK(*detect_settling({0, 1, 2, 3}, {1, 0, 0, 0}, 1e-8) == 1.0);
    CHECK_FALSE(detect_settling({0, 1, 2}, {1, 0, 1}, 1e-8));
    CHECK(*detect_settling({0, 1, 2}, {1, 1, 0}, 1e-8) == 2.0);
}

TEST_CASE("invalid options") {
    IntegrationOpts o;
    o.dt_min = 1.0;
    CHECK_THROWS_AS(o.validate(), InvalidInput);
}

TEST_CASE("property: tighter tolerance stays within reported error") {
    const Frontend fe = heat();
    const DecompositionResult dec = fe.decomposition();
    ControllerSpec none;
    none.variant = ControlVariant::ZeroControl;
    Rng rng(12);
    const Vec y0 = random_normal(rng, 6);
    IntegrationOpts o = opts(0.3);
    o.rtol = 1e-8;
    o.atol = 1e-11;
    const Trajectory coarse = simulate(fe.model, dec, none, y0, o);
    o.rtol = 1e-9;
    o.atol = 1e-12;
    const Trajectory fine = simulate(fe.model, dec, none, y0, o);
    REQUIRE(coarse.size() == fine.size());
    for (std::size_t i = 0; i < coarse.size(); ++i)
        CHECK((coarse.states[i] - fine.states[i]).norm() <= 10.0 * coarse.error_bound[i] + 1e-15);
}

TEST_CASE("property: W-perp is invariant and V nonincreasing along BilinearPhi runs") {
    const Frontend fe = heat(8);
    const DecompositionResult dec = fe.decomposition();
    Rng rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        const Vec y0 = dec.projection * random_normal(rng, 8);
        const Trajectory tr = simulate(fe.model, dec, fe.preset, y0, opts(3.0));
        for (std::size_t i = 0; i < tr.size(); ++i) {
            CHECK((dec.complement() * tr.states[i]).norm() <= 1e-9 * y0.norm());
            if (i > 0) CHECK(tr.lyapunov[i] <= tr.lyapunov[i - 1] * (1 + 1e-9));
            if (tr.settling_time && tr.times[i] >= *tr.settling_time) CHECK(tr.norms[i] <= 2e-8);
        }
    }
}
