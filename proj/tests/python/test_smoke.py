import math

import numpy as np
import pytest

finstab = pytest.importorskip("finstab")


def heat():
    model, dec, preset = finstab.frontend("Heat1D", n_modes=6)
    return model, dec, preset


def test_inner_weighted():
    m = finstab.ModalModel.bilinear(np.diag([2.0, 3.0]), np.zeros((2, 2)), np.eye(2))
    assert finstab.inner(m, np.ones(2), np.ones(2)) == pytest.approx(5.0)


def test_heat_decomposition():
    model, _, _ = heat()
    dec = finstab.unobservable_subspace(model)
    assert dec.w_basis.shape == (6, 1)
    assert abs(abs(dec.w_basis[0, 0]) - 1.0) < 1e-12
    assert dec.gamma == pytest.approx(1.0)


def test_control_and_bound():
    model, dec, preset = heat()
    y = np.zeros(6)
    y[1] = 2.0
    u = finstab.control(preset, model, dec, y)
    assert u[0] == pytest.approx(-(4.0 ** -0.25))
    y[1] = 1.0
    assert finstab.settling_bound(preset, model, dec, y) == pytest.approx(2.0)


def test_simulate_heat_settles():
    model, dec, preset = heat()
    y0 = np.zeros(6)
    y0[1] = 1.0
    tr = finstab.simulate(model, dec, preset, y0, t_max=2.5)
    assert tr["settling_time"] is not None and tr["settling_time"] <= 2.0
    assert math.isclose(tr["norms"][0], 1.0)


def test_invalid_model_raises():
    with pytest.raises(ValueError):
        finstab.ModalModel.bilinear(-np.eye(2), np.zeros((2, 2)), np.eye(2))


def test_run_scenario(tmp_path):
    cfg = {
        "name": "py-heat",
        "model": {"frontend": {"kind": "Heat1D", "n_modes": 8}},
        "controller": {"variant": "BilinearPhi", "mu": 0.25},
        "initial_state": "mode2+0.5*mode3",
        "integration": {"t_max": 3.0},
        "checks": ["Decay", "Bound"],
    }
    code, summary = finstab.run_scenario(cfg, str(tmp_path))
    assert code == 0
    assert summary["settling_time"] <= summary["bound"]["value"]
    assert (tmp_path / "trajectory.csv").exists()


def test_acceptance_subset():
    res = finstab.acceptance("control-invariance")
    assert len(res) == 1 and res[0]["passed"]
