"""Python bindings for the finstab core."""

import json

from ._core import (
    ControllerSpec,
    Decomposition,
    InvalidInput,
    ModalModel,
    acceptance,
    compute_gamma,
    control,
    frontend,
    inner,
    quasi_contraction_type,
    run_scenario_json,
    settling_bound,
    simulate,
    unobservable_subspace,
)


def run_scenario(config, out_dir=None):
    """Run a scenario given as a dict; returns (exit_code, summary dict)."""
    code, summary = run_scenario_json(json.dumps(config), out_dir)
    return code, json.loads(summary)


__all__ = [
    "ControllerSpec",
    "Decomposition",
    "InvalidInput",
    "ModalModel",
    "acceptance",
    "compute_gamma",
    "control",
    "frontend",
    "inner",
    "quasi_contraction_type",
    "run_scenario",
    "settling_bound",
    "simulate",
    "unobservable_subspace",
]
