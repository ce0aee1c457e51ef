"""Bundled reference configurations.

The benchmark initial state is the vacuum/one-photon superposition
(|0> + e^{i pi/3} |1>)/sqrt(2) exposed to damping gamma_t = 0.3. Every case
injects the same fixed reference measurement so optimized results can be
compared against it inside the report; the cases differ only in the cost
exponent and the number of allowed measurements.
"""
from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .experiment import ExperimentConfig
from .measurement import CmParams

CASES = ("single-cm", "r0", "r1", "r2")

REFERENCE_CM = CmParams(
    theta_i=3.0 * np.pi / 8.0,
    phi_i=5.0 * np.pi / 4.0,
    theta_f=3.0 * np.pi / 8.0,
    phi_f=np.pi / 4.0,
    g_tau=37.95,
)

_BENCHMARK_STATE = (
    {"n": 0, "amplitude": {"mag": 0.5**0.5, "phase_over_pi": 0.0}},
    {"n": 1, "amplitude": {"mag": 0.5**0.5, "phase_over_pi": 1.0 / 3.0}},
)

_CASE_SETTINGS = {
    "single-cm": {"cost_r": 2.0, "max_cms": 1},
    "r2": {"cost_r": 2.0, "max_cms": 4},
    "r1": {"cost_r": 1.0, "max_cms": 4},
    "r0": {"cost_r": 0.0, "max_cms": 4},
}


def reference_config(case: str, output_dir, plots: bool = True) -> ExperimentConfig:
    """Build the named bundled case, writing artifacts under output_dir."""
    if case not in _CASE_SETTINGS:
        raise ValidationError(f"unknown reference case {case!r}; choose one of {', '.join(CASES)}")
    settings = _CASE_SETTINGS[case]
    return ExperimentConfig.from_mapping({
        "initial_state": list(_BENCHMARK_STATE),
        "gamma_t": 0.3,
        "cost_r": settings["cost_r"],
        "max_cms": settings["max_cms"],
        "inject": [{
            "theta_i": REFERENCE_CM.theta_i,
            "phi_i": REFERENCE_CM.phi_i,
            "theta_f": REFERENCE_CM.theta_f,
            "phi_f": REFERENCE_CM.phi_f,
            "g_tau": REFERENCE_CM.g_tau,
        }],
        "output_dir": str(output_dir),
        "plots": plots,
    })
