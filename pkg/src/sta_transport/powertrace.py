"""Uniformly sampled time series of every PS and CS power component."""
from __future__ import annotations

import numpy as np

from .cs_energetics import cs_power
from .electrostatics import voltages
from .errors import ContractError
from .model import PowerTrace, Setup
from .ps_energetics import e_ps, f_shift, p_ps, p_ps_f0


def sample_trace(setup: Setup, samples: int = 1001) -> PowerTrace:
    if samples < 2:
        raise ContractError(f"need at least 2 samples, got {samples}")
    t = np.linspace(0.0, setup.duration, samples)
    pair = voltages(setup, t)
    cs = cs_power(setup.filter, pair)
    columns = {
        "U1": pair.U1,
        "U2": pair.U2,
        "U1_rate": pair.U1_rate,
        "U2_rate": pair.U2_rate,
        "P_C1": cs.P_C1,
        "P_C2": cs.P_C2,
        "P_R1": cs.P_R1,
        "P_R2": cs.P_R2,
        "P_CS_signed": cs.signed_total,
        "P_CS_rectified": cs.rectified_total,
        "P_PS": p_ps(setup, t),
        "P_PS_f0": p_ps_f0(setup, t),
        "E_PS": e_ps(setup, t).total,
        "E_PS_f0": e_ps(setup, t, use_shift=False).total,
        "f_shift": f_shift(setup, t),
    }
    return PowerTrace(t, columns)
