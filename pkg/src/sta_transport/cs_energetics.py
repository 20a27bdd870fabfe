"""Power drawn by the RC-filtered electrode circuits and derived energy costs."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .electrostatics import VoltagePair, _solve
from .errors import BracketError, ContractError
from .model import FilterCircuit, Setup
from .numerics import golden_section, integrate, sign_change_roots

logger = logging.getLogger(__name__)

CONSUMPTION_RTOL = 1e-8


@dataclass(frozen=True)
class CsPowerSample:
    P_C1: np.ndarray | float
    P_C2: np.ndarray | float
    P_R1: np.ndarray | float
    P_R2: np.ndarray | float

    @property
    def signed_total(self):
        return self.P_C1 + self.P_C2 + self.P_R1 + self.P_R2

    @property
    def rectified_total(self):
        return np.abs(self.P_C1) + np.abs(self.P_C2) + self.P_R1 + self.P_R2


def cs_power(filt: FilterCircuit, pair: VoltagePair) -> CsPowerSample:
    """Capacitor power C U dU/dt and resistor power R C^2 (dU/dt)^2 per segment."""
    C, R = filt.capacitance_C, filt.resistance_R
    return CsPowerSample(
        P_C1=C * pair.U1 * pair.U1_rate,
        P_C2=C * pair.U2 * pair.U2_rate,
        P_R1=R * C * C * pair.U1_rate**2,
        P_R2=R * C * C * pair.U2_rate**2,
    )


def _component_powers(setup: Setup, t):
    U1, U2, dU1, dU2 = _solve(setup, t, True)
    C, R = setup.filter.capacitance_C, setup.filter.resistance_R
    return C * U1 * dU1, C * U2 * dU2, R * C * C * (dU1 * dU1 + dU2 * dU2)


def e_cs_consumption(setup: Setup, rel_tol: float = CONSUMPTION_RTOL, max_panels: int = 20000) -> float:
    """Integral of sum_i |P_Ci| + P_Ri over the protocol.

    Zero crossings of each capacitor power are located before integrating so
    the kinks of |P_Ci| fall on panel boundaries.
    """
    tf = setup.duration
    kinks = np.concatenate([
        sign_change_roots(lambda t: _component_powers(setup, t)[0], 0.0, tf),
        sign_change_roots(lambda t: _component_powers(setup, t)[1], 0.0, tf),
    ])

    def rectified(t):
        pc1, pc2, pr = _component_powers(setup, t)
        return np.abs(pc1) + np.abs(pc2) + pr

    return integrate(rectified, 0.0, tf, rel_tol=rel_tol, breakpoints=np.sort(kinks),
                     max_panels=max_panels).value


def energy_with_eta(times, power, eta: float) -> float:
    """Integral of P_+ plus eta times the integral of P_-, from sampled power.

    Trapezoidal rule, with each sign change located by linear interpolation
    so that the positive and negative lobes are integrated separately.
    """
    if not -1.0 <= eta <= 1.0:
        raise ContractError(f"eta must lie in [-1, 1], got {eta!r}")
    t = np.asarray(times, dtype=float)
    p = np.asarray(power, dtype=float)
    if t.shape != p.shape or t.size < 2:
        raise ContractError("times and power must be equal-length arrays of at least two samples")
    t0, t1, p0, p1 = t[:-1], t[1:], p[:-1], p[1:]
    dt = t1 - t0
    crossing = p0 * p1 < 0
    # Split fraction of each interval before the zero (1 where no crossing).
    frac = np.where(crossing, p0 / np.where(crossing, p0 - p1, 1.0), 1.0)
    first = 0.5 * frac * dt * np.where(crossing, p0, p0 + p1)
    second = np.where(crossing, 0.5 * (1.0 - frac) * dt * p1, 0.0)
    pieces = np.concatenate([first, second])
    positive = pieces[pieces > 0].sum()
    negative = pieces[pieces < 0].sum()
    return float(positive + eta * negative)


def peak_coefficients(setup: Setup) -> tuple[float, float]:
    """The constants G and J of the boundary CS power of the quintic protocol."""
    geom, filt = setup.geometry, setup.filter
    a, c, d = geom.amplitude_a, geom.width_c, geom.spacing_d
    R, C = filt.resistance_R, filt.capacitance_C
    G = 3600.0 * R * C**2 / a**2 * ((c**2 - d**2) ** 2 + c**4 * np.exp((d / c) ** 2))
    J = 60.0 * C * c**2 / a**2 * (c**2 - d**2)
    return float(G), float(J)


def cs_peak_closed_form(setup: Setup) -> float:
    """Boundary-time total CS power (m/q)^2 (G/t_f^6 - J omega^2/t_f^3) for the quintic.

    The capacitor term enters with a minus sign: at t = 0 it equals
    C U1 dU1/dt = -(m/q)^2 J omega^2 / t_f^3.
    """
    G, J = peak_coefficients(setup)
    tf = setup.duration
    ratio = (setup.ion.mass / setup.ion.charge) ** 2
    return float(ratio * (G / tf**6 - J * setup.trap.omega**2 / tf**3))


def rf_energy(p_rf: float, tf: float) -> float:
    if p_rf < 0:
        raise ContractError(f"rf power must be non-negative, got {p_rf!r}")
    return p_rf * tf


@dataclass(frozen=True)
class DurationOptimum:
    duration: float
    total_energy: float
    # "lower" or "upper" when the minimum sits on the bracket edge
    edge: str | None = None


def total_consumption(setup: Setup, tf: float, p_rf: float, rel_tol: float = 1e-10) -> float:
    return e_cs_consumption(setup.with_duration(tf), rel_tol=rel_tol) + rf_energy(p_rf, tf)


def optimal_duration(setup: Setup, p_rf: float, bracket: tuple[float, float],
                     grid: int = 41, tol: float = 1e-10) -> DurationOptimum:
    """Duration minimizing control-circuit plus rf energy.

    The bracket is scanned on a log grid first; a minimum on an edge is
    returned with a diagnostic, more than one interior local minimum raises
    :class:`BracketError`, otherwise golden-section search refines it.
    """
    lo, hi = bracket
    if not 0 < lo < hi:
        raise ContractError(f"invalid duration bracket {bracket!r}")
    rf_energy(p_rf, lo)
    ts = np.geomspace(lo, hi, grid)
    totals = np.array([total_consumption(setup, t, p_rf) for t in ts])
    i = int(np.argmin(totals))
    if i == 0:
        logger.warning("total consumption increases across the bracket; returning lower edge")
        return DurationOptimum(lo, float(totals[0]), "lower")
    if i == grid - 1:
        logger.warning("total consumption decreases across the bracket; returning upper edge")
        return DurationOptimum(hi, float(totals[-1]), "upper")
    interior = (totals[1:-1] < totals[:-2]) & (totals[1:-1] < totals[2:])
    if np.count_nonzero(interior) > 1:
        raise BracketError(f"{np.count_nonzero(interior)} local minima of total consumption inside {bracket!r}")
    t_best, e_best = golden_section(lambda t: total_consumption(setup, t, p_rf), ts[i - 1], ts[i + 1], tol)
    return DurationOptimum(float(t_best), float(e_best))
