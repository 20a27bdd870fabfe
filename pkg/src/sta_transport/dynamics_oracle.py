"""Classical trajectory checks of the transport protocol.

For the quadratic potential the wavepacket centre obeys the classical
equation of motion and the width is static, so a classically unexcited
transport is a perfect shortcut.  Integration runs in the scaled variables
tau = t/t_f and xi = x/d so that a single tolerance fits both components.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .electrostatics import _gaussian_derivatives, voltages_clamped
from .errors import ContractError, EscapeError
from .model import Setup
from .numerics import ode_solve
from .trajectory import derivatives, evaluate

# trapping region [-2d, 3d] in units of d
_ESCAPE_LOW, _ESCAPE_HIGH = -2.0, 3.0
_TRACKING_SAMPLES = 2001


@dataclass(frozen=True)
class TransportVerdict:
    final_position: float
    final_velocity: float
    excitation_energy: float
    max_tracking_error: float

    def __post_init__(self):
        if not self.excitation_energy >= 0:
            raise ContractError("excitation energy must be non-negative")

    def relative_excitation(self, setup: Setup) -> float:
        """Excitation in units of m omega^2 d^2 / 2."""
        m, w, d = setup.ion.mass, setup.trap.omega, setup.geometry.spacing_d
        return self.excitation_energy / (0.5 * m * w * w * d * d)


def excitation_energy(setup: Setup, x, v) -> float:
    """Oscillation energy about the final trap centre x = d."""
    m, w, d = setup.ion.mass, setup.trap.omega, setup.geometry.spacing_d
    return 0.5 * m * v * v + 0.5 * m * w * w * (x - d) ** 2


def quadratic_potential(setup: Setup, x, t):
    """-m alpha'' x + (m/2) omega^2 (x - alpha)^2 + f(t)."""
    from .ps_energetics import f_shift

    spec, m, w = setup.transport, setup.ion.mass, setup.trap.omega
    alpha = evaluate(spec.polynomial, spec, t, 0)
    acc = evaluate(spec.polynomial, spec, t, 2)
    return -m * acc * x + 0.5 * m * w * w * (x - alpha) ** 2 + f_shift(setup, t)


def _verdict(setup: Setup, sol, t_end):
    d, tf = setup.geometry.spacing_d, setup.duration
    xi, eta = sol.y[0, -1], sol.y[1, -1]
    x, v = xi * d, eta * d / tf
    taus = np.linspace(0.0, t_end / tf, _TRACKING_SAMPLES)
    track = sol.dense(taus)[0] * d
    alpha = evaluate(setup.polynomial, setup.transport, taus * tf, 0)
    return TransportVerdict(
        final_position=float(x),
        final_velocity=float(v),
        excitation_energy=float(excitation_energy(setup, x, v)),
        max_tracking_error=float(np.max(np.abs(track - alpha))),
    )


def _integrate_quadratic(setup: Setup, rel_tol: float, t_end: float | None):
    spec, tf, d, w = setup.transport, setup.duration, setup.geometry.spacing_d, setup.trap.omega
    t_end = tf if t_end is None else t_end
    if not 0 < t_end <= tf:
        raise ContractError(f"t_end must lie in (0, t_f], got {t_end!r}")

    def rhs(tau, y):
        t = min(tau * tf, tf)
        alpha, _, acc, _ = derivatives(spec.polynomial, spec, t)
        return [y[1], tf * tf * (acc / d - w * w * (y[0] - alpha / d))]

    sol = ode_solve(rhs, [0.0, 0.0], (0.0, t_end / tf), rel_tol=rel_tol, abs_tol=rel_tol * 1e-2)
    return sol, t_end


def simulate_quadratic(setup: Setup, rel_tol: float = 1e-10, t_end: float | None = None) -> TransportVerdict:
    """Integrate m x'' = m alpha'' - m omega^2 (x - alpha) from rest at x = 0.

    ``t_end`` (default t_f) stops the protocol early.
    """
    sol, t_end = _integrate_quadratic(setup, rel_tol, t_end)
    return _verdict(setup, sol, t_end)


def quadratic_trajectory(setup: Setup, rel_tol: float = 1e-10):
    """Dense solution of the quadratic model as a function t -> (x, v) in SI units."""
    sol, _ = _integrate_quadratic(setup, rel_tol, None)
    d, tf = setup.geometry.spacing_d, setup.duration

    def state(t):
        xi, eta = sol.dense(np.asarray(t) / tf)
        return xi * d, eta * d / tf

    return state


def _axial_force(setup: Setup, x, t, compensate):
    pair = voltages_clamped(setup, t, compensate)
    geom = setup.geometry
    slope1 = _gaussian_derivatives(geom, 0.0, x)[1]
    slope2 = _gaussian_derivatives(geom, geom.spacing_d, x)[1]
    return -setup.ion.charge * (pair.U1 * slope1 + pair.U2 * slope2)


def initial_minimum(setup: Setup, compensate: bool = True) -> float:
    """Zero of the axial force at t = 0 nearest x = 0, by bracketing and bisection."""
    d = setup.geometry.spacing_d
    force = lambda x: _axial_force(setup, x, 0.0, compensate)
    if force(0.0) == 0.0:
        return 0.0
    half = 0.01 * d
    while half < d:
        if force(-half) * force(half) < 0:
            return brentq(force, -half, half, xtol=1e-12 * d, rtol=4 * np.finfo(float).eps)
        half *= 2.0
    raise ContractError("no potential minimum found near x = 0 at t = 0")


def simulate_full(setup: Setup, rel_tol: float = 1e-10, compensate: bool = True) -> TransportVerdict:
    """Integrate m x'' = -dV/dx in the synthesized two-segment Gaussian potential.

    Starts at rest in the true potential minimum.  ``compensate=False`` builds
    the voltages without the inertial compensation term.
    """
    tf, d, m = setup.duration, setup.geometry.spacing_d, setup.ion.mass
    x0 = initial_minimum(setup, compensate)

    def rhs(tau, y):
        t = min(tau * tf, tf)
        return [y[1], tf * tf / (d * m) * _axial_force(setup, y[0] * d, t, compensate)]

    def escaped(tau, y):
        return min(y[0] - _ESCAPE_LOW, _ESCAPE_HIGH - y[0])

    escaped.terminal = True
    sol = ode_solve(rhs, [x0 / d, 0.0], (0.0, 1.0), rel_tol=rel_tol, abs_tol=rel_tol * 1e-2, events=escaped)
    if sol.terminated:
        raise EscapeError(
            f"ion left the trapping region [{_ESCAPE_LOW}d, {_ESCAPE_HIGH}d] at t = {sol.t[-1] * tf:.4g} s"
        )
    return _verdict(setup, sol, tf)
