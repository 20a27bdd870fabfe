"""Energy, power and energy consumption of the transported ion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryDegenerateError
from .model import HBAR, Setup
from .numerics import QuadratureResult, integrate, sign_change_roots
from .trajectory import derivatives

CONSUMPTION_RTOL = 1e-8


@dataclass(frozen=True)
class PsEnergyBreakdown:
    zero_point: float
    kinetic: float
    tilt: float
    shift: float

    @property
    def total(self):
        return self.zero_point + self.kinetic + self.tilt + self.shift


def _guarded_denominator(setup: Setup, alpha):
    den = setup.geometry.guard(alpha)
    if np.any(den <= 0):
        raise GeometryDegenerateError("harmonic-solvability guard violated along the trajectory")
    return den


def _shift(setup: Setup, alpha, alpha_ddot):
    geom, ion, trap = setup.geometry, setup.ion, setup.trap
    c2, d, m = geom.width_c**2, geom.spacing_d, ion.mass
    den = _guarded_denominator(setup, alpha)
    return m * alpha * alpha_ddot - c2 * m * (c2 * trap.omega**2 + (d - 2.0 * alpha) * alpha_ddot) / den


def f_shift(setup: Setup, t):
    """Purely time-dependent energy term f(t) fixed by the electrode model."""
    spec = setup.transport
    alpha, _, alpha_ddot, _ = derivatives(spec.polynomial, spec, t)
    return _shift(setup, alpha, alpha_ddot)


def e_ps(setup: Setup, t, use_shift: bool = True) -> PsEnergyBreakdown:
    """Energy of the ground dynamical mode; ``use_shift=False`` drops f(t)."""
    spec, m = setup.transport, setup.ion.mass
    alpha, alpha_dot, alpha_ddot, _ = derivatives(spec.polynomial, spec, t)
    shift = _shift(setup, alpha, alpha_ddot) if use_shift else np.zeros_like(alpha)
    return PsEnergyBreakdown(
        zero_point=0.5 * HBAR * setup.trap.omega,
        kinetic=0.5 * m * alpha_dot**2,
        tilt=-m * alpha_ddot * alpha,
        shift=shift,
    )


def p_ps(setup: Setup, t):
    """dE_PS/dt = m (A + B omega^2) including the shift f(t)."""
    geom, spec = setup.geometry, setup.transport
    c2, d = geom.width_c**2, geom.spacing_d
    alpha, v, acc, jerk = derivatives(spec.polynomial, spec, t)
    den = _guarded_denominator(setup, alpha)
    lever = d - 2.0 * alpha
    A = v * acc - c2 * lever**2 * v * acc / den**2 - c2 * (-2.0 * v * acc + lever * jerk) / den
    B = c2 * c2 * (-d * v + 2.0 * alpha * v) / den**2
    return setup.ion.mass * (A + B * setup.trap.omega**2)


def p_ps_f0(setup: Setup, t):
    """dE_PS/dt with f = 0, i.e. -m alpha alpha'''."""
    spec = setup.transport
    alpha, _, _, jerk = derivatives(spec.polynomial, spec, t)
    return -setup.ion.mass * alpha * jerk


def integrate_abs(power, t0, t1, rel_tol=CONSUMPTION_RTOL, max_panels=20000) -> QuadratureResult:
    """Integral of |power| with sign changes located first and used as panel edges."""
    kinks = sign_change_roots(power, t0, t1)
    return integrate(lambda t: np.abs(power(t)), t0, t1, rel_tol=rel_tol, breakpoints=kinks,
                     max_panels=max_panels)


def e_ps_consumption(setup: Setup, use_shift: bool = True, rel_tol: float = CONSUMPTION_RTOL,
                     max_panels: int = 20000) -> float:
    """Integral over the protocol of |P_PS| (or of |P_PS| with f = 0)."""
    power = (lambda t: p_ps(setup, t)) if use_shift else (lambda t: p_ps_f0(setup, t))
    return integrate_abs(power, 0.0, setup.duration, rel_tol=rel_tol, max_panels=max_panels).value


def p_ps_peak(ion, spec) -> float:
    """Boundary-time PS power 60 d^2 m / t_f^3 of the quintic protocol."""
    return 60.0 * spec.distance_d**2 * ion.mass / spec.duration_tf**3
