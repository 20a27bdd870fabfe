"""Gaussian segment potentials and the voltages that synthesize the moving,
force-compensated harmonic trap."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, GeometryDegenerateError
from .model import Setup, TrapGeometry
from .trajectory import derivatives, evaluate

_DEGENERACY_RTOL = 1e-12


@dataclass(frozen=True)
class VoltagePair:
    U1: np.ndarray | float
    U2: np.ndarray | float
    U1_rate: np.ndarray | float
    U2_rate: np.ndarray | float

    def __post_init__(self):
        for name in ("U1", "U2", "U1_rate", "U2_rate"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise GeometryDegenerateError(f"{name} is not finite")

    @classmethod
    def constant(cls, U1: float, U2: float) -> "VoltagePair":
        return cls(U1, U2, 0.0, 0.0)


def _gaussian_derivatives(geom: TrapGeometry, center: float, x):
    """phi, phi', phi'', phi''' of one segment at ``x``."""
    c2 = geom.width_c**2
    u = np.asarray(x, dtype=float) - center
    g = geom.amplitude_a * np.exp(-u * u / (2.0 * c2))
    return (
        g,
        -u / c2 * g,
        (u * u - c2) / (c2 * c2) * g,
        (3.0 * c2 * u - u**3) / (c2**3) * g,
    )


def phi(geom: TrapGeometry, segment: int, x, order: int = 0):
    """Electrostatic potential of ``segment`` (1 or 2) or its spatial derivative."""
    if segment not in (1, 2):
        raise ContractError(f"segment must be 1 or 2, got {segment!r}")
    if order not in (0, 1, 2):
        raise ContractError(f"order must be 0, 1 or 2, got {order!r}")
    value = _gaussian_derivatives(geom, geom.centers[segment - 1], x)[order]
    return value if np.ndim(value) else float(value)


def _solve(setup: Setup, t, compensate: bool):
    geom, ion, trap, _, spec = setup
    alpha, alpha_dot, alpha_ddot, alpha_dddot = derivatives(spec.polynomial, spec, t)
    if not compensate:
        alpha_ddot = np.zeros_like(alpha_ddot)
        alpha_dddot = np.zeros_like(alpha_dddot)
    if np.any(geom.guard(alpha) <= 0):
        raise GeometryDegenerateError("harmonic-solvability guard violated along the trajectory")
    p1 = _gaussian_derivatives(geom, 0.0, alpha)
    p2 = _gaussian_derivatives(geom, geom.spacing_d, alpha)

    den = p2[2] * p1[1] - p2[1] * p1[2]
    scale = np.abs(p2[2] * p1[1]) + np.abs(p2[1] * p1[2])
    if np.any(np.abs(den) <= _DEGENERACY_RTOL * scale):
        raise GeometryDegenerateError("segment potentials are linearly dependent at the trap centre")
    den_x = p2[3] * p1[1] - p2[1] * p1[3]

    m, q, w2 = ion.mass, ion.charge, trap.omega**2
    # U_i = (-1)^i m (w^2 phi_j' + alpha'' phi_j'') / (q * den), j != i
    num1 = -m * (w2 * p2[1] + alpha_ddot * p2[2])
    num2 = m * (w2 * p1[1] + alpha_ddot * p1[2])
    num1_x = -m * (w2 * p2[2] + alpha_ddot * p2[3])
    num2_x = m * (w2 * p1[2] + alpha_ddot * p1[3])

    U1 = num1 / (q * den)
    U2 = num2 / (q * den)
    # dU/dt = dU/dalpha * alpha' + dU/dalpha'' * alpha'''
    dU1 = ((num1_x * den - num1 * den_x) / den**2 * alpha_dot - m * p2[2] / den * alpha_dddot) / q
    dU2 = ((num2_x * den - num2 * den_x) / den**2 * alpha_dot + m * p1[2] / den * alpha_dddot) / q
    return U1, U2, dU1, dU2


def voltages(setup: Setup, t, compensate: bool = True) -> VoltagePair:
    """Segment voltages and their exact time derivatives at time(s) ``t``.

    The voltages place the curvature m*omega^2 and slope -m*alpha'' of the
    axial potential at alpha(t).  With ``compensate=False`` the slope is
    zeroed, i.e. the trap follows alpha(t) without the inertial correction.
    """
    U1, U2, dU1, dU2 = _solve(setup, t, compensate)
    if np.ndim(U1) == 0:
        U1, U2, dU1, dU2 = (float(v) for v in (U1, U2, dU1, dU2))
    return VoltagePair(U1, U2, dU1, dU2)


def voltages_clamped(setup: Setup, t, compensate: bool = True) -> VoltagePair:
    """Like :func:`voltages` but holds the boundary values outside [0, t_f]."""
    tf = setup.duration
    return voltages(setup, np.clip(t, 0.0, tf), compensate)


def total_potential(geom: TrapGeometry, ion, pair: VoltagePair, x, order: int = 0):
    """q (U1 phi1(x) + U2 phi2(x)), or its spatial derivative of given order."""
    if order not in (0, 1, 2):
        raise ContractError(f"order must be 0, 1 or 2, got {order!r}")
    value = ion.charge * (pair.U1 * phi(geom, 1, x, order) + pair.U2 * phi(geom, 2, x, order))
    return value if np.ndim(value) else float(value)


def trap_minimum(setup: Setup, t):
    """Position alpha + alpha''/omega^2 of the minimum of the compensated potential."""
    spec = setup.transport
    value = evaluate(spec.polynomial, spec, t, 0) + evaluate(spec.polynomial, spec, t, 2) / setup.trap.omega**2
    return value
