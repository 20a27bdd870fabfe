"""Polynomial transport functions alpha(t) with shortcut boundary conditions.

A transport function is stored as dimensionless coefficients a_j in units of
the transport distance d, so that

    alpha(t) = d * sum_j a_j (t / t_f)**j.

At t = 0 the position, velocity and acceleration vanish; at t = t_f the
position equals ``displacement * d`` while velocity and acceleration vanish.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError

MAX_ORDER = 3
_BC_TOL = 1e-12
# Permitted overshoot of t beyond [0, t_f], relative to t_f, to absorb rounding.
_T_SLACK = 1e-12


@dataclass(frozen=True)
class TransportPolynomial:
    coefficients: tuple[float, ...]
    displacement: float = 1.0

    def __post_init__(self):
        coeffs = tuple(float(x) for x in self.coefficients)
        if len(coeffs) < 3:
            raise ContractError("a transport polynomial needs at least three coefficients")
        if not all(np.isfinite(coeffs)):
            raise ContractError("transport coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)
        a = np.asarray(coeffs)
        j = np.arange(a.size)
        scale = max(1.0, float(np.sum(np.abs(a) * j * j)))
        if np.any(np.abs(a[:3]) > _BC_TOL * scale):
            raise ContractError("a0, a1 and a2 must vanish (rest at t = 0)")
        checks = {
            "sum a_j = displacement": np.sum(a) - self.displacement,
            "sum j a_j = 0": np.sum(j * a),
            "sum j(j-1) a_j = 0": np.sum(j * (j - 1) * a),
        }
        for name, residual in checks.items():
            if abs(residual) > _BC_TOL * scale:
                raise ContractError(f"boundary condition violated at t_f: {name} (residual {residual:.3e})")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @classmethod
    def hold(cls) -> "TransportPolynomial":
        """Static trap: alpha(t) = 0 throughout."""
        return cls((0.0, 0.0, 0.0, 0.0, 0.0, 0.0), displacement=0.0)


def make_quintic() -> TransportPolynomial:
    return TransportPolynomial((0.0, 0.0, 0.0, 10.0, -15.0, 6.0))


# Exact inverse of the boundary-condition matrix
# [[1, 1, 1], [3, 4, 5], [6, 12, 20]] acting on (a3, a4, a5).
_SEPTIC_INVERSE = np.array([[10.0, -4.0, 0.5], [-15.0, 7.0, -1.0], [6.0, -3.0, 0.5]])


def make_septic(a6: float, a7: float) -> TransportPolynomial:
    """Seventh-degree transport function with free coefficients ``a6``, ``a7``.

    Both are in units of the transport distance; ``a3..a5`` are fixed by the
    boundary conditions.  ``make_septic(0, 0)`` is the quintic.
    """
    rhs = np.array([1.0 - a6 - a7, -6.0 * a6 - 7.0 * a7, -30.0 * a6 - 42.0 * a7])
    a3, a4, a5 = (float(x) for x in _SEPTIC_INVERSE @ rhs)
    return TransportPolynomial((0.0, 0.0, 0.0, a3, a4, a5, float(a6), float(a7)))


def make_septic_si(a6_m: float, a7_m: float, distance: float) -> TransportPolynomial:
    """Septic transport function with the free coefficients given in metres."""
    return make_septic(a6_m / distance, a7_m / distance)


def septic_free_coefficients_si(poly: TransportPolynomial, distance: float) -> tuple[float, float]:
    """Inverse of :func:`make_septic_si`."""
    c = poly.coefficients + (0.0,) * max(0, 8 - len(poly.coefficients))
    return c[6] * distance, c[7] * distance


def _derivative_coefficients(coeffs, order):
    c = np.asarray(coeffs, dtype=float)
    for _ in range(order):
        c = c[1:] * np.arange(1, c.size)
    return c


def _horner(coeffs, s):
    result = np.zeros_like(s)
    for a in coeffs[::-1]:
        result = result * s + a
    return result


def evaluate(poly: TransportPolynomial, spec, t, order: int = 0):
    """d^order alpha / dt^order at time(s) ``t`` in SI units.

    ``spec`` supplies ``duration_tf`` and ``distance_d``.  Accepts scalars or
    arrays; times outside [0, t_f] raise :class:`DomainError`.
    """
    if order not in range(MAX_ORDER + 1):
        raise ContractError(f"derivative order must be 0..{MAX_ORDER}, got {order!r}")
    tf = spec.duration_tf
    t_arr = np.asarray(t, dtype=float)
    slack = _T_SLACK * tf
    if np.any(t_arr < -slack) or np.any(t_arr > tf + slack) or np.any(~np.isfinite(t_arr)):
        raise DomainError(f"time outside the protocol interval [0, {tf:g}] s")
    s = t_arr / tf
    c = _derivative_coefficients(poly.coefficients, order)
    value = spec.distance_d * _horner(c, s) / tf**order
    return value if value.ndim else float(value)


def derivatives(poly: TransportPolynomial, spec, t):
    """alpha and its first three time derivatives, as a 4-tuple."""
    return tuple(evaluate(poly, spec, t, k) for k in range(MAX_ORDER + 1))
