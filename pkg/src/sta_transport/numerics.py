"""Numerical kernels: adaptive quadrature, ODE integration, 2-D minimization,
golden-section search and log-log slope fitting."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ContractError, DomainError, NonConvergenceError, OptimizationError, StiffnessError

logger = logging.getLogger(__name__)

# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS_W = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
for _i, _w in zip((1, 3, 5, 7), _WG):
    _GAUSS_W[_i] = _w
    _GAUSS_W[14 - _i] = _w

KRONROD_DEGREE = 22


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ContractError("error estimate must be non-negative")


def _gk_panels(f, left, right):
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(y)):
        raise NonConvergenceError("integrand is not finite on the integration interval")
    kronrod = half * (y @ _KRONROD_W)
    gauss = half * (y @ _GAUSS_W)
    return kronrod, np.abs(kronrod - gauss)


def integrate(f: Callable, t0: float, t1: float, rel_tol: float = 1e-8,
              breakpoints: Sequence[float] = (), abs_tol: float = 0.0,
              max_panels: int = 20000, vectorized: bool = True) -> QuadratureResult:
    """Adaptive Gauss-Kronrod (G7/K15) integral of ``f`` over [t0, t1].

    ``f`` must accept a 1-D array of times unless ``vectorized=False``.
    Breakpoints inside the interval become panel boundaries, so kinks placed
    there cost nothing.  Panels whose error exceeds their share of the target
    are bisected until ``error_estimate <= max(rel_tol*|value|, abs_tol)``.
    """
    if not t0 < t1:
        raise ContractError(f"need t0 < t1, got [{t0!r}, {t1!r}]")
    if not rel_tol > 0:
        raise ContractError("rel_tol must be positive")
    if not vectorized:
        f = np.vectorize(f, otypes=[float])

    edges = np.unique(np.concatenate([[t0, t1], [b for b in breakpoints if t0 < b < t1]]))
    left, right = edges[:-1], edges[1:]
    values, errors = _gk_panels(f, left, right)
    evaluations = 15 * left.size
    length = t1 - t0

    while True:
        total = float(np.sum(values))
        err = float(np.sum(errors))
        target = max(rel_tol * abs(total), abs_tol)
        if err <= target:
            return QuadratureResult(total, err, evaluations)
        if left.size >= max_panels:
            raise NonConvergenceError(
                f"quadrature budget of {max_panels} panels exhausted: value {total:.6e}, "
                f"error estimate {err:.3e}, target {target:.3e}",
                best_estimate=total, error_estimate=err,
            )
        share = target * (right - left) / length
        split = errors > share
        if not np.any(split):
            split = errors >= errors.max()
        mid = 0.5 * (left[split] + right[split])
        new_left = np.concatenate([left[split], mid])
        new_right = np.concatenate([mid, right[split]])
        new_values, new_errors = _gk_panels(f, new_left, new_right)
        evaluations += 15 * new_left.size
        keep = ~split
        left = np.concatenate([left[keep], new_left])
        right = np.concatenate([right[keep], new_right])
        values = np.concatenate([values[keep], new_values])
        errors = np.concatenate([errors[keep], new_errors])
        if np.any(right - left <= 8 * np.finfo(float).eps * np.maximum(abs(t0), abs(t1))):
            raise NonConvergenceError(
                "quadrature panels shrank to machine resolution",
                best_estimate=float(np.sum(values)), error_estimate=float(np.sum(errors)),
            )


def sign_change_roots(f: Callable, t0: float, t1: float, samples: int = 257,
                      rel_xtol: float = 1e-13) -> np.ndarray:
    """Roots of ``f`` where it changes sign between grid samples.

    All brackets are refined together by vectorized bisection.  Tangential
    zeros are ignored; they do not produce kinks in |f|.
    """
    grid = np.linspace(t0, t1, samples)
    y = np.asarray(f(grid), dtype=float)
    sign = np.sign(y)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if idx.size == 0:
        return np.empty(0)
    lo, hi = grid[idx].copy(), grid[idx + 1].copy()
    flo = y[idx].copy()
    xtol = rel_xtol * (t1 - t0)
    for _ in range(200):
        if np.all(hi - lo <= xtol):
            break
        mid = 0.5 * (lo + hi)
        fm = np.asarray(f(mid), dtype=float)
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


@dataclass
class OdeSolution:
    t: np.ndarray
    y: np.ndarray
    evaluations: int
    dense: Callable = field(repr=False)
    # set when a terminal event stopped the integration early
    terminated: bool = False


def ode_solve(rhs: Callable, y0, t_span, rel_tol: float = 1e-10, abs_tol: float | None = None,
              t_eval=None, events=None, max_step: float = np.inf) -> OdeSolution:
    """Adaptive Dormand-Prince 8(5,3) integration with dense output.

    ``abs_tol`` defaults to ``rel_tol``; states are assumed O(1) in size.
    Terminal ``events`` stop the integration and set ``terminated``.
    """
    abs_tol = rel_tol if abs_tol is None else abs_tol
    sol = solve_ivp(rhs, t_span, np.asarray(y0, dtype=float), method="DOP853", rtol=rel_tol,
                    atol=abs_tol, t_eval=t_eval, events=events, dense_output=True, max_step=max_step)
    if sol.status == -1:
        raise StiffnessError(f"ODE integration failed at t={sol.t[-1]:.6g}: {sol.message}")
    return OdeSolution(t=sol.t, y=sol.y, evaluations=int(sol.nfev), dense=sol.sol,
                       terminated=sol.status == 1)


@dataclass(frozen=True)
class MinimizeResult:
    point: tuple[float, float]
    value: float
    evaluations: int
    converged_starts: int
    trace: list = field(default_factory=list, repr=False, compare=False)


def _nelder_mead(objective, start, step, tolerance, max_iter):
    def fval(x):
        v = objective(x)
        return math.inf if v is None or not np.isfinite(v) else float(v)

    x0 = np.asarray(start, dtype=float)
    simplex = [x0, x0 + np.array([step[0], 0.0]), x0 + np.array([0.0, step[1]])]
    values = [fval(x) for x in simplex]
    evals = 3
    for iteration in range(max_iter):
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        best, worst = values[0], values[-1]
        if not np.isfinite(best):
            break
        diameter = max(np.max(np.abs(v - simplex[0])) for v in simplex[1:])
        spread = worst - best
        if np.isfinite(best) and diameter < tolerance and (
            spread <= tolerance * abs(best) or spread == 0.0
        ):
            return simplex[0], best, evals, True
        centroid = 0.5 * (simplex[0] + simplex[1])
        xr = centroid + (centroid - simplex[-1])
        fr = fval(xr)
        evals += 1
        if fr < values[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = fval(xe)
            evals += 1
            simplex[-1], values[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < values[1]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = centroid + 0.5 * (xr - centroid)
        else:
            xc = centroid + 0.5 * (simplex[-1] - centroid)
        fc = fval(xc)
        evals += 1
        if fc < min(fr, values[-1]):
            simplex[-1], values[-1] = xc, fc
            continue
        for i in (1, 2):
            simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
            values[i] = fval(simplex[i])
        evals += 2
    i = int(np.argmin(values))
    return simplex[i], values[i], evals, False


def minimize_2d(objective: Callable, starts, tolerance: float = 1e-8, step=None,
                max_iter: int = 2000) -> MinimizeResult:
    """Multi-start Nelder-Mead over two real parameters.

    A start counts as converged when the simplex diameter falls below
    ``tolerance`` and the value spread below ``tolerance * |value|``.  The best
    converged result wins; ties go to the lexicographically smaller point.
    """
    starts = [tuple(float(v) for v in s) for s in starts]
    if not starts:
        raise ContractError("minimize_2d needs at least one start point")
    trace = []
    total_evals = 0
    best = None
    for s in starts:
        st = step if step is not None else tuple(0.1 * max(1.0, abs(v)) for v in s)
        st = np.broadcast_to(np.asarray(st, dtype=float), (2,))
        x, fx, evals, ok = _nelder_mead(objective, s, st, tolerance, max_iter)
        total_evals += evals
        trace.append({"start": s, "point": tuple(x), "value": fx, "converged": ok, "evaluations": evals})
        if not ok:
            logger.debug("Nelder-Mead start %s did not converge (best %.6g)", s, fx)
            continue
        key = (fx, tuple(x))
        if best is None or key < best:
            best = key
    converged = sum(1 for r in trace if r["converged"])
    if best is None:
        raise OptimizationError(f"none of {len(starts)} Nelder-Mead starts converged", trace)
    return MinimizeResult(point=best[1], value=best[0], evaluations=total_evals,
                          converged_starts=converged, trace=trace)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable, a: float, b: float, tol: float) -> tuple[float, float]:
    """Minimum of a unimodal ``f`` on [a, b] to absolute tolerance ``tol``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 3:
        raise ContractError("loglog_slope needs two equal-length arrays of at least 3 points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("log-log fit needs strictly positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
