"""Energy-optimal septic transport functions.

The two free coefficients (a6, a7) of the septic ansatz are searched in
metres, i.e. alpha(t) = sum_j a_j (t/t_f)^j with a_j in m.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .cs_energetics import e_cs_consumption
from .errors import ContractError, GeometryDegenerateError, NonConvergenceError
from .model import Setup
from .numerics import minimize_2d
from .ps_energetics import e_ps_consumption
from .trajectory import make_quintic, make_septic_si

logger = logging.getLogger(__name__)

DEFAULT_BOX = ((-0.05, 0.05), (-0.05, 0.05))
_BOX_PENALTY = 1e3


class Objective(str, Enum):
    E_CS = "e_cs"
    E_PS = "e_ps"
    E_PS_F0 = "e_ps_f0"


CONSUMPTIONS = (Objective.E_PS_F0, Objective.E_PS, Objective.E_CS)


def consumption(kind: Objective, setup: Setup, rel_tol: float = 1e-8, max_panels: int = 20000) -> float:
    kind = Objective(kind)
    if kind is Objective.E_CS:
        return e_cs_consumption(setup, rel_tol=rel_tol, max_panels=max_panels)
    return e_ps_consumption(setup, use_shift=kind is Objective.E_PS, rel_tol=rel_tol, max_panels=max_panels)


def all_consumptions(setup: Setup) -> dict:
    return {k.value: consumption(k, setup) for k in CONSUMPTIONS}


@dataclass(frozen=True)
class OptimizationResult:
    objective_kind: Objective
    a6: float
    a7: float
    objective_value: float
    cross_report: dict
    evaluations: int = 0
    converged_starts: int = 0
    trace: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if not self.objective_value > 0:
            raise ContractError("optimized consumption must be positive")

    def as_dict(self) -> dict:
        return {
            "objective": self.objective_kind.value,
            "a6_m": self.a6,
            "a7_m": self.a7,
            "objective_value_J": self.objective_value,
            "E_PS_f0_J": self.cross_report[Objective.E_PS_F0.value],
            "E_PS_J": self.cross_report[Objective.E_PS.value],
            "E_CS_J": self.cross_report[Objective.E_CS.value],
            "evaluations": self.evaluations,
            "converged_starts": self.converged_starts,
        }


def _start_grid(box, n):
    (x0, x1), (y0, y1) = box
    starts = [(float(x), float(y)) for x in np.linspace(x0, x1, n) for y in np.linspace(y0, y1, n)]
    if (0.0, 0.0) not in starts:
        starts.insert(0, (0.0, 0.0))
    return starts


def optimize(objective_kind, setup: Setup, search_box=DEFAULT_BOX, tolerance: float = 1e-6,
             grid: int = 5, max_panels: int = 2000) -> OptimizationResult:
    """Minimize one consumption over the septic free coefficients (a6, a7) in metres.

    Nelder-Mead runs from a ``grid`` x ``grid`` lattice over ``search_box``
    plus the origin.  Points outside the box are clamped and penalized.
    """
    kind = Objective(objective_kind)
    (x0, x1), (y0, y1) = search_box
    if not (x0 <= 0.0 <= x1 and y0 <= 0.0 <= y1):
        raise ContractError("the search box must contain the quintic (a6, a7) = (0, 0)")
    d = setup.geometry.spacing_d
    width = max(x1 - x0, y1 - y0)

    def evaluate(point):
        a6, a7 = point
        c6, c7 = min(max(a6, x0), x1), min(max(a7, y0), y1)
        outside = math.hypot(a6 - c6, a7 - c7)
        trial = setup.with_polynomial(make_septic_si(c6, c7, d))
        try:
            # small panel budget: pathological trial trajectories fail fast
            value = consumption(kind, trial, max_panels=max_panels)
        except (NonConvergenceError, GeometryDegenerateError):
            return math.inf
        return value * (1.0 + _BOX_PENALTY * outside / width)

    step = (0.05 * (x1 - x0), 0.05 * (y1 - y0))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        result = minimize_2d(evaluate, _start_grid(search_box, grid), tolerance=tolerance, step=step)
    a6, a7 = result.point
    best = setup.with_polynomial(make_septic_si(a6, a7, d))
    cross = all_consumptions(best)
    logger.info("optimized %s: a6=%.5f m, a7=%.5f m, value=%.6e J", kind.value, a6, a7, cross[kind.value])
    return OptimizationResult(kind, a6, a7, cross[kind.value], cross, result.evaluations,
                              result.converged_starts, result.trace)


TABLE_COLUMNS = ("non_optimized", "optimized_e_ps_f0", "optimized_e_ps", "optimized_e_cs")


@dataclass(frozen=True)
class ConsumptionTable:
    """Rows: consumptions E_PS_f0, E_PS, E_CS.  Columns: TABLE_COLUMNS."""

    cells: dict
    optima: dict

    def cell(self, row: str, column: str) -> float:
        return self.cells[column][row]

    def as_array(self) -> np.ndarray:
        return np.array([[self.cells[col][row.value] for col in TABLE_COLUMNS] for row in CONSUMPTIONS])

    def as_dict(self) -> dict:
        return {
            "columns": list(TABLE_COLUMNS),
            "rows": [k.value for k in CONSUMPTIONS],
            "cells_J": {col: dict(self.cells[col]) for col in TABLE_COLUMNS},
            "optima_m": {k: {"a6": r.a6, "a7": r.a7} for k, r in self.optima.items()},
        }


def evaluate_table(setup: Setup, **optimize_kwargs) -> ConsumptionTable:
    """All three consumptions for the quintic and for each single-objective optimum."""
    cells = {"non_optimized": all_consumptions(setup.with_polynomial(make_quintic()))}
    optima = {}
    for kind in CONSUMPTIONS:
        result = optimize(kind, setup, **optimize_kwargs)
        optima[kind.value] = result
        cells[f"optimized_{kind.value}"] = dict(result.cross_report)
    return ConsumptionTable(cells, optima)
