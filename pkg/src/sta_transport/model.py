"""Physical parameters and shared domain types (SI units throughout)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants

from .errors import ContractError
from .trajectory import TransportPolynomial, make_quintic

HBAR = constants.hbar
ELEMENTARY_CHARGE = constants.e
ATOMIC_MASS = constants.atomic_mass

# Resistance at which the optimization-table control energies are evaluated.
# The power figures use DEFAULT_RESISTANCE.
DEFAULT_RESISTANCE = 30.0
TABLE_RESISTANCE = 3.0


def _require(condition, message):
    if not condition:
        raise ContractError(message)


@dataclass(frozen=True)
class TrapGeometry:
    """Two Gaussian segment potentials a*exp(-(x - b_i)^2 / (2 c^2)), b = (0, d)."""

    amplitude_a: float
    width_c: float
    spacing_d: float

    def __post_init__(self):
        _require(self.amplitude_a > 0, f"amplitude_a must be positive, got {self.amplitude_a!r}")
        _require(self.width_c > 0, f"width_c must be positive, got {self.width_c!r}")
        _require(self.spacing_d > 0, f"spacing_d must be positive, got {self.spacing_d!r}")
        # c^2 - d*x + x^2 is smallest at x = d/2.
        _require(
            self.width_c > self.spacing_d / 2,
            f"harmonic-solvability guard violated: width_c={self.width_c:g} m must exceed "
            f"spacing_d/2={self.spacing_d / 2:g} m",
        )

    @property
    def centers(self) -> tuple[float, float]:
        return (0.0, self.spacing_d)

    def guard(self, x):
        """c^2 - d*x + x^2; positive wherever the voltage system is solvable."""
        return self.width_c**2 - self.spacing_d * x + x * x


@dataclass(frozen=True)
class IonSpecies:
    mass: float
    charge: float

    def __post_init__(self):
        _require(self.mass > 0, f"ion mass must be positive, got {self.mass!r}")
        _require(self.charge != 0, "ion charge must be non-zero")


@dataclass(frozen=True)
class ReferenceTrap:
    omega: float

    def __post_init__(self):
        _require(self.omega > 0, f"trap frequency must be positive, got {self.omega!r}")


@dataclass(frozen=True)
class FilterCircuit:
    resistance_R: float
    capacitance_C: float

    def __post_init__(self):
        _require(self.resistance_R >= 0, f"resistance must be non-negative, got {self.resistance_R!r}")
        _require(self.capacitance_C > 0, f"capacitance must be positive, got {self.capacitance_C!r}")


@dataclass(frozen=True)
class TransportSpec:
    duration_tf: float
    distance_d: float
    polynomial: TransportPolynomial = field(default_factory=make_quintic)

    def __post_init__(self):
        _require(self.duration_tf > 0, f"duration must be positive, got {self.duration_tf!r}")
        _require(self.distance_d > 0, f"distance must be positive, got {self.distance_d!r}")
        _require(isinstance(self.polynomial, TransportPolynomial), "polynomial must be a TransportPolynomial")


@dataclass(frozen=True)
class Setup:
    """Everything needed to describe one transport protocol.

    Unpacks as ``geometry, ion, trap, filter, transport``.
    """

    geometry: TrapGeometry
    ion: IonSpecies
    trap: ReferenceTrap
    filter: FilterCircuit
    transport: TransportSpec

    def __post_init__(self):
        _require(
            math.isclose(self.transport.distance_d, self.geometry.spacing_d, rel_tol=1e-12),
            "transport distance must equal the segment spacing",
        )

    def __iter__(self):
        return iter((self.geometry, self.ion, self.trap, self.filter, self.transport))

    @property
    def polynomial(self) -> TransportPolynomial:
        return self.transport.polynomial

    @property
    def duration(self) -> float:
        return self.transport.duration_tf

    def with_duration(self, duration_tf: float) -> "Setup":
        return replace(self, transport=replace(self.transport, duration_tf=duration_tf))

    def with_polynomial(self, polynomial: TransportPolynomial) -> "Setup":
        return replace(self, transport=replace(self.transport, polynomial=polynomial))

    def with_filter(self, resistance_R=None, capacitance_C=None) -> "Setup":
        f = self.filter
        return replace(
            self,
            filter=FilterCircuit(
                f.resistance_R if resistance_R is None else resistance_R,
                f.capacitance_C if capacitance_C is None else capacitance_C,
            ),
        )

    def with_geometry(self, **changes) -> "Setup":
        geometry = replace(self.geometry, **changes)
        transport = replace(self.transport, distance_d=geometry.spacing_d)
        return replace(self, geometry=geometry, transport=transport)


def calcium40() -> IonSpecies:
    return IonSpecies(mass=40 * ATOMIC_MASS, charge=ELEMENTARY_CHARGE)


def default_parameters() -> Setup:
    """40Ca+ shuttled 280 um in 0.418 us between Gaussian segments, R = 30 Ohm, C = 1 nF."""
    d = 280e-6
    return Setup(
        geometry=TrapGeometry(amplitude_a=0.2, width_c=250e-6, spacing_d=d),
        ion=calcium40(),
        trap=ReferenceTrap(omega=2 * math.pi * 1.3e6),
        filter=FilterCircuit(resistance_R=DEFAULT_RESISTANCE, capacitance_C=1e-9),
        transport=TransportSpec(duration_tf=0.418e-6, distance_d=d, polynomial=make_quintic()),
    )


def table_parameters() -> Setup:
    """Defaults with the filter resistance used for the energy-optimization table."""
    return default_parameters().with_filter(resistance_R=TABLE_RESISTANCE)


POWER_TRACE_COLUMNS = (
    "U1", "U2", "U1_rate", "U2_rate",
    "P_C1", "P_C2", "P_R1", "P_R2", "P_CS_signed", "P_CS_rectified",
    "P_PS", "P_PS_f0", "E_PS", "E_PS_f0", "f_shift",
)

COLUMN_UNITS = {
    "U1": "V", "U2": "V", "U1_rate": "Vps", "U2_rate": "Vps",
    "P_C1": "W", "P_C2": "W", "P_R1": "W", "P_R2": "W",
    "P_CS_signed": "W", "P_CS_rectified": "W",
    "P_PS": "W", "P_PS_f0": "W", "E_PS": "J", "E_PS_f0": "J", "f_shift": "J",
}


@dataclass(frozen=True)
class PowerTrace:
    times: np.ndarray
    columns: dict

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        _require(times.ndim == 1 and times.size >= 2, "a trace needs at least two samples")
        _require(bool(np.all(np.diff(times) > 0)), "trace times must be strictly increasing")
        cols = {}
        for key, values in self.columns.items():
            arr = np.asarray(values, dtype=float)
            _require(arr.shape == times.shape, f"column {key!r} has {arr.size} samples, expected {times.size}")
            arr.setflags(write=False)
            cols[key] = arr
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "columns", cols)

    def __getitem__(self, key):
        return self.columns[key]

    def __len__(self):
        return self.times.size
