"""Energy accounting for shortcut-to-adiabaticity transport of a trapped ion.

A single ion is moved between two Gaussian electrode segments by a
polynomial transport function with an inertial compensating force.  The
package synthesizes the electrode voltages, evaluates the energy budget of
the ion and of the RC filter circuit, optimizes septic transport functions
and checks the protocol against classical trajectories.
"""
from .errors import (
    BracketError, ContractError, DomainError, EscapeError, GeometryDegenerateError,
    NonConvergenceError, OptimizationError, StiffnessError, TransportError,
)
from .model import (
    FilterCircuit, IonSpecies, PowerTrace, ReferenceTrap, Setup, TrapGeometry, TransportSpec,
    calcium40, default_parameters, table_parameters,
)
from .trajectory import TransportPolynomial, derivatives, evaluate, make_quintic, make_septic, make_septic_si
from .electrostatics import VoltagePair, phi, total_potential, trap_minimum, voltages
from .ps_energetics import e_ps, e_ps_consumption, f_shift, p_ps, p_ps_f0, p_ps_peak
from .cs_energetics import (
    cs_peak_closed_form, cs_power, e_cs_consumption, energy_with_eta, optimal_duration, total_consumption,
)
from .optimizer import Objective, evaluate_table, optimize
from .dynamics_oracle import simulate_full, simulate_quadratic
from .powertrace import sample_trace

__version__ = "0.1.0"
