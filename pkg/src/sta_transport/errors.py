"""Exception hierarchy shared by all modules."""


class TransportError(Exception):
    """Base class for every error raised by this package."""


class ContractError(TransportError, ValueError):
    """An argument violates an invariant or precondition."""


class DomainError(ContractError):
    """A time or position lies outside the domain where a quantity is defined."""


class GeometryDegenerateError(TransportError):
    """The two-segment voltage system cannot be solved at this trap position."""


class NonConvergenceError(TransportError):
    """An adaptive numerical routine exhausted its budget.

    ``best_estimate`` carries whatever the routine had when it gave up.
    """

    def __init__(self, message, best_estimate=None, error_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class StiffnessError(TransportError):
    """ODE step size underflowed."""


class OptimizationError(TransportError):
    """No multi-start run converged."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class BracketError(TransportError):
    """The search bracket does not isolate a single minimum."""


class EscapeError(TransportError):
    """The ion left the trapping region during a simulation."""
