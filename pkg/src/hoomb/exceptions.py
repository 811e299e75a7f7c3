"""Exception hierarchy shared by the optimizer, the models and the CLI."""


class HoombError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(HoombError, ValueError):
    """An optimizer, model or run configuration violates its constraints."""


class DegenerateRegionError(HoombError, ValueError):
    """A hyperrectangle has a non-positive width along some dimension."""


class UnknownModelError(HoombError, LookupError):
    """No benchmark is registered under the requested name."""


class PointOutsideDomainError(HoombError, ValueError):
    """A query point has the wrong dimension or lies outside the search space."""


class SimulationFault(HoombError, RuntimeError):
    """A simulator produced a non-finite state or reward.

    ``step`` is the transition index at which the fault was detected, when known.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ObjectiveError(HoombError, RuntimeError):
    """The objective failed while the optimizer was sampling a batch."""

    def __init__(self, message, batch_index=None, instance=None):
        super().__init__(message)
        self.batch_index = batch_index
        self.instance = instance


class NumericalFailureError(HoombError, ArithmeticError):
    """A linear-algebra step hit a singular or ill-conditioned matrix."""


class ContractViolation(HoombError, ValueError):
    """A caller broke an operation's precondition (e.g. wrong batch length)."""
