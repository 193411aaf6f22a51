"""Exception hierarchy shared by every module."""


class IsingError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(IsingError, ValueError):
    """Arguments outside the mathematical domain of an operation."""


class CapExceededError(IsingError):
    """An exact enumeration would exceed its configured size cap."""


class PreconditionError(IsingError, ValueError):
    """A documented precondition of an operation does not hold."""


class EmptySupportError(IsingError):
    """A requested law has no configuration with positive weight."""


class DegenerateError(IsingError, ZeroDivisionError):
    """A ratio has a vanishing denominator."""


class ConvergenceError(IsingError, RuntimeError):
    """An iterative numerical routine did not converge."""


class GraphFormatError(IsingError, ValueError):
    """A graph file could not be parsed."""
