"""Exception types shared across the package."""


class WCBumpError(Exception):
    """Base class for all package errors."""


class DomainError(WCBumpError, ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedVariantError(WCBumpError, TypeError):
    """The operation is not defined for this kernel or firing-rate variant."""


class QuadratureError(WCBumpError):
    """Adaptive quadrature did not converge.

    The last two estimates are kept so callers can judge how far off they were.
    """

    def __init__(self, message, previous, last):
        super().__init__(f"{message} (last estimates {previous!r}, {last!r})")
        self.previous = previous
        self.last = last


class AssumptionError(WCBumpError):
    """A hypothesis needed by the construction is violated."""


class PreconditionError(WCBumpError, ValueError):
    """A numerical precondition of an operation does not hold."""


class OrderViolationError(WCBumpError):
    """An iterate left the ordered interval it is supposed to live in."""

    def __init__(self, message, witness=None, excess=None):
        super().__init__(message)
        self.witness = witness
        self.excess = excess


class DivergenceError(WCBumpError):
    """The width iteration left the ordered interval (usually a bad step k)."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class NotABumpError(WCBumpError):
    """A constructed profile fails the bump criteria at ``witness``."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class BlowUpError(WCBumpError):
    """Time stepping produced non-finite values."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConfigError(WCBumpError):
    """An experiment configuration could not be parsed or validated."""
