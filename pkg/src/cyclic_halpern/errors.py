"""Exception types raised across the package."""


class CyclicHalpernError(Exception):
    """Base class for all package errors."""


class InvalidInputError(CyclicHalpernError, ValueError):
    """An argument is outside the documented domain."""


class DomainError(CyclicHalpernError, ValueError):
    """A point lies outside the admissible domain of a map or geodesic."""


class GeodesicRangeError(DomainError):
    """Two points are too far apart (or antipodal) for the chosen bicombing."""


class InvalidQueryError(InvalidInputError):
    """A rate query violates its preconditions (e.g. ``delta >= 1``)."""


class BudgetExceededError(CyclicHalpernError, RuntimeError):
    """An index needed for a check exceeds the configured budget."""


class ModulusInvalidError(CyclicHalpernError, RuntimeError):
    """A supplied modulus failed validation on the required prefix."""


class BoundViolationError(CyclicHalpernError, RuntimeError):
    """An iterate left the certified ball ``d(x_n, u) <= M``.

    Attributes
    ----------
    n : int
        First index at which the bound fails.
    value : float
        The offending distance.
    """

    def __init__(self, message, n=None, value=None):
        super().__init__(message)
        self.n = n
        self.value = value


class ConfigError(CyclicHalpernError, ValueError):
    """Malformed experiment configuration."""
