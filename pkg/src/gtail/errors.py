"""Semantic exception hierarchy for gtail.

Estimation routines raise instead of returning sentinel values; callers that
need the "-" table convention (negative variance estimates) or per-point
degeneracy markers catch the specific classes below.
"""


class GtailError(Exception):
    """Base class for all gtail-specific errors."""


class DomainError(GtailError, ValueError):
    """An argument is outside the mathematical domain of the function."""


class ConvergenceError(GtailError, RuntimeError):
    """An iterative scheme failed to reach its tolerance.

    Attributes
    ----------
    achieved : float or None
        Best tolerance reached before giving up, when known.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class QuadratureError(ConvergenceError):
    """Adaptive quadrature could not meet the requested tolerance."""


class SampleTooSmall(GtailError, ValueError):
    """The sample has too few observations for the requested estimator."""


class NoExceedance(GtailError, RuntimeError):
    """No pair sum exceeds the threshold d; the estimate is undefined."""


class NegativeVariance(GtailError, RuntimeError):
    """A variance estimator produced a negative value.

    Noether-type estimators can do this in small samples.  The offending
    value is preserved so callers can report it.
    """

    def __init__(self, value, method=None):
        super().__init__(f"variance estimate is negative ({value!r})")
        self.value = value
        self.method = method


class DegenerateLeaveOneOut(GtailError, RuntimeError):
    """Some leave-one-out subsample has no exceeding pair (jackknife)."""


class AllResamplesDegenerate(GtailError, RuntimeError):
    """Every bootstrap resample lacked an exceeding pair."""


class OutOfRange(GtailError, ValueError):
    """A value lies outside the invertible range of a monotone map."""


class EmptyAfterFilter(GtailError, ValueError):
    """Fewer than two usable observations remain after ingestion filters."""
