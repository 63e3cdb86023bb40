"""
Exceptions raised by whittle_graph.

Every error derives from WhittleGraphError and from the closest builtin
exception, so callers can catch either.
"""

from typing import Optional


class WhittleGraphError(Exception):
    """Base class for all package errors."""


class InvalidArgument(WhittleGraphError, ValueError):
    """An argument is outside its documented range."""


class NonFiniteInput(WhittleGraphError, ValueError):
    """A matrix or vector contains NaN or infinite entries."""


class NotHermitian(WhittleGraphError, ValueError):
    """A matrix is not Hermitian within the ingestion tolerance."""


class ShapeMismatch(WhittleGraphError, ValueError):
    """Dimensions of two inputs do not agree."""


class EmptyInput(WhittleGraphError, ValueError):
    """An average was requested over an empty collection."""


class OutOfDomain(WhittleGraphError, ValueError):
    """A scalar argument lies outside the domain of a formula."""


class InvalidModel(WhittleGraphError, ValueError):
    """Hawkes parameters violate a structural requirement."""


class NotPositiveDefinite(WhittleGraphError, ArithmeticError):
    """A matrix required to be positive definite is not."""


class NotStationary(WhittleGraphError, ArithmeticError):
    """The Hawkes branching matrix has spectral radius >= 1."""


class DegenerateChannel(WhittleGraphError, ArithmeticError):
    """A channel has zero power, so normalised quantities are undefined."""


class ConvergenceError(WhittleGraphError, ArithmeticError):
    """An iterative solver stopped before meeting its tolerances."""


class BudgetExceeded(WhittleGraphError, RuntimeError):
    """A simulation would generate more events than the configured cap."""


class _LocatedError(WhittleGraphError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ParseError(_LocatedError):
    """A data file row could not be parsed."""


class ValidationError(_LocatedError):
    """A data file parsed but violates an invariant."""


# Failures reported by the CLI with exit code 3.
NUMERICAL_ERRORS = (
    NotPositiveDefinite,
    NotStationary,
    DegenerateChannel,
    ConvergenceError,
    BudgetExceeded,
    InvalidModel,
)
