"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CegioError(Exception):
    """Base class for all errors raised by this package."""


class ExprSyntaxError(CegioError, ValueError):
    """Raised when an objective string cannot be parsed."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class EvaluationError(CegioError, ArithmeticError):
    """Division by zero, square root of a negative number, or overflow."""


class GridError(CegioError, ValueError):
    """Invalid box or an empty fixed-point grid."""


class EncodingError(CegioError):
    """The objective cannot be compiled into an SMT-LIB2 query."""


class BackendError(CegioError):
    """The external solver could not be run or produced unreadable output."""


class CapExceededError(CegioError):
    """A grid or table is larger than the configured cap."""


class LowerBoundViolation(CegioError):
    """A counterexample scored below the caller-supplied lower bound."""


class BenchmarkNotFound(CegioError, KeyError):
    pass
