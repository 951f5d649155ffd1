"""Exception hierarchy shared by every module of the package."""


class RobbaError(Exception):
    """Base class for all errors raised by this package."""


class PrecisionError(RobbaError):
    """Not enough p-adic precision left to carry out an operation.

    ``deficit`` is the number of missing p-adic digits when known.
    """

    def __init__(self, message: str, deficit: float | None = None):
        super().__init__(message)
        self.deficit = deficit


class DomainError(RobbaError, ValueError):
    """Argument outside the domain of convergence or definition."""


class InvalidGaloisElement(DomainError):
    """A Galois index divisible by p."""


class BoundError(RobbaError):
    """A principal part or tail would exceed the configured bound."""


class DivisibilityError(RobbaError):
    """A series is not divisible by t (or T) at the tracked precision.

    ``degree`` and ``valuation`` locate the offending coefficient.
    """

    def __init__(self, message: str, degree: int | None = None, valuation: float | None = None):
        super().__init__(message)
        self.degree = degree
        self.valuation = valuation


class PropHCViolation(DivisibilityError):
    """P_Sen(nabla)(z) is not divisible by t: the module data is malformed."""


class SupportError(RobbaError, ValueError):
    """A measure or series is not supported where an operation requires."""


class NotAMeasure(RobbaError, ValueError):
    """A series with a principal part or an unbounded tail was given as a measure."""


class ConvergenceError(RobbaError):
    """An iterative evaluation did not stabilise within its budget.

    ``achieved`` is the best p-adic modulus (as an exponent) reached.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class ParseError(RobbaError, ValueError):
    """Malformed textual input; ``position`` is a character offset."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at position {position})")
        self.position = position
