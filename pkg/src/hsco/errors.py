"""Exception hierarchy shared by all hsco modules."""


class HscoError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(HscoError):
    """Operands have inconsistent shapes."""


class NotSymmetric(HscoError):
    """A matrix required to be symmetric is not, beyond tolerance."""


class Singular(HscoError):
    """A linear system has no solution within tolerance."""


class SingularKKT(HscoError):
    """The assembled saddle-point system is numerically singular."""


class EmptyMatrix(HscoError):
    """A matrix with zero rows or columns where a nonempty one is required."""


class NonPositiveTau(HscoError):
    """The step-length parameter tau must be positive."""


class InfeasiblePoint(HscoError):
    """The point has more positive entries than the budget allows."""


class BadLabel(HscoError):
    """Labels must all be +1 or -1."""


class MissingBiasColumn(HscoError):
    """Sample matrix lacks the trailing constant-one feature."""


class RankDeficientActiveSet(HscoError):
    """The active constraint rows are not full row rank."""


class DirectionFailure(HscoError):
    """Newton direction solve failed after all damping retries."""


class MalformedLine(HscoError):
    """A line of an input file could not be parsed."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class NonIncreasingIndex(MalformedLine):
    """Feature indices on a line are not strictly increasing."""

    def __init__(self, line_number: int):
        super().__init__(line_number, "feature indices must be strictly increasing")


class EmptyFile(HscoError):
    """Input file contains no data lines."""


class BadDimensions(HscoError):
    """Generator parameters are out of range."""


class ZeroStartVector(HscoError):
    """The correlation-based starting vector is identically zero."""


class EmptyTrialList(HscoError):
    """Aggregation requires at least one trial."""
