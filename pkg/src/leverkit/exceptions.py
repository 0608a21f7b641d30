"""Exception and warning types raised across the package."""


class LeverkitError(Exception):
    """Base class for all package errors."""


class DegenerateInputError(LeverkitError, ValueError):
    """An input has no usable column space (zero matrix, rank drop, ...)."""


class InvalidIndexError(LeverkitError, ValueError):
    """An index is out of range for the object it refers to."""


class SingularUpdateError(LeverkitError, ValueError):
    """A rank-one leverage update would divide by (numerically) zero."""


class UnsatisfiableThresholdError(LeverkitError, ValueError):
    """A mass threshold exceeds the total mass available."""

    def __init__(self, threshold, available):
        self.threshold = float(threshold)
        self.available = float(available)
        self.shortfall = self.threshold - self.available
        super().__init__(
            f"threshold {self.threshold:.6g} exceeds total mass "
            f"{self.available:.6g} (shortfall {self.shortfall:.3g})"
        )


class MatrixParseError(LeverkitError, ValueError):
    """A matrix file could not be parsed."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class DegenerateInputWarning(UserWarning):
    """Emitted when a computation degenerates to a trivial answer."""
