"""Exception hierarchy shared by all modules.

Everything raised on purpose derives from :class:`DecolearnError`.
:class:`ValidationError` subclasses indicate bad input data or
configuration (CLI exit code 1); :class:`SolverError` subclasses indicate
failures while the simulation or a solver is running (CLI exit code 2).
"""


class DecolearnError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DecolearnError):
    """Invalid input data, file, or configuration."""


class SolverError(DecolearnError):
    """Failure inside a running solver or the node simulation."""


class ConfigError(ValidationError):
    """Inconsistent or out-of-range experiment configuration."""


class InvalidPartition(ValidationError):
    """Requested column partition cannot be built."""


class DimensionMismatch(ValidationError):
    """Array shapes do not conform."""


class EmptyDataset(ValidationError):
    """Dataset has no rows or no columns."""


class NonFiniteEntry(ValidationError):
    """A NaN or infinity where a finite value is required."""

    def __init__(self, row, col):
        super().__init__(f"non-finite entry at row {row}, column {col}")
        self.row = row
        self.col = col


class DegenerateColumn(ValidationError):
    """An all-zero column that cannot be normalized or solved against."""

    def __init__(self, index, message=None):
        super().__init__(message or f"column {index} is degenerate (zero norm)")
        self.index = index


class TopologyTooSmall(ValidationError):
    """Node count below the minimum for the requested topology."""


class InvalidTopology(ValidationError):
    """Mixing matrix is malformed (wrong shape or node count)."""


class NegativeWeight(ValidationError):
    """Mixing matrix contains a negative entry."""


class NotDoublyStochastic(ValidationError):
    """Row or column sums of a mixing matrix deviate from one."""

    def __init__(self, worst_row_dev, worst_col_dev):
        super().__init__(
            "matrix is not doubly stochastic "
            f"(worst row deviation {worst_row_dev:.3e}, "
            f"worst column deviation {worst_col_dev:.3e})"
        )
        self.worst_row_dev = worst_row_dev
        self.worst_col_dev = worst_col_dev


class InvalidSplit(ValidationError):
    """Train/test split would leave one side empty."""


class MalformedCsv(ValidationError):
    """CSV file that cannot be parsed."""

    def __init__(self, line, message=None):
        super().__init__(message or f"malformed CSV at line {line}")
        self.line = line


class IoFailure(ValidationError):
    """Underlying file could not be read or written."""


class ProtocolViolation(SolverError):
    """A node consulted data it should not have access to, or a
    required neighbor message is missing."""
