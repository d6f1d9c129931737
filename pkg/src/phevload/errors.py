"""Exception types shared across the package."""

from __future__ import annotations


class ParameterDomainError(ValueError):
    """A numeric parameter lies outside its valid domain."""


class GridShapeError(ValueError):
    """Two gridded quantities do not share shape or resolution."""


class CsvFormatError(ValueError):
    """A CSV input violates the expected schema.

    Carries the offending row number (1-based, counting all physical lines)
    and column name when they are known.
    """

    def __init__(self, message: str, *, row: int | None = None, column: str | None = None):
        prefix = ""
        if row is not None:
            prefix += f"row {row}"
        if column is not None:
            prefix += f"{', ' if prefix else ''}column {column!r}"
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.row = row
        self.column = column


class NonConvergenceError(RuntimeError):
    """The dual solver exhausted its iteration budget.

    ``kkt_violation`` holds the final maximal optimality violation.
    """

    def __init__(self, message: str, *, kkt_violation: float, iterations: int):
        super().__init__(message)
        self.kkt_violation = kkt_violation
        self.iterations = iterations


class InfeasibleTargetError(RuntimeError):
    """Moment matching could not reach the requested mean/variance."""


class ZeroTargetError(ValueError):
    """A relative-error metric was asked to divide by a zero target."""


class OracleSizeError(ValueError):
    """The brute-force QP oracle refuses problems beyond desk scale."""


class ConfigError(ValueError):
    """A run configuration is invalid before any work starts."""
