"""Domain errors module."""

from typing import Optional


class SaweiError(Exception):
    """Base error of the benchmark library."""


class NumericalError(SaweiError):
    """Cholesky factorization failed even at the maximum jitter."""


class FitError(SaweiError):
    """Surrogate could not be fitted on the given data."""


class DomainError(SaweiError):
    """Argument outside the domain of a closed-form quantity."""


class UnknownFunction(SaweiError):
    """Requested synthetic function id is not implemented."""


class ParseError(SaweiError):
    """Tabular benchmark file does not follow the table schema."""

    def __init__(
        self, message: str, row: Optional[int] = None, column: Optional[str] = None
    ):
        """
        Build a parse error with location context.

        :param message: error description
        :param row: 1-based data row of the offending value
        :param column: column name of the offending value
        """
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class EmptyTable(SaweiError):
    """Tabular benchmark file has no data rows."""


class GridMismatch(SaweiError):
    """Curves of one task do not share a step grid."""


class MissingManifest(SaweiError):
    """Artifacts directory has no usable manifest."""
