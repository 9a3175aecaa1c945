"""Exception types shared across the package."""


class CbccError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(CbccError):
    """Operands disagree on vector/matrix dimensions."""


class NotPositiveDefinite(CbccError):
    """A matrix expected to be SPD failed factorization (pivot <= tolerance)."""


class InvalidParameter(CbccError):
    """A numeric argument is outside its documented range."""


class InvalidReward(CbccError):
    """Reward outside {0, 1}."""


class ProtocolViolation(CbccError):
    """Environment round protocol (emit -> act -> score) was broken."""


class ParseError(CbccError):
    """A delimited data file could not be parsed; carries row/column info."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        suffix = f" ({', '.join(loc)})" if loc else ""
        super().__init__(message + suffix)
        self.row = row
        self.column = column


class EmptyDataset(CbccError):
    """Dataset has no rows."""


class NonNumericFeature(ParseError):
    """A feature column contains values that do not parse as numbers."""


class ConfigError(CbccError):
    """Invalid experiment configuration."""


class EmptyInput(CbccError):
    """An aggregation was asked to summarize nothing."""
