"""Exception hierarchy shared across the pipeline."""


class FxSignalError(Exception):
    """Base class for all package errors."""


class ParseError(FxSignalError):
    """Malformed input file (bad row, bad header, unknown tag)."""


class ValidationError(FxSignalError):
    """Data violates a domain invariant (OHLC ordering, date order, ...)."""


class EmptyInputError(FxSignalError):
    """An input that must be non-empty is empty."""


class CoverageError(FxSignalError):
    """A calendar day precedes the first available macro release."""


class ConfigError(FxSignalError):
    """Unknown feature group, model id, or inconsistent configuration."""


class ComputationError(FxSignalError):
    """Non-finite values fed into a numeric routine."""


class PreconditionError(FxSignalError):
    """An operation precondition was not met (unsorted input, misaligned windows)."""


class UndefinedMetricError(FxSignalError):
    """A metric is undefined for the given inputs (single-class labels, no positives)."""


class TrainingDivergedError(FxSignalError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"training loss became non-finite at epoch {epoch}")


class DegenerateSignalError(FxSignalError):
    """All raw probabilities are equal; min-max normalization is impossible."""
