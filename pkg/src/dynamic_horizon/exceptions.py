"""Custom exceptions for the engine."""

from __future__ import annotations


class DynamicHorizonError(Exception):
    """Base exception for this project."""


class ConfigError(DynamicHorizonError):
    """Raised for invalid or unknown configuration values."""


class ComputeError(DynamicHorizonError):
    """Raised by the differentiation engine."""


class ShapeError(ComputeError):
    """Raised when operand shapes do not fit an operation."""

    def __init__(self, op: str, *shapes: tuple[int, ...], detail: str = "") -> None:
        rendered = ", ".join(str(tuple(shape)) for shape in shapes)
        message = f"{op}: incompatible shapes {rendered}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)
        self.op = op
        self.shapes = [tuple(shape) for shape in shapes]


class UsageError(ComputeError):
    """Raised when the graph API is used out of order."""


class NumericalError(ComputeError):
    """Raised when a forward value or a probed loss is not finite."""

    def __init__(self, message: str, where: str | None = None) -> None:
        super().__init__(message)
        self.where = where


class ModelError(DynamicHorizonError):
    """Raised for model input/configuration mismatches."""


class LossError(DynamicHorizonError):
    """Raised for invalid loss inputs."""


class DataError(DynamicHorizonError):
    """Raised for invalid market data."""


class LabelingError(DataError):
    """Raised when a day cannot be labeled."""


class CalibrationError(DataError):
    """Raised when the labeling width cannot reach its target."""


class DataFileMissing(DataError):
    """Raised when a dataset file does not exist."""


class HarnessError(DynamicHorizonError):
    """Raised by experiment orchestration."""


class DataExhausted(HarnessError):
    """Raised when the walk-forward protocol runs out of ticks."""


class DegenerateFitError(HarnessError):
    """Raised when a regression has no spread in its regressor."""


class GradientCheckFailed(DynamicHorizonError):
    """Raised when analytic and numeric gradients disagree."""
