"""Exception hierarchy for detrc.

Every error raised by the library derives from DetRCError and carries the
exit code the CLI reports for it:

- ConfigError (1): invalid parameters, shapes, too-short data
- NumericError (2): divergence, no viable configuration
- ReportIOError (3): filesystem problems while reading or writing reports
"""

from __future__ import annotations

from pathlib import Path
from typing import Any


class DetRCError(Exception):
    """Base class for all detrc errors."""

    exit_code = 2


class ConfigError(DetRCError):
    """Raised when a configuration or call is invalid before any numerics run."""

    exit_code = 1


class ParameterError(ConfigError, ValueError):
    """Raised when a scalar parameter is outside its admissible range."""

    def __init__(self, name: str, value: Any, requirement: str):
        self.name = name
        self.value = value
        self.requirement = requirement
        super().__init__(f"Parameter {name}={value!r} invalid: {requirement}")


class ShapeError(ConfigError, ValueError):
    """Raised when array dimensions do not line up."""

    def __init__(self, message: str, expected: Any = None, actual: Any = None):
        self.expected = expected
        self.actual = actual
        if expected is not None or actual is not None:
            message = f"{message} (expected {expected}, got {actual})"
        super().__init__(message)


class InsufficientHistoryError(ConfigError):
    """Raised when a state needs more past samples than are available."""

    def __init__(self, needed: int, available: int):
        self.needed = needed
        self.available = available
        super().__init__(
            f"Need {needed} samples of history, only {available} available"
        )


class CapacityError(ConfigError):
    """Raised when a series is too short for the requested windows."""

    def __init__(self, length: int, required: int, detail: str = ""):
        self.length = length
        self.required = required
        suffix = f": {detail}" if detail else ""
        super().__init__(
            f"Series of length {length} too short, need at least {required}{suffix}"
        )


class DegenerateSeriesError(ConfigError):
    """Raised when a series has zero spread and cannot be normalized."""


class DomainError(ConfigError):
    """Raised when a value leaves the domain of a mapping (e.g. arccos)."""


class SpectralRadiusZeroError(ConfigError):
    """Raised when rescaling a matrix whose spectral radius is zero."""


class NumericError(DetRCError):
    """Raised when a computation produces unusable numbers."""

    exit_code = 2


class DivergenceError(NumericError):
    """Raised when a trajectory or state becomes non-finite."""

    def __init__(self, where: str, step: int | None = None):
        self.where = where
        self.step = step
        at = f" at step {step}" if step is not None else ""
        super().__init__(f"Non-finite value in {where}{at}")


class NoViableConfigError(NumericError):
    """Raised when every search trial diverged or failed."""

    def __init__(self, trials: list[Any]):
        self.trials = trials
        super().__init__(f"No viable configuration among {len(trials)} trials")


class ReportIOError(DetRCError):
    """Raised when a report or data file cannot be read or written."""

    exit_code = 3

    def __init__(self, path: Path | str, error: Exception):
        self.path = Path(path)
        self.original_error = error
        super().__init__(f"I/O error on {self.path}: {error}")
