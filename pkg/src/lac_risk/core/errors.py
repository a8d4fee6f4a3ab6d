"""Exception hierarchy for lac_risk."""
from pathlib import Path
from typing import Optional


class LacError(Exception):
    """Base class for every error raised on purpose by lac_risk."""


class DataFormatError(LacError, ValueError):
    """A data file could not be parsed.

    Carries the file path and, when known, the 1-based row number and the
    column name of the offending cell.
    """

    def __init__(
        self,
        message: str,
        path: Optional[Path] = None,
        row: Optional[int] = None,
        column: Optional[str] = None,
    ):
        self.path = path
        self.row = row
        self.column = column
        location = []
        if path is not None:
            location.append(str(path))
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        prefix = ", ".join(location)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ScenarioError(LacError, ValueError):
    """A scenario cannot be built from the requested source and config."""


class ConfigError(LacError, ValueError):
    """Invalid experiment configuration, reported with its dotted key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class TrainingDivergedError(LacError, RuntimeError):
    """The training objective became non-finite."""

    def __init__(self, epoch: int, step: int, value: float):
        self.epoch = epoch
        self.step = step
        self.value = value
        super().__init__(f"non-finite objective {value!r} at epoch {epoch}, step {step}")


class DegenerateKernelError(LacError, ValueError):
    """Kernel bandwidth resolved to zero (all pooled points coincide)."""
