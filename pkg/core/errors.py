"""
Exception hierarchy and stage results for radiofox.

Every package raises its own subclass of ``RadiofoxError`` so callers can
tell which component failed.  ``RadiofoxError`` derives from ``ValueError``:
all of these are contract violations on the inputs, not internal faults.
"""
from __future__ import annotations

from dataclasses import dataclass


class RadiofoxError(ValueError):
    """Base class for all radiofox errors."""


class DatasetError(RadiofoxError):
    """Invalid CSV input, malformed Dataset or impossible split."""


class PreprocessError(RadiofoxError):
    """Feature ranking, selection or normalization failure."""


class ModelError(RadiofoxError):
    """Tree-ensemble fitting, prediction or serialization failure."""


class OptimizerError(RadiofoxError):
    """Invalid bounds, budget or a non-finite objective value."""


class TuneError(RadiofoxError):
    """Search-space, encoding or cross-validation failure."""


class ExplainError(RadiofoxError):
    """Shapley computation failure."""


class ReportError(RadiofoxError):
    """Metric computation or table rendering failure."""


class PipelineError(RadiofoxError):
    """A pipeline stage failed; wraps the component error."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


@dataclass
class StageResult:
    """Outcome of one pipeline stage."""
    success: bool
    stage: str
    error_text: str = ""

    def to_dict(self) -> dict:
        return {'success': self.success, 'stage': self.stage, 'error_text': self.error_text}
