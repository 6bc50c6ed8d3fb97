"""
Status tracking for a pipeline run.

PipelineStatus is the central state object threaded through run_pipeline.
It collects everything needed to reproduce the run: the config, every seed,
the split indices, the selected features, per-stage outcomes, tuning
summaries and test metrics.  ``to_dict()`` is what gets written as the
run manifest, so it must not contain timestamps or the thread count.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from core.errors import StageResult

MANIFEST_FORMAT = "radiofox.manifest"
MANIFEST_VERSION = 1


@dataclass
class PipelineStatus:
    """Track the state of one pipeline run."""
    config: Dict[str, Any]
    seeds: Dict[str, int] = field(default_factory=dict)
    split: Dict[str, List[int]] = field(default_factory=dict)
    selected_features: List[str] = field(default_factory=list)
    stages: List[StageResult] = field(default_factory=list)
    tuning: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    metrics: Dict[str, Dict[str, float]] = field(default_factory=dict)
    best_model: Optional[str] = None
    explained: List[str] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)

    @property
    def failed_stage(self) -> Optional[str]:
        """Name of the first failed stage, if any."""
        for stage in self.stages:
            if not stage.success:
                return stage.stage
        return None

    @property
    def succeeded(self) -> bool:
        return bool(self.stages) and self.failed_stage is None

    def record(self, stage: str, success: bool = True, error_text: str = "") -> StageResult:
        result = StageResult(success=success, stage=stage, error_text=error_text)
        self.stages.append(result)
        return result

    def add_artifact(self, relative_path: str) -> None:
        if relative_path not in self.artifacts:
            self.artifacts.append(relative_path)

    def to_dict(self) -> Dict[str, Any]:
        """Convert status to the JSON-serialisable run manifest."""
        return {
            'format': MANIFEST_FORMAT,
            'version': MANIFEST_VERSION,
            'config': self.config,
            'seeds': dict(self.seeds),
            'split': {k: [int(i) for i in v] for k, v in self.split.items()},
            'selected_features': list(self.selected_features),
            'stages': [stage.to_dict() for stage in self.stages],
            'tuning': self.tuning,
            'metrics': self.metrics,
            'best_model': self.best_model,
            'explained': list(self.explained),
            'artifacts': sorted(self.artifacts),
        }
