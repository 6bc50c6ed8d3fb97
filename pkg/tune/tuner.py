"""
FOX-driven hyperparameter tuning.

The first FOX agent starts at the encoding of the baseline configuration.
The baseline is not always exactly representable in the search space
(unlimited depth, for instance), so the literal baseline is scored too and
kept whenever the search does not beat it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import logfire
import numpy as np

from core.config import DEFAULT_SEED
from core.errors import TuneError
from core.logger import Logger
from data.dataset import Dataset
from foxopt.optimizer import Bounds, FoxConfig, fox_optimize
from tune.objective import CVObjective
from tune.space import CONFIG_TYPES, ModelConfig, SearchSpace, baseline_config, decode, encode


@dataclass
class TuneResult:
    """Outcome of one tuning run; scores are mean CV accuracy (or weighted F1)."""
    model_kind: str
    best_config: Dict[str, Any]
    best_cv_score: float
    baseline_cv_score: float
    trace: List[float] = field(default_factory=list)
    baseline_kept: bool = False
    evaluations: int = 0
    metric: str = "accuracy"
    folds: int = 5
    seed: int = DEFAULT_SEED
    fox: Dict[str, Any] = field(default_factory=dict)

    def config(self) -> ModelConfig:
        return CONFIG_TYPES[self.model_kind].model_validate(self.best_config)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'model_kind': self.model_kind,
            'best_config': dict(self.best_config),
            'best_cv_score': float(self.best_cv_score),
            'baseline_cv_score': float(self.baseline_cv_score),
            'trace': [float(v) for v in self.trace],
            'baseline_kept': self.baseline_kept,
            'evaluations': int(self.evaluations),
            'metric': self.metric,
            'folds': int(self.folds),
            'seed': int(self.seed),
            'fox': dict(self.fox),
        }

    def to_json_string(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_json_string(cls, text: str) -> 'TuneResult':
        try:
            return cls(**json.loads(text))
        except (json.JSONDecodeError, TypeError) as e:
            raise TuneError(f"Invalid tuning result document: {e}")


def tune(
    train: Dataset,
    space: SearchSpace,
    fox_cfg: Optional[FoxConfig] = None,
    folds: int = 5,
    seed: int = DEFAULT_SEED,
    metric: str = "accuracy",
    n_jobs: int | None = None,
    logger: Optional[Logger] = None,
) -> TuneResult:
    """Search *space* with FOX against the cross-validated objective.

    Guarantees ``best_cv_score >= baseline_cv_score``.
    """
    fox_cfg = fox_cfg or FoxConfig(seed=seed)
    logger = logger or Logger(quiet=True)
    objective = CVObjective(train, space, folds=folds, seed=seed, metric=metric, n_jobs=n_jobs)
    baseline = baseline_config(space.model_kind, seed)

    with logfire.span('tune {kind}', kind=space.model_kind, dim=space.dim,
                      pop_size=fox_cfg.pop_size, max_iters=fox_cfg.max_iters):
        baseline_score = objective.score_config(baseline)
        logger.print_status(f"{space.model_kind} baseline CV {metric}: {baseline_score:.4f}")
        result = fox_optimize(objective, Bounds(np.zeros(space.dim), np.ones(space.dim)), fox_cfg,
                              initial=[encode(baseline, space)], n_jobs=n_jobs)

    best = decode(result.best_x, space, seed)
    best_score = objective.score_config(best)
    kept = best_score < baseline_score
    if kept:
        best, best_score = baseline, baseline_score
    logger.print_status(f"{space.model_kind} tuned CV {metric}: {best_score:.4f}"
                        + (" (baseline kept)" if kept else ""))
    return TuneResult(
        model_kind=space.model_kind,
        best_config=best.model_dump(mode='json'),
        best_cv_score=best_score,
        baseline_cv_score=baseline_score,
        trace=list(result.history),
        baseline_kept=kept,
        evaluations=result.evaluations,
        metric=metric,
        folds=folds,
        seed=seed,
        fox=fox_cfg.model_dump(mode='json'),
    )
