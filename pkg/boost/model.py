"""
Gradient-boosted tree classifier with a softmax objective.

Each round fits one regression tree per class on the first and second
derivatives of the cross-entropy.  All randomness of round ``r`` comes from
``default_rng([seed, r])`` and is drawn before the class trees are grown, so
fitted models do not depend on the thread count.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, Field

from boost.objective import batch_gradients, multiclass_log_loss, softmax
from boost.tree import RegressionNode, build_regression_tree
from core.config import DEFAULT_SEED, resolve_n_jobs
from core.errors import ModelError
from data.dataset import Dataset

FORMAT_NAME = "radiofox.gbt"
FORMAT_VERSION = 1
PRIOR_FLOOR = 1e-12


class GbtConfig(BaseModel):
    """Gradient-boosting hyperparameters (the tuning surface for gbt models)."""

    n_rounds: int = Field(100, ge=1, description="Boosting rounds")
    learning_rate: float = Field(0.3, gt=0.0, le=1.0, description="Shrinkage applied to every leaf weight")
    max_depth: int = Field(6, ge=1, description="Maximum tree depth")
    min_child_weight: float = Field(1.0, ge=0.0, description="Minimum hessian sum of a node that may be split")
    reg_lambda: float = Field(1.0, ge=0.0, description="L2 regularization on leaf weights")
    gamma: float = Field(0.0, ge=0.0, description="Minimum gain for a split to be kept")
    subsample: float = Field(1.0, gt=0.0, le=1.0, description="Row fraction drawn per round")
    colsample: float = Field(1.0, gt=0.0, le=1.0, description="Column fraction drawn per tree")
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2 ** 64, description="Seed of the per-round RNG streams")


@dataclass(eq=False)
class GbtModel:
    """A fitted boosted ensemble; ``trees[r][k]`` is class k's tree of round r."""
    trees: List[List[RegressionNode]]
    base_score: np.ndarray
    learning_rate: float
    n_classes: int
    n_features: int
    feature_names: List[str] = field(default_factory=list)
    class_names: List[str] = field(default_factory=list)
    loss_history: List[float] = field(default_factory=list)
    config: Optional[GbtConfig] = None

    kind = "gbt"

    def __post_init__(self):
        self.base_score = np.asarray(self.base_score, dtype=np.float64)
        if self.base_score.shape != (self.n_classes,):
            raise ModelError(f"base_score must hold {self.n_classes} values")
        for trees in self.trees:
            if len(trees) != self.n_classes:
                raise ModelError(f"Every round needs {self.n_classes} trees, got {len(trees)}")

    @property
    def n_rounds(self) -> int:
        return len(self.trees)

    def _check_rows(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows[None, :]
        if rows.ndim != 2 or rows.shape[1] != self.n_features:
            raise ModelError(f"Expected rows with {self.n_features} features, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise ModelError("Input rows contain non-finite values")
        return rows

    def decision_function(self, rows) -> np.ndarray:
        """Raw per-class logits: base_score plus every tree's output."""
        rows = self._check_rows(rows)
        logits = np.tile(self.base_score, (rows.shape[0], 1))
        for trees in self.trees:
            for k, tree in enumerate(trees):
                logits[:, k] += tree.predict(rows)
        return logits

    def predict_proba(self, rows) -> np.ndarray:
        return softmax(self.decision_function(rows))

    def predict(self, rows) -> np.ndarray:
        """Argmax of ``predict_proba``; ties go to the lowest class index."""
        return np.argmax(self.predict_proba(rows), axis=1)

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict:
        return {
            'format': FORMAT_NAME,
            'version': FORMAT_VERSION,
            'config': self.config.model_dump(mode='json') if self.config else None,
            'base_score': [float(v) for v in self.base_score],
            'learning_rate': float(self.learning_rate),
            'n_classes': self.n_classes,
            'n_features': self.n_features,
            'feature_names': list(self.feature_names),
            'class_names': list(self.class_names),
            'loss_history': [float(v) for v in self.loss_history],
            'trees': [[tree.to_dict() for tree in trees] for trees in self.trees],
        }

    def to_json_string(self, indent: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict) -> 'GbtModel':
        if data.get('format') != FORMAT_NAME:
            raise ModelError(f"Not a gbt model document (format={data.get('format')!r})")
        if data.get('version') != FORMAT_VERSION:
            raise ModelError(f"Unsupported gbt model version {data.get('version')!r}")
        config = data.get('config')
        return cls(
            trees=[[RegressionNode.from_dict(t) for t in trees] for trees in data['trees']],
            base_score=np.array(data['base_score'], dtype=np.float64),
            learning_rate=float(data['learning_rate']),
            n_classes=int(data['n_classes']),
            n_features=int(data['n_features']),
            feature_names=list(data.get('feature_names', [])),
            class_names=list(data.get('class_names', [])),
            loss_history=[float(v) for v in data.get('loss_history', [])],
            config=GbtConfig.model_validate(config) if config is not None else None,
        )

    @classmethod
    def from_json_string(cls, text: str) -> 'GbtModel':
        try:
            return cls.from_dict(json.loads(text))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise ModelError(f"Invalid gbt model document: {e}")


def _sample_size(fraction: float, n: int) -> int:
    return min(max(math.ceil(fraction * n - 1e-9), 1), n)


def log_prior(labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Per-class log of the training frequency, floored at 1e-12."""
    prior = np.bincount(labels, minlength=n_classes) / len(labels)
    return np.log(np.maximum(prior, PRIOR_FLOOR))


def fit_gbt(train: Dataset, cfg: GbtConfig | None = None, n_jobs: int | None = None) -> GbtModel:
    """Fit ``cfg.n_rounds`` rounds of per-class regression trees on *train*.

    Raises:
        ModelError: if *train* is empty or holds fewer than 2 classes.
    """
    cfg = cfg or GbtConfig()
    if train.n_rows == 0:
        raise ModelError("Cannot fit a gbt model on an empty dataset")
    if len(np.unique(train.labels)) < 2:
        raise ModelError("Gradient boosting needs at least 2 classes in the training data")
    X, y = train.features, train.labels
    n, n_features, n_classes = X.shape[0], X.shape[1], train.n_classes
    n_jobs = resolve_n_jobs(n_jobs)

    base_score = log_prior(y, n_classes)
    logits = np.tile(base_score, (n, 1))
    rounds: List[List[RegressionNode]] = []
    loss_history: List[float] = []

    for r in range(cfg.n_rounds):
        rng = np.random.default_rng([cfg.seed, r])
        if cfg.subsample < 1.0:
            rows = np.sort(rng.choice(n, size=_sample_size(cfg.subsample, n), replace=False))
        else:
            rows = np.arange(n)
        if cfg.colsample < 1.0:
            columns = [np.sort(rng.choice(n_features, size=_sample_size(cfg.colsample, n_features),
                                          replace=False)) for _ in range(n_classes)]
        else:
            columns = [np.arange(n_features)] * n_classes

        g, h = batch_gradients(logits, y)
        X_round = X[rows]

        def grow(k: int) -> RegressionNode:
            return build_regression_tree(
                X_round, g[rows, k], h[rows, k], columns[k],
                max_depth=cfg.max_depth, min_child_weight=cfg.min_child_weight,
                reg_lambda=cfg.reg_lambda, gamma=cfg.gamma, learning_rate=cfg.learning_rate)

        if n_jobs == 1:
            trees = [grow(k) for k in range(n_classes)]
        else:
            trees = list(Parallel(n_jobs=n_jobs, prefer="threads")(delayed(grow)(k) for k in range(n_classes)))

        for k, tree in enumerate(trees):
            logits[:, k] += tree.predict(X)
        rounds.append(trees)
        loss_history.append(multiclass_log_loss(logits, y))

    return GbtModel(trees=rounds, base_score=base_score, learning_rate=cfg.learning_rate,
                    n_classes=n_classes, n_features=n_features,
                    feature_names=list(train.feature_names), class_names=list(train.class_names),
                    loss_history=loss_history, config=cfg)


def predict_proba(model: GbtModel, row: Sequence[float]) -> np.ndarray:
    """Class probability vector for a single row."""
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1:
        raise ModelError(f"Expected a single feature vector, got shape {row.shape}")
    return model.predict_proba(row)[0]


def predict(model: GbtModel, rows) -> np.ndarray:
    """Predicted class index per row."""
    return model.predict(rows)
