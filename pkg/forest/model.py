"""
Bagged random-forest classifier with soft voting.

Each tree is grown from its own RNG stream, derived from ``(seed, tree
index)``, so a fitted forest is identical for every thread count.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, Field

from core.config import DEFAULT_SEED, resolve_n_jobs
from core.errors import ModelError
from data.dataset import Dataset
from forest.tree import TreeNode, build_tree

FORMAT_NAME = "radiofox.forest"
FORMAT_VERSION = 1


class ForestConfig(BaseModel):
    """Random-forest hyperparameters (the tuning surface for forests)."""

    n_trees: int = Field(100, ge=1, description="Number of trees")
    max_depth: Optional[int] = Field(None, ge=1, description="Maximum depth; None for unlimited")
    min_samples_leaf: int = Field(1, ge=1, description="Minimum training samples per leaf")
    max_features_fraction: Optional[float] = Field(
        None, gt=0.0, le=1.0,
        description="Fraction of features examined per node; None for sqrt(M)/M")
    bootstrap: bool = Field(True, description="Grow each tree on a bootstrap resample")
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2 ** 64, description="Seed of the per-tree RNG streams")


@dataclass(eq=False)
class ForestModel:
    """A fitted forest."""
    trees: List[TreeNode]
    config: ForestConfig
    n_classes: int
    n_features: int
    feature_names: List[str] = field(default_factory=list)
    class_names: List[str] = field(default_factory=list)

    kind = "forest"

    def _check_rows(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows[None, :]
        if rows.ndim != 2 or rows.shape[1] != self.n_features:
            raise ModelError(f"Expected rows with {self.n_features} features, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise ModelError("Input rows contain non-finite values")
        return rows

    def predict_proba(self, rows) -> np.ndarray:
        """Mean of per-tree leaf distributions, one row per input row."""
        rows = self._check_rows(rows)
        out = np.zeros((rows.shape[0], self.n_classes))
        for tree in self.trees:
            for i, row in enumerate(rows):
                out[i] += tree.leaf_for(row).value
        return out / len(self.trees)

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
            'config': self.config.model_dump(mode='json'),
            'n_classes': self.n_classes,
            'n_features': self.n_features,
            'feature_names': list(self.feature_names),
            'class_names': list(self.class_names),
            'trees': [tree.to_dict() for tree in self.trees],
        }

    def to_json_string(self, indent: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict) -> 'ForestModel':
        if data.get('format') != FORMAT_NAME:
            raise ModelError(f"Not a forest model document (format={data.get('format')!r})")
        if data.get('version') != FORMAT_VERSION:
            raise ModelError(f"Unsupported forest model version {data.get('version')!r}")
        return cls(
            trees=[TreeNode.from_dict(t) for t in data['trees']],
            config=ForestConfig.model_validate(data['config']),
            n_classes=int(data['n_classes']),
            n_features=int(data['n_features']),
            feature_names=list(data.get('feature_names', [])),
            class_names=list(data.get('class_names', [])),
        )

    @classmethod
    def from_json_string(cls, text: str) -> 'ForestModel':
        try:
            return cls.from_dict(json.loads(text))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise ModelError(f"Invalid forest model document: {e}")


def _fit_one(X, y, n_classes, cfg: ForestConfig, index: int) -> TreeNode:
    rng = np.random.default_rng([cfg.seed, index])
    if cfg.bootstrap:
        rows = rng.integers(0, X.shape[0], size=X.shape[0])
        X, y = X[rows], y[rows]
    return build_tree(X, y, n_classes, rng,
                      max_depth=cfg.max_depth,
                      min_samples_leaf=cfg.min_samples_leaf,
                      max_features_fraction=cfg.max_features_fraction)


def fit_forest(train: Dataset, cfg: ForestConfig | None = None, n_jobs: int | None = None) -> ForestModel:
    """Fit ``cfg.n_trees`` trees on *train*.

    Raises:
        ModelError: if *train* has no rows.
    """
    cfg = cfg or ForestConfig()
    if train.n_rows == 0:
        raise ModelError("Cannot fit a forest on an empty dataset")
    if train.n_classes == 0:
        raise ModelError("Cannot fit a forest without classes")
    X, y = train.features, train.labels
    n_jobs = resolve_n_jobs(n_jobs)
    if n_jobs == 1:
        trees = [_fit_one(X, y, train.n_classes, cfg, i) for i in range(cfg.n_trees)]
    else:
        trees = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_fit_one)(X, y, train.n_classes, cfg, i) for i in range(cfg.n_trees))
    return ForestModel(trees=list(trees), config=cfg, n_classes=train.n_classes,
                       n_features=train.n_features, feature_names=list(train.feature_names),
                       class_names=list(train.class_names))


def predict_proba(model: ForestModel, row: Sequence[float]) -> np.ndarray:
    """Class probability vector for a single row."""
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1:
        raise ModelError(f"Expected a single feature vector, got shape {row.shape}")
    return model.predict_proba(row)[0]


def predict(model: ForestModel, rows) -> np.ndarray:
    """Predicted class index per row."""
    return model.predict(rows)
