"""
Gini-importance feature ranking and top-k selection.

Importance is the mean-decrease-in-impurity of an auxiliary random forest:
for each tree, every node splitting on feature j contributes its sample
fraction times its Gini impurity decrease; scores are averaged over trees.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.errors import PreprocessError
from data.dataset import Dataset
from forest.model import ForestConfig, fit_forest
from forest.tree import tree_feature_decrease


def importance_forest_config(seed: int = 0) -> ForestConfig:
    """Default auxiliary forest: 200 fully grown trees, sqrt(M) features per node."""
    return ForestConfig(n_trees=200, max_depth=None, min_samples_leaf=1,
                        max_features_fraction=None, bootstrap=True, seed=seed)


def gini_impurity(class_counts: Sequence[float]) -> float:
    """1 - sum_k p_k^2 over the class proportions of *class_counts*.

    Raises:
        PreprocessError: if counts are negative or all zero.
    """
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.ndim != 1 or np.any(counts < 0):
        raise PreprocessError("Class counts must be a 1-D sequence of non-negative numbers")
    total = counts.sum()
    if total <= 0:
        raise PreprocessError("Gini impurity is undefined for all-zero class counts")
    p = counts / total
    return float(1.0 - np.sum(p ** 2))


def _descending_order(scores: np.ndarray) -> np.ndarray:
    # lexsort: last key is primary; ties keep ascending feature index.
    return np.lexsort((np.arange(len(scores)), -scores))


@dataclass(eq=False)
class GiniRanking:
    """Per-feature importance and the feature indices sorted by it."""
    scores: np.ndarray
    order: np.ndarray
    feature_names: List[str]

    @classmethod
    def from_scores(cls, scores: Sequence[float], feature_names: Sequence[str]) -> 'GiniRanking':
        scores = np.asarray(scores, dtype=np.float64)
        if len(feature_names) != len(scores):
            raise PreprocessError("One feature name per score is required")
        if np.any(scores < 0) or not np.all(np.isfinite(scores)):
            raise PreprocessError("Importance scores must be finite and non-negative")
        return cls(scores=scores, order=_descending_order(scores), feature_names=list(feature_names))

    @property
    def ranked_names(self) -> List[str]:
        return [self.feature_names[j] for j in self.order]

    def project(self, k: int) -> 'GiniRanking':
        """The ranking of the top-*k* features, expressed on those features."""
        keep = self.order[:min(k, len(self.order))]
        return GiniRanking.from_scores(self.scores[keep], [self.feature_names[j] for j in keep])

    def for_features(self, feature_names: Sequence[str]) -> 'GiniRanking':
        """The same scores re-expressed over a table's column order.

        Raises:
            PreprocessError: if a column has no score.
        """
        score = dict(zip(self.feature_names, self.scores))
        missing = [n for n in feature_names if n not in score]
        if missing:
            raise PreprocessError(f"Ranking lacks feature(s): {', '.join(missing[:5])}")
        return GiniRanking.from_scores([score[n] for n in feature_names], list(feature_names))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GiniRanking):
            return NotImplemented
        return (self.feature_names == other.feature_names
                and np.array_equal(self.scores, other.scores)
                and np.array_equal(self.order, other.order))

    __hash__ = None

    def to_frame(self) -> pd.DataFrame:
        ranks = np.empty(len(self.order), dtype=np.int64)
        ranks[self.order] = np.arange(1, len(self.order) + 1)
        frame = pd.DataFrame({'feature': self.feature_names, 'score': self.scores, 'rank': ranks})
        return frame.iloc[self.order].reset_index(drop=True)

    def to_csv_string(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator='\n')

    @classmethod
    def from_csv_string(cls, text: str) -> 'GiniRanking':
        frame = pd.read_csv(io.StringIO(text), dtype={'feature': str}, keep_default_na=False,
                            float_precision='round_trip')
        missing = {'feature', 'score', 'rank'} - set(frame.columns)
        if missing:
            raise PreprocessError(f"Ranking CSV lacks column(s): {', '.join(sorted(missing))}")
        frame = frame.sort_values('rank', kind='stable')
        scores = frame['score'].astype(float).to_numpy()
        # Rows are stored in rank order; the original feature order is not in
        # the CSV, so the ranking is rebuilt over the ranked features.
        return cls.from_scores(scores, frame['feature'].tolist())

    def to_dict(self) -> Dict:
        return {
            'feature_names': list(self.feature_names),
            'scores': [float(s) for s in self.scores],
            'order': [int(j) for j in self.order],
        }

    def to_json_string(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json_string(cls, text: str) -> 'GiniRanking':
        try:
            data = json.loads(text)
            ranking = cls.from_scores(data['scores'], data['feature_names'])
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise PreprocessError(f"Invalid ranking document: {e}")
        if ranking.order.tolist() != list(data.get('order', ranking.order.tolist())):
            raise PreprocessError("Ranking document order is inconsistent with its scores")
        return ranking


def rank_features_gini(
    train: Dataset,
    importance_forest_cfg: ForestConfig | None = None,
    seed: int | None = None,
    n_jobs: int | None = None,
) -> GiniRanking:
    """Rank features by mean decrease in Gini impurity.

    Raises:
        PreprocessError: if *train* is empty or holds fewer than 2 classes.
    """
    if train.n_rows == 0:
        raise PreprocessError("Cannot rank features of an empty dataset")
    if len(np.unique(train.labels)) < 2:
        raise PreprocessError("Gini ranking needs at least 2 classes; no split is possible")
    cfg = importance_forest_cfg or importance_forest_config()
    if seed is not None:
        cfg = cfg.model_copy(update={'seed': seed})
    forest = fit_forest(train, cfg, n_jobs=n_jobs)
    per_tree = [tree_feature_decrease(tree, train.n_features) for tree in forest.trees]
    scores = np.mean(per_tree, axis=0)
    return GiniRanking.from_scores(scores, train.feature_names)


def select_top_k(ds: Dataset, ranking: GiniRanking, k: int) -> Dataset:
    """Keep the min(k, M) best-ranked features, in ranking order.

    Raises:
        PreprocessError: if k < 1 or the ranking does not match *ds*.
    """
    if k < 1:
        raise PreprocessError(f"k must be a positive integer, got {k}")
    if len(ranking.scores) != ds.n_features:
        raise PreprocessError(
            f"Ranking covers {len(ranking.scores)} features but the dataset has {ds.n_features}")
    return ds.select_columns(ranking.order[:min(k, ds.n_features)])
