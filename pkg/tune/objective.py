"""
Cross-validated tuning objective over the unit box of a search space.
"""
from __future__ import annotations

import threading
from typing import Dict, List, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from boost.model import fit_gbt
from core.config import DEFAULT_SEED, resolve_n_jobs
from core.errors import TuneError
from data.dataset import Dataset
from forest.model import fit_forest
from report.metrics import metrics
from tune.space import ModelConfig, SearchSpace, decode

METRICS = ("accuracy", "f1_weighted")

Fold = Tuple[np.ndarray, np.ndarray]


def fit_model(kind: str, train: Dataset, cfg: ModelConfig, n_jobs: int | None = None):
    """Fit a forest or gbt model of configuration *cfg*."""
    if kind == "forest":
        return fit_forest(train, cfg, n_jobs=n_jobs)
    if kind == "gbt":
        return fit_gbt(train, cfg, n_jobs=n_jobs)
    raise TuneError(f"Unknown model kind '{kind}'")


def stratified_folds(labels: np.ndarray, folds: int, seed: int = DEFAULT_SEED) -> List[Fold]:
    """Stratified k-fold (train, test) index pairs.

    Members of each class are shuffled and dealt round-robin over the folds,
    continuing where the previous class stopped.  Singleton classes never
    enter a test fold and so sit in every training fold.  Folds left without
    test rows are dropped.

    Raises:
        TuneError: if folds < 2 or folds exceeds the number of rows.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = len(labels)
    if folds < 2:
        raise TuneError(f"Cross-validation needs at least 2 folds, got {folds}")
    if folds > n:
        raise TuneError(f"Cannot make {folds} folds from {n} rows")
    rng = np.random.default_rng(seed)
    fold_of = np.full(n, -1, dtype=np.int64)
    slot = 0
    for k in np.unique(labels):
        members = np.flatnonzero(labels == k)
        if len(members) < 2:
            continue
        for i in rng.permutation(members):
            fold_of[i] = slot % folds
            slot += 1
    out = []
    for f in range(folds):
        test = np.flatnonzero(fold_of == f)
        if len(test):
            out.append((np.flatnonzero(fold_of != f), test))
    if not out:
        raise TuneError("Every class is a singleton; no cross-validation fold can be formed")
    return out


def fold_score(kind: str, data: Dataset, cfg: ModelConfig, fold: Fold, metric: str = "accuracy") -> float:
    """Score of *cfg* trained on the fold's training rows, tested on its test rows."""
    train_idx, test_idx = fold
    train, test = data.subset(train_idx), data.subset(test_idx)
    present = np.unique(train.labels)
    if len(present) < 2:
        predicted = np.full(test.n_rows, present[0], dtype=np.int64)
    else:
        predicted = fit_model(kind, train, cfg, n_jobs=1).predict(test.features)
    report = metrics(test.labels, predicted, data.n_classes)
    return report.accuracy if metric == "accuracy" else report.weighted_f1


class CVObjective:
    """Maps a unit-box point to 1 - mean CV score of the decoded configuration.

    Fold assignment is fixed at construction, and scores are memoized by
    decoded configuration, so equal points always get equal values.  With
    ``n_jobs > 1`` the (configuration, fold) fits run in worker processes;
    fold scores are averaged in fold order, so values do not depend on
    ``n_jobs``.
    """

    def __init__(
        self,
        train: Dataset,
        space: SearchSpace,
        folds: int = 5,
        seed: int = DEFAULT_SEED,
        metric: str = "accuracy",
        n_jobs: int | None = 1,
    ):
        if metric not in METRICS:
            raise TuneError(f"Unknown tuning metric '{metric}'; choose from: {', '.join(METRICS)}")
        if train.n_rows == 0:
            raise TuneError("Cannot tune on an empty dataset")
        self.train = train
        self.space = space
        self.seed = seed
        self.metric = metric
        self.n_jobs = n_jobs
        self.folds = stratified_folds(train.labels, folds, seed)
        self.fits = 0
        self._cache: Dict[str, float] = {}
        self._lock = threading.Lock()

    def score_configs(self, cfgs: Sequence[ModelConfig], n_jobs: int | None = None) -> List[float]:
        """Mean CV score (accuracy or weighted F1) of every configuration in *cfgs*."""
        keys = [cfg.model_dump_json() for cfg in cfgs]
        with self._lock:
            pending = {key: cfg for key, cfg in zip(keys, cfgs) if key not in self._cache}
        tasks = [(key, fold) for key in pending for fold in self.folds]
        n_jobs = resolve_n_jobs(self.n_jobs if n_jobs is None else n_jobs)
        kind = self.space.model_kind
        if n_jobs == 1 or len(tasks) <= 1:
            scores = [fold_score(kind, self.train, pending[key], fold, self.metric) for key, fold in tasks]
        else:
            # Tree growing holds the GIL, so fits go to processes.
            scores = Parallel(n_jobs=n_jobs)(
                delayed(fold_score)(kind, self.train, pending[key], fold, self.metric) for key, fold in tasks)
        per_key: Dict[str, List[float]] = {key: [] for key in pending}
        for (key, _), score in zip(tasks, scores):
            per_key[key].append(score)
        with self._lock:
            self.fits += len(tasks)
            for key, values in per_key.items():
                self._cache[key] = float(np.mean(values))
            return [self._cache[key] for key in keys]

    def score_config(self, cfg: ModelConfig) -> float:
        """Mean CV score (accuracy or weighted F1) of *cfg*."""
        return self.score_configs([cfg])[0]

    def evaluate_many(self, points, n_jobs: int | None = None) -> List[float]:
        cfgs = [decode(x, self.space, self.seed) for x in points]
        return [1.0 - score for score in self.score_configs(cfgs, n_jobs)]

    def __call__(self, x) -> float:
        return 1.0 - self.score_config(decode(x, self.space, self.seed))


def cv_objective(
    train: Dataset,
    space: SearchSpace,
    folds: int = 5,
    seed: int = DEFAULT_SEED,
    metric: str = "accuracy",
    n_jobs: int | None = 1,
) -> CVObjective:
    """Build the cross-validated objective of *space* on *train*."""
    return CVObjective(train, space, folds=folds, seed=seed, metric=metric, n_jobs=n_jobs)
