"""
Shapley attributions for forest and gbt predictions.

The value of a feature subset S is the tree-conditional expectation of the
model output: at a node splitting on a feature in S the row's branch is
followed, otherwise both children are averaged with their covers as
weights.  Forests are explained in probability space, gbt models per class
in logit space, where tree outputs add up.

Exact mode enumerates every subset of the features the ensemble splits on;
sampling mode averages marginal contributions over seeded random
permutations.  Features no tree splits on get exactly 0 in both modes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from boost.objective import softmax
from core.config import DEFAULT_SEED, resolve_n_jobs
from core.errors import ExplainError

MAX_FEATURES_EXACT = 15
DEFAULT_PERMUTATIONS = 200


def _tree_expectation(node, row: np.ndarray, known: np.ndarray, leaf) -> np.ndarray:
    """Conditional expectation of one tree for every mask row of *known*."""
    if node.feature is None:
        return np.broadcast_to(leaf(node), (known.shape[0],) + np.shape(leaf(node))).astype(np.float64)
    left = _tree_expectation(node.left, row, known, leaf)
    right = _tree_expectation(node.right, row, known, leaf)
    followed = left if row[node.feature] <= node.threshold else right
    lw, rw = float(node.left.cover), float(node.right.cover)
    mixed = (left * lw + right * rw) / (lw + rw)
    take = known[:, node.feature]
    if followed.ndim == 2:
        take = take[:, None]
    return np.where(take, followed, mixed)


def _iter_trees(model):
    if model.kind == "forest":
        yield from model.trees
    else:
        for trees in model.trees:
            yield from trees


def used_features(model) -> List[int]:
    """Sorted indices of the features some tree splits on."""
    used = set()
    for tree in _iter_trees(model):
        used.update(node.feature for node in tree.iter_nodes() if node.feature is not None)
    return sorted(used)


def output_space(model) -> str:
    return "probability" if model.kind == "forest" else "logit"


def _check_row(model, row) -> np.ndarray:
    row = np.asarray(row, dtype=np.float64).reshape(-1)
    if len(row) != model.n_features:
        raise ExplainError(f"Row has {len(row)} features, model expects {model.n_features}")
    if not np.all(np.isfinite(row)):
        raise ExplainError("Row contains non-finite values")
    return row


def subset_values(model, row, known: np.ndarray) -> np.ndarray:
    """Explained output (B x classes) for each boolean mask row of *known*.

    Forests give class probabilities; gbt models give raw logits.
    """
    row = _check_row(model, row)
    known = np.atleast_2d(np.asarray(known, dtype=bool))
    if known.shape[1] != model.n_features:
        raise ExplainError(f"Masks cover {known.shape[1]} features, model expects {model.n_features}")
    batch = known.shape[0]
    if model.kind == "forest":
        out = np.zeros((batch, model.n_classes))
        for tree in model.trees:
            out += _tree_expectation(tree, row, known, lambda node: node.value)
        return out / len(model.trees)
    out = np.tile(model.base_score, (batch, 1))
    for trees in model.trees:
        for k, tree in enumerate(trees):
            out[:, k] += _tree_expectation(tree, row, known, lambda node: node.weight)
    return out


def expected_value_subset(model, row, known: Sequence[int]) -> np.ndarray:
    """Class probabilities of *row* when only the features in *known* are observed.

    With every feature known this is ``model.predict_proba(row)``.
    """
    mask = np.zeros((1, model.n_features), dtype=bool)
    known = list(known)
    if known:
        if min(known) < 0 or max(known) >= model.n_features:
            raise ExplainError(f"Known feature index outside [0, {model.n_features})")
        mask[0, known] = True
    values = subset_values(model, row, mask)[0]
    return values if model.kind == "forest" else softmax(values)


@dataclass(eq=False)
class Explanation:
    """Attribution of one row: ``base_value + contributions.sum(0) == predicted_output``."""
    base_value: np.ndarray
    contributions: np.ndarray
    predicted_output: np.ndarray
    output_space: str = "probability"
    method: str = "exact"
    n_permutations: int = 0
    feature_names: List[str] = field(default_factory=list)
    class_names: List[str] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return self.contributions.shape[0]

    @property
    def n_classes(self) -> int:
        return self.contributions.shape[1]

    def efficiency_gap(self) -> float:
        """Largest per-class deviation from the efficiency identity."""
        return float(np.max(np.abs(self.base_value + self.contributions.sum(axis=0) - self.predicted_output)))

    def to_dict(self) -> Dict:
        return {
            'base_value': self.base_value.tolist(),
            'contributions': self.contributions.tolist(),
            'predicted_output': self.predicted_output.tolist(),
            'output_space': self.output_space,
            'method': self.method,
            'n_permutations': self.n_permutations,
            'feature_names': list(self.feature_names),
            'class_names': list(self.class_names),
        }

    def to_json_string(self, indent: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _shapley_weights(n: int) -> np.ndarray:
    """Weight s!(n-s-1)!/n! of a coalition of size s, for s = 0 .. n-1."""
    return np.array([math.factorial(s) * math.factorial(n - s - 1) / math.factorial(n) for s in range(n)])


def _exact(model, row, features: List[int]) -> np.ndarray:
    n = len(features)
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    known = np.zeros((len(masks), model.n_features), dtype=bool)
    known[:, features] = bits
    values = subset_values(model, row, known)
    sizes = bits.sum(axis=1)
    weights = _shapley_weights(n)
    contributions = np.zeros((model.n_features, model.n_classes))
    for b, j in enumerate(features):
        without = masks[~bits[:, b]]
        delta = values[without | (1 << b)] - values[without]
        contributions[j] = np.sum(weights[sizes[without]][:, None] * delta, axis=0)
    return contributions


def _sampled(model, row, features: List[int], n_permutations: int, seed: int) -> np.ndarray:
    n = len(features)
    rng = np.random.default_rng(seed)
    orders = np.array([rng.permutation(features) for _ in range(n_permutations)], dtype=np.int64)
    known = np.zeros((n_permutations, n + 1, model.n_features), dtype=bool)
    for i in range(1, n + 1):
        known[np.arange(n_permutations)[:, None], i, orders[:, :i]] = True
    values = subset_values(model, row, known.reshape(-1, model.n_features)).reshape(n_permutations, n + 1, -1)
    deltas = values[:, 1:] - values[:, :-1]
    contributions = np.zeros((model.n_features, model.n_classes))
    for p in range(n_permutations):
        contributions[orders[p]] += deltas[p]
    return contributions / n_permutations


def shapley_values(
    model,
    row,
    max_features_exact: int = MAX_FEATURES_EXACT,
    allow_sampling: bool = False,
    n_permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = DEFAULT_SEED,
) -> Explanation:
    """Shapley contributions of every feature to the model output at *row*.

    Exact enumeration runs over the features the ensemble splits on.  When
    there are more than *max_features_exact* of them, *n_permutations*
    seeded permutations are sampled instead, provided *allow_sampling*.

    Raises:
        ExplainError: on a dimension mismatch, or when the exact cap is
            exceeded and sampling is not allowed.
    """
    row = _check_row(model, row)
    features = used_features(model)
    n = len(features)
    all_known = np.ones((1, model.n_features), dtype=bool)
    predicted = subset_values(model, row, all_known)[0]
    base = subset_values(model, row, np.zeros((1, model.n_features), dtype=bool))[0]

    if n == 0:
        contributions, method, perms = np.zeros((model.n_features, model.n_classes)), "exact", 0
    elif n <= max_features_exact:
        contributions, method, perms = _exact(model, row, features), "exact", 0
    elif allow_sampling:
        if n_permutations < 1:
            raise ExplainError(f"Sampling needs at least one permutation, got {n_permutations}")
        contributions = _sampled(model, row, features, n_permutations, seed)
        method, perms = "sampling", n_permutations
    else:
        raise ExplainError(
            f"Model splits on {n} features, above the exact limit of {max_features_exact}; "
            "enable sampling to explain it")

    return Explanation(base_value=base, contributions=contributions, predicted_output=predicted,
                       output_space=output_space(model), method=method, n_permutations=perms,
                       feature_names=list(model.feature_names), class_names=list(model.class_names))


def explain_rows(
    model,
    rows,
    max_features_exact: int = MAX_FEATURES_EXACT,
    allow_sampling: bool = False,
    n_permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = DEFAULT_SEED,
    n_jobs: int | None = None,
) -> List[Explanation]:
    """``shapley_values`` for every row; row i samples with seed ``[seed, i]``."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))

    def one(i: int) -> Explanation:
        return shapley_values(model, rows[i], max_features_exact, allow_sampling, n_permutations,
                              seed=int(np.random.SeedSequence([seed, i]).generate_state(1)[0]))

    n_jobs = resolve_n_jobs(n_jobs)
    if n_jobs == 1:
        return [one(i) for i in range(len(rows))]
    return list(Parallel(n_jobs=n_jobs, prefer="threads")(delayed(one)(i) for i in range(len(rows))))
