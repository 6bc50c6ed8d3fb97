"""
CART classification trees.

Splits maximize Gini impurity decrease over candidate thresholds placed at
midpoints between consecutive distinct sorted values.  A sample goes left
when ``x[feature] <= threshold``.  The split search is vectorized over all
features and thresholds of a node at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.errors import ModelError


@dataclass(eq=False)
class TreeNode:
    """A tree node; leaves have ``feature is None``.

    ``value`` is the class distribution of the training samples that reached
    the node (kept on internal nodes too, for impurity bookkeeping) and
    ``cover`` their count.
    """
    value: np.ndarray
    cover: int
    feature: Optional[int] = None
    threshold: float = 0.0
    left: Optional['TreeNode'] = None
    right: Optional['TreeNode'] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def impurity(self) -> float:
        return float(1.0 - np.sum(self.value ** 2))

    def leaf_for(self, row: np.ndarray) -> 'TreeNode':
        node = self
        while node.feature is not None:
            node = node.left if row[node.feature] <= node.threshold else node.right
        return node

    def iter_nodes(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            if node.feature is not None:
                stack.append(node.right)
                stack.append(node.left)

    def depth(self) -> int:
        if self.feature is None:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def to_dict(self) -> Dict:
        data = {'cover': int(self.cover), 'value': [float(v) for v in self.value]}
        if self.feature is not None:
            data.update({
                'feature': int(self.feature),
                'threshold': float(self.threshold),
                'left': self.left.to_dict(),
                'right': self.right.to_dict(),
            })
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> 'TreeNode':
        node = cls(value=np.array(data['value'], dtype=np.float64), cover=int(data['cover']))
        if 'feature' in data:
            node.feature = int(data['feature'])
            node.threshold = float(data['threshold'])
            node.left = cls.from_dict(data['left'])
            node.right = cls.from_dict(data['right'])
        return node


def gini_from_counts(counts: np.ndarray) -> np.ndarray:
    """Gini impurity along the last axis of a count array (0 where empty)."""
    totals = counts.sum(axis=-1, keepdims=True)
    with np.errstate(invalid='ignore', divide='ignore'):
        p = np.where(totals > 0, counts / np.where(totals > 0, totals, 1), 0.0)
    return 1.0 - np.sum(p ** 2, axis=-1)


def midpoint(a: float, b: float) -> float:
    mid = (a + b) / 2.0
    # Adjacent floats: keep b on the right-hand side.
    return a if mid >= b else mid


def split_table(X: np.ndarray, onehot: np.ndarray, min_samples_leaf: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Impurity decrease of every (position, feature) candidate.

    Returns ``(decrease, sorted_x, order)`` where ``decrease[i, f]`` is the
    decrease of splitting feature ``f`` between the i-th and (i+1)-th sorted
    value, ``-inf`` where that candidate is not admissible (equal values or
    a side smaller than *min_samples_leaf*).
    """
    n = X.shape[0]
    order = np.argsort(X, axis=0, kind='stable')
    sorted_x = np.take_along_axis(X, order, axis=0)
    counts = np.cumsum(onehot[order], axis=0)          # (n, M, C)
    total = counts[-1]                                  # (M, C)
    left = counts[:-1]
    right = total[None, :, :] - left
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    parent = gini_from_counts(total[0])
    # n_left x gini(left) = n_left - sum(left^2) / n_left, likewise on the right.
    purity = (np.sum(left ** 2, axis=-1) / n_left + np.sum(right ** 2, axis=-1) / n_right) / n
    weighted = 1.0 - purity
    decrease = parent - weighted
    admissible = (sorted_x[1:] > sorted_x[:-1]) & (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    decrease = np.where(admissible, decrease, -np.inf)
    return decrease, sorted_x, order


def admissible_features(X: np.ndarray, min_samples_leaf: int) -> np.ndarray:
    """Mask of the features holding at least one admissible threshold."""
    n = X.shape[0]
    sorted_x = np.sort(X, axis=0)
    gaps = sorted_x[min_samples_leaf:n - min_samples_leaf + 1] > sorted_x[min_samples_leaf - 1:n - min_samples_leaf]
    return gaps.any(axis=0)


def _best_split(X, onehot, rng, n_candidates, min_samples_leaf):
    """Choose (feature, threshold, decrease) for a node, or None.

    Features are visited in random order until *n_candidates* features with
    at least one admissible threshold have been examined.  Among those, the
    largest decrease wins; ties go to the lower feature index, then the
    lower threshold.  The split table is built for the examined features
    only.
    """
    n_features = X.shape[1]
    usable = admissible_features(X, min_samples_leaf)
    if not usable.any():
        return None
    visit = rng.permutation(n_features) if n_candidates < n_features else np.arange(n_features)
    examined = sorted(int(f) for f in visit[usable[visit]][:n_candidates])
    decrease, sorted_x, _ = split_table(X[:, examined], onehot, min_samples_leaf)

    best = None
    for j, f in enumerate(examined):
        i = int(np.argmax(decrease[:, j]))
        gain = decrease[i, j]
        if best is None or gain > best[2]:
            best = (f, midpoint(sorted_x[i, j], sorted_x[i + 1, j]), gain)
    return best


def n_candidate_features(fraction: Optional[float], n_features: int) -> int:
    """Features examined per node: ceil(fraction x M), sqrt(M) when unset."""
    if fraction is None:
        k = math.ceil(math.sqrt(n_features) - 1e-9)
    else:
        k = math.ceil(fraction * n_features - 1e-9)
    return min(max(k, 1), n_features)


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    rng: np.random.Generator,
    max_depth: Optional[int] = None,
    min_samples_leaf: int = 1,
    max_features_fraction: Optional[float] = 1.0,
) -> TreeNode:
    """Grow a classification tree on (X, y).

    Growth stops at *max_depth*, when no admissible split exists under
    *min_samples_leaf*, or when the node is pure.
    """
    if X.shape[0] == 0:
        raise ModelError("Cannot grow a tree on zero samples")
    onehot = np.eye(n_classes, dtype=np.float64)[y]
    n_candidates = n_candidate_features(max_features_fraction, X.shape[1])

    def grow(rows: np.ndarray, depth: int) -> TreeNode:
        counts = onehot[rows].sum(axis=0)
        node = TreeNode(value=counts / len(rows), cover=len(rows))
        if np.count_nonzero(counts) <= 1:
            return node
        if max_depth is not None and depth >= max_depth:
            return node
        if len(rows) < 2 * min_samples_leaf:
            return node
        found = _best_split(X[rows], onehot[rows], rng, n_candidates, min_samples_leaf)
        if found is None:
            return node
        feature, threshold, _ = found
        goes_left = X[rows, feature] <= threshold
        node.feature = feature
        node.threshold = float(threshold)
        node.left = grow(rows[goes_left], depth + 1)
        node.right = grow(rows[~goes_left], depth + 1)
        return node

    return grow(np.arange(X.shape[0]), 0)


def tree_feature_decrease(root: TreeNode, n_features: int) -> np.ndarray:
    """Per-feature sum of (node sample fraction x impurity decrease)."""
    scores = np.zeros(n_features)
    total = float(root.cover)
    for node in root.iter_nodes():
        if node.feature is None:
            continue
        decrease = node.impurity - (node.left.cover * node.left.impurity
                                    + node.right.cover * node.right.impurity) / node.cover
        scores[node.feature] += (node.cover / total) * max(decrease, 0.0)
    return scores


def internal_nodes(root: TreeNode) -> List[TreeNode]:
    return [node for node in root.iter_nodes() if node.feature is not None]
