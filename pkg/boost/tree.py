"""
Regression trees grown on gradient statistics (exact greedy split finding).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from boost.objective import leaf_weight, split_gain
from forest.tree import midpoint


@dataclass(eq=False)
class RegressionNode:
    """A boosted-tree node; leaves have ``feature is None`` and a ``weight``."""
    cover: int
    weight: float = 0.0
    feature: Optional[int] = None
    threshold: float = 0.0
    left: Optional['RegressionNode'] = None
    right: Optional['RegressionNode'] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def predict_row(self, row: np.ndarray) -> float:
        node = self
        while node.feature is not None:
            node = node.left if row[node.feature] <= node.threshold else node.right
        return node.weight

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Leaf weight for every row of *X*."""
        out = np.empty(X.shape[0], dtype=np.float64)

        def route(node: 'RegressionNode', idx: np.ndarray) -> None:
            if node.feature is None:
                out[idx] = node.weight
                return
            goes_left = X[idx, node.feature] <= node.threshold
            route(node.left, idx[goes_left])
            route(node.right, idx[~goes_left])

        route(self, np.arange(X.shape[0]))
        return out

    def iter_nodes(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            if node.feature is not None:
                stack.append(node.right)
                stack.append(node.left)

    def to_dict(self) -> Dict:
        if self.feature is None:
            return {'cover': int(self.cover), 'weight': float(self.weight)}
        return {
            'cover': int(self.cover),
            'feature': int(self.feature),
            'threshold': float(self.threshold),
            'left': self.left.to_dict(),
            'right': self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'RegressionNode':
        if 'feature' not in data:
            return cls(cover=int(data['cover']), weight=float(data['weight']))
        return cls(cover=int(data['cover']), feature=int(data['feature']),
                   threshold=float(data['threshold']),
                   left=cls.from_dict(data['left']), right=cls.from_dict(data['right']))


def gain_table(X: np.ndarray, g: np.ndarray, h: np.ndarray, reg_lambda: float, gamma: float):
    """Split gain of every (position, feature) candidate of a node.

    Returns ``(gain, sorted_x)``; ``gain[i, f]`` is ``-inf`` where the i-th
    and (i+1)-th sorted values of feature f are equal.
    """
    order = np.argsort(X, axis=0, kind='stable')
    sorted_x = np.take_along_axis(X, order, axis=0)
    G_cum = np.cumsum(g[order], axis=0)
    H_cum = np.cumsum(h[order], axis=0)
    G, H = G_cum[-1], H_cum[-1]
    G_L, H_L = G_cum[:-1], H_cum[:-1]
    gain = split_gain(G_L, H_L, G - G_L, H - H_L, reg_lambda, gamma)
    gain = np.where(sorted_x[1:] > sorted_x[:-1], gain, -np.inf)
    return gain, sorted_x


def build_regression_tree(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    features: Sequence[int],
    max_depth: int,
    min_child_weight: float,
    reg_lambda: float,
    gamma: float,
    learning_rate: float,
) -> RegressionNode:
    """Grow one boosted tree on (g, h) over the candidate *features*.

    A split is kept only when its gain is strictly positive; nodes whose
    hessian sum is below *min_child_weight* stay leaves.  Ties go to the
    lower feature index, then the lower threshold.  Leaf weights are the
    Newton step scaled by *learning_rate*.
    """
    features = np.asarray(sorted(int(f) for f in features), dtype=np.int64)

    def grow(rows: np.ndarray, depth: int) -> RegressionNode:
        G, H = float(g[rows].sum()), float(h[rows].sum())
        node = RegressionNode(cover=len(rows), weight=learning_rate * leaf_weight(G, H, reg_lambda))
        if depth >= max_depth or len(rows) < 2 or H < min_child_weight or len(features) == 0:
            return node
        gain, sorted_x = gain_table(X[np.ix_(rows, features)], g[rows], h[rows], reg_lambda, gamma)
        best = None
        for col in range(len(features)):
            i = int(np.argmax(gain[:, col]))
            if best is None or gain[i, col] > best[2]:
                best = (col, i, gain[i, col])
        col, i, best_gain = best
        if not best_gain > 0:
            return node
        feature = int(features[col])
        threshold = midpoint(sorted_x[i, col], sorted_x[i + 1, col])
        goes_left = X[rows, feature] <= threshold
        node.weight = 0.0
        node.feature = feature
        node.threshold = float(threshold)
        node.left = grow(rows[goes_left], depth + 1)
        node.right = grow(rows[~goes_left], depth + 1)
        return node

    return grow(np.arange(X.shape[0]), 0)
