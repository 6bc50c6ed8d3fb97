"""
Softmax cross-entropy objective and the second-order split gain.
"""
from __future__ import annotations

from typing import Tuple

import numpy as np

from core.errors import ModelError


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stable for large logits."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def softmax_gradients(logits, true_class: int) -> Tuple[np.ndarray, np.ndarray]:
    """First and second derivatives of the cross-entropy w.r.t. each logit.

    ``g_k = p_k - 1[k == y]`` and ``h_k = p_k (1 - p_k)``.

    Raises:
        ModelError: on non-finite logits or an out-of-range class.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 1 or not np.all(np.isfinite(logits)):
        raise ModelError("Logits must be a finite 1-D vector")
    if not 0 <= true_class < len(logits):
        raise ModelError(f"True class {true_class} outside [0, {len(logits)})")
    p = softmax(logits)
    g = p.copy()
    g[true_class] -= 1.0
    return g, p * (1.0 - p)


def batch_gradients(logits: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """``softmax_gradients`` for every row of an (n, K) logit matrix."""
    p = softmax(logits)
    g = p.copy()
    g[np.arange(len(labels)), labels] -= 1.0
    return g, p * (1.0 - p)


def multiclass_log_loss(logits: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of *labels* under softmax(*logits*)."""
    logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(labels))
    shifted = logits - np.max(logits, axis=1, keepdims=True)
    log_norm = np.log(np.sum(np.exp(shifted), axis=1))
    return float(np.mean(log_norm - shifted[np.arange(len(labels)), labels]))


def split_gain(G_L, H_L, G_R, H_R, reg_lambda: float, gamma: float):
    """Loss reduction of a split, minus the complexity penalty *gamma*.

    ``0.5 * [G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l)] - gamma``

    Works element-wise on arrays.  A zero denominator contributes 0.
    """
    def term(G, H):
        denom = H + reg_lambda
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.where(denom > 0, np.square(G) / np.where(denom > 0, denom, 1.0), 0.0)

    gain = 0.5 * (term(G_L, H_L) + term(G_R, H_R) - term(G_L + G_R, H_L + H_R)) - gamma
    return float(gain) if np.ndim(gain) == 0 else gain


def leaf_weight(G: float, H: float, reg_lambda: float) -> float:
    """Newton step ``-G / (H + lambda)``; 0 when the denominator vanishes."""
    denom = H + reg_lambda
    return 0.0 if denom <= 0 else -G / denom
