"""
Classification metrics computed from a confusion matrix.

Precision, recall and F1 that are undefined for a class (nothing predicted
as it, or no true samples of it) are reported as 0 and the class is listed
in ``degenerate_classes``.  Weighted averages use class supports as weights.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.errors import ReportError

SCHEMA_NAME = "radiofox.metrics"
SCHEMA_VERSION = 1


@dataclass(eq=False)
class ConfusionMatrix:
    """Counts with rows = true class, columns = predicted class."""
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ReportError(f"Confusion matrix must be square, got shape {counts.shape}")
        if np.any(counts < 0):
            raise ReportError("Confusion matrix entries must be non-negative")
        self.counts = counts

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    __hash__ = None

    def to_frame(self, class_names: Optional[Sequence[str]] = None) -> pd.DataFrame:
        names = list(class_names) if class_names else [str(k) for k in range(self.n_classes)]
        if len(names) != self.n_classes:
            raise ReportError(f"Got {len(names)} class names for {self.n_classes} classes")
        frame = pd.DataFrame(self.counts, columns=names)
        frame.insert(0, 'true', names)
        return frame

    def to_csv_string(self, class_names: Optional[Sequence[str]] = None) -> str:
        return self.to_frame(class_names).to_csv(index=False, lineterminator='\n')


def _check_labels(y_true, y_pred, n_classes: int):
    y_true = np.asarray(y_true, dtype=np.int64).reshape(-1)
    y_pred = np.asarray(y_pred, dtype=np.int64).reshape(-1)
    if len(y_true) != len(y_pred):
        raise ReportError(f"y_true has {len(y_true)} labels but y_pred has {len(y_pred)}")
    if n_classes < 1:
        raise ReportError(f"n_classes must be positive, got {n_classes}")
    for name, labels in (('y_true', y_true), ('y_pred', y_pred)):
        if len(labels) and (labels.min() < 0 or labels.max() >= n_classes):
            raise ReportError(f"{name} contains a label outside [0, {n_classes})")
    return y_true, y_pred


def confusion_matrix(y_true, y_pred, n_classes: int) -> ConfusionMatrix:
    """Entry [i][j] counts samples of true class i predicted as j.

    Raises:
        ReportError: on a length mismatch or an out-of-range label.
    """
    y_true, y_pred = _check_labels(y_true, y_pred, n_classes)
    flat = np.bincount(y_true * n_classes + y_pred, minlength=n_classes * n_classes)
    return ConfusionMatrix(flat.reshape(n_classes, n_classes))


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.where(den > 0, num / np.where(den > 0, den, 1), 0.0)


@dataclass(eq=False)
class MetricsReport:
    """Per-class and support-weighted metrics of one set of predictions."""
    confusion: ConfusionMatrix
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    accuracy: float
    class_names: List[str] = field(default_factory=list)

    @classmethod
    def from_confusion(cls, confusion: ConfusionMatrix, class_names: Optional[Sequence[str]] = None) -> 'MetricsReport':
        cm = confusion.counts.astype(np.float64)
        total = cm.sum()
        if total <= 0:
            raise ReportError("Metrics are undefined for zero samples")
        tp = np.diag(cm)
        support = cm.sum(axis=1)
        predicted = cm.sum(axis=0)
        precision = _safe_ratio(tp, predicted)
        recall = _safe_ratio(tp, support)
        f1 = _safe_ratio(2 * precision * recall, precision + recall)
        accuracy = float(tp.sum() / total)
        return cls(
            confusion=confusion,
            precision=precision,
            recall=recall,
            f1=f1,
            support=support.astype(np.int64),
            weighted_precision=float(np.sum(support * precision) / total),
            # Support-weighted recall reduces to trace / total.
            weighted_recall=accuracy,
            weighted_f1=float(np.sum(support * f1) / total),
            accuracy=accuracy,
            class_names=list(class_names) if class_names else [],
        )

    @property
    def n_classes(self) -> int:
        return self.confusion.n_classes

    @property
    def degenerate_classes(self) -> List[int]:
        """Classes whose precision or recall is undefined (reported as 0)."""
        cm = self.confusion.counts
        return [k for k in range(self.n_classes) if cm[:, k].sum() == 0 or cm[k, :].sum() == 0]

    def _names(self) -> List[str]:
        return self.class_names or [str(k) for k in range(self.n_classes)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, MetricsReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None

    def to_dict(self) -> Dict:
        names = self._names()
        return {
            'schema': SCHEMA_NAME,
            'version': SCHEMA_VERSION,
            'class_names': names,
            'per_class': [
                {'class': names[k], 'precision': float(self.precision[k]), 'recall': float(self.recall[k]),
                 'f1': float(self.f1[k]), 'support': int(self.support[k])}
                for k in range(self.n_classes)
            ],
            'weighted': {'precision': self.weighted_precision, 'recall': self.weighted_recall,
                         'f1': self.weighted_f1},
            'accuracy': self.accuracy,
            'confusion_matrix': self.confusion.counts.tolist(),
            'degenerate_classes': [names[k] for k in self.degenerate_classes],
        }

    def to_json_string(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict) -> 'MetricsReport':
        if data.get('schema') != SCHEMA_NAME or data.get('version') != SCHEMA_VERSION:
            raise ReportError(f"Unsupported metrics document ({data.get('schema')!r} v{data.get('version')!r})")
        per_class = data['per_class']
        weighted = data['weighted']
        return cls(
            confusion=ConfusionMatrix(np.array(data['confusion_matrix'], dtype=np.int64)),
            precision=np.array([c['precision'] for c in per_class], dtype=np.float64),
            recall=np.array([c['recall'] for c in per_class], dtype=np.float64),
            f1=np.array([c['f1'] for c in per_class], dtype=np.float64),
            support=np.array([c['support'] for c in per_class], dtype=np.int64),
            weighted_precision=float(weighted['precision']),
            weighted_recall=float(weighted['recall']),
            weighted_f1=float(weighted['f1']),
            accuracy=float(data['accuracy']),
            class_names=list(data.get('class_names', [])),
        )

    @classmethod
    def from_json_string(cls, text: str) -> 'MetricsReport':
        try:
            return cls.from_dict(json.loads(text))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise ReportError(f"Invalid metrics document: {e}")

    def to_text(self) -> str:
        """Per-class table and weighted averages, 2 decimals."""
        names = self._names()
        width = max(12, max(len(n) for n in names) + 2)
        lines = [f"{'class':<{width}}{'precision':>10}{'recall':>10}{'f1':>10}{'support':>10}"]
        for k, name in enumerate(names):
            lines.append(f"{name:<{width}}{self.precision[k]:>10.2f}{self.recall[k]:>10.2f}"
                         f"{self.f1[k]:>10.2f}{int(self.support[k]):>10d}")
        lines.append(f"{'weighted':<{width}}{self.weighted_precision:>10.2f}{self.weighted_recall:>10.2f}"
                     f"{self.weighted_f1:>10.2f}{int(self.support.sum()):>10d}")
        lines.append(f"{'accuracy':<{width}}{self.accuracy:>10.2f}")
        return "\n".join(lines) + "\n"


def metrics(y_true, y_pred, n_classes: int, class_names: Optional[Sequence[str]] = None) -> MetricsReport:
    """Precision, recall, F1 and support per class plus weighted averages.

    Raises:
        ReportError: on a length mismatch, an out-of-range label or zero samples.
    """
    return MetricsReport.from_confusion(confusion_matrix(y_true, y_pred, n_classes), class_names)
