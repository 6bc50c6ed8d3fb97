"""
Ensemble-level summaries of Shapley explanations.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from core.errors import ExplainError
from explain.shapley import Explanation


@dataclass(eq=False)
class SummaryRanking:
    """Mean absolute contribution per feature, with features in descending order."""
    values: np.ndarray
    order: np.ndarray
    feature_names: List[str]

    @property
    def ranked(self) -> List[tuple]:
        return [(self.feature_names[j], float(self.values[j])) for j in self.order]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'rank': np.arange(1, len(self.order) + 1),
            'feature': [self.feature_names[j] for j in self.order],
            'mean_abs_contribution': self.values[self.order],
        })

    def to_csv_string(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator='\n', float_format='%.17g')

    def to_json_string(self) -> str:
        return json.dumps([{'feature': name, 'mean_abs_contribution': value} for name, value in self.ranked],
                          indent=2)

    def to_text_bars(self, width: int = 40, top: Optional[int] = None) -> str:
        """Fixed-width horizontal bar chart, longest bar = *width* characters."""
        ranked = self.ranked[:top] if top else self.ranked
        if not ranked:
            return ""
        peak = max(value for _, value in ranked)
        label = max(len(name) for name, _ in ranked)
        lines = []
        for name, value in ranked:
            bar = int(round(width * value / peak)) if peak > 0 else 0
            lines.append(f"{name:<{label}} |{'#' * bar:<{width}}| {value:.4f}")
        return "\n".join(lines) + "\n"


def summary_ranking(explanations: Sequence[Explanation], feature_names: Optional[Sequence[str]] = None) -> SummaryRanking:
    """Mean |contribution| over rows and classes; ties go to the lower feature index.

    Raises:
        ExplainError: on an empty list or inconsistent shapes.
    """
    if not explanations:
        raise ExplainError("Cannot summarize an empty list of explanations")
    shape = explanations[0].contributions.shape
    if any(e.contributions.shape != shape for e in explanations):
        raise ExplainError("Explanations have inconsistent contribution shapes")
    names = list(feature_names) if feature_names is not None else list(explanations[0].feature_names)
    if not names:
        names = [f"f{j}" for j in range(shape[0])]
    if len(names) != shape[0]:
        raise ExplainError(f"Got {len(names)} feature names for {shape[0]} features")
    stacked = np.stack([np.abs(e.contributions) for e in explanations])
    values = stacked.mean(axis=(0, 2))
    order = np.lexsort((np.arange(len(values)), -values))
    return SummaryRanking(values=values, order=order, feature_names=names)


def contributions_frame(
    explanations: Sequence[Explanation],
    feature_names: Optional[Sequence[str]] = None,
    class_names: Optional[Sequence[str]] = None,
    row_ids: Optional[Sequence[int]] = None,
) -> pd.DataFrame:
    """Long table with columns row, feature, class, value."""
    if not explanations:
        raise ExplainError("No explanations to tabulate")
    first = explanations[0]
    features = list(feature_names or first.feature_names or [f"f{j}" for j in range(first.n_features)])
    classes = list(class_names or first.class_names or [str(k) for k in range(first.n_classes)])
    ids = list(row_ids) if row_ids is not None else list(range(len(explanations)))
    records = []
    for row_id, e in zip(ids, explanations):
        for j, feature in enumerate(features):
            for k, cls in enumerate(classes):
                records.append((int(row_id), feature, cls, float(e.contributions[j, k])))
    return pd.DataFrame(records, columns=['row', 'feature', 'class', 'value'])
