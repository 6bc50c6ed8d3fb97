"""
Model comparison tables: one row per model, weighted metrics as columns.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import Sequence, Tuple

import pandas as pd

from core.errors import ReportError
from report.metrics import MetricsReport

COLUMNS = ['model', 'precision', 'recall', 'f1', 'accuracy']


@dataclass
class ComparisonTable:
    frame: pd.DataFrame

    @property
    def models(self):
        return self.frame['model'].tolist()

    def best_model(self) -> str:
        """Highest accuracy; ties go to the earlier row."""
        return str(self.frame.loc[self.frame['accuracy'].idxmax(), 'model'])

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComparisonTable):
            return NotImplemented
        return self.frame.equals(other.frame)

    def to_csv_string(self) -> str:
        return self.frame.to_csv(index=False, lineterminator='\n', float_format='%.17g')

    @classmethod
    def from_csv_string(cls, text: str) -> 'ComparisonTable':
        frame = pd.read_csv(io.StringIO(text), dtype={'model': str, **{c: float for c in COLUMNS[1:]}},
                            float_precision='round_trip')
        if list(frame.columns) != COLUMNS:
            raise ReportError(f"Comparison CSV must have columns {', '.join(COLUMNS)}")
        return cls(frame)

    def to_json_string(self) -> str:
        return json.dumps(self.frame.to_dict(orient='records'), indent=2, sort_keys=True)

    def to_text(self) -> str:
        """Fixed-width rendering with 2 decimals."""
        width = max(16, max(len(m) for m in self.models) + 2)
        lines = [f"{'model':<{width}}{'precision':>10}{'recall':>10}{'f1':>10}{'accuracy':>10}"]
        for row in self.frame.itertuples(index=False):
            lines.append(f"{row.model:<{width}}{row.precision:>10.2f}{row.recall:>10.2f}"
                         f"{row.f1:>10.2f}{row.accuracy:>10.2f}")
        return "\n".join(lines) + "\n"


def comparison_table(reports: Sequence[Tuple[str, MetricsReport]]) -> ComparisonTable:
    """Weighted precision, recall, F1 and accuracy of each named report."""
    if len(reports) < 1:
        raise ReportError("A comparison table needs at least one report")
    rows = [{'model': name, 'precision': r.weighted_precision, 'recall': r.weighted_recall,
             'f1': r.weighted_f1, 'accuracy': r.accuracy} for name, r in reports]
    return ComparisonTable(pd.DataFrame(rows, columns=COLUMNS))
