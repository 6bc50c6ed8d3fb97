"""
Optimizer comparison on the benchmark suite at an equal evaluation budget.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import List, Mapping, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.errors import OptimizerError
from foxopt.benchmarks import benchmark
from foxopt.optimizer import Optimizer

SUMMARY_COLUMNS = ['benchmark', 'optimizer', 'median', 'q1', 'q3', 'iqr', 'runs', 'budget']

NamedOptimizers = Union[Mapping[str, Optimizer], Sequence[Tuple[str, Optimizer]]]


@dataclass
class BenchmarkTable:
    """One row per (benchmark, optimizer): median and IQR of the best fitness."""
    summary: pd.DataFrame
    runs: pd.DataFrame

    @property
    def n_rows(self) -> int:
        return len(self.summary)

    def median(self, benchmark_name: str, optimizer: str) -> float:
        row = self.summary[(self.summary['benchmark'] == benchmark_name)
                           & (self.summary['optimizer'] == optimizer)]
        if row.empty:
            raise OptimizerError(f"No row for ({benchmark_name}, {optimizer})")
        return float(row['median'].iloc[0])

    def wins(self, optimizer: str, other: str) -> List[str]:
        """Benchmarks on which *optimizer* has a strictly lower median than *other*."""
        names = list(dict.fromkeys(self.summary['benchmark']))
        return [b for b in names if self.median(b, optimizer) < self.median(b, other)]

    def to_csv_string(self) -> str:
        return self.summary.to_csv(index=False, lineterminator='\n', float_format='%.17g')

    @classmethod
    def from_csv_string(cls, text: str) -> 'BenchmarkTable':
        summary = pd.read_csv(io.StringIO(text), float_precision='round_trip')
        return cls(summary=summary, runs=pd.DataFrame(columns=['benchmark', 'optimizer', 'seed', 'best_fitness']))

    def to_json_string(self) -> str:
        return json.dumps({
            'summary': self.summary.to_dict(orient='records'),
            'runs': self.runs.to_dict(orient='records'),
        }, indent=2, sort_keys=True)

    def to_text(self) -> str:
        """Fixed-width summary for terminals."""
        lines = [f"{'benchmark':<15}{'optimizer':<16}{'median':>14}{'iqr':>14}"]
        for row in self.summary.itertuples(index=False):
            lines.append(f"{row.benchmark:<15}{row.optimizer:<16}{row.median:>14.4e}{row.iqr:>14.4e}")
        return "\n".join(lines) + "\n"


def _as_pairs(optimizers: NamedOptimizers) -> List[Tuple[str, Optimizer]]:
    if isinstance(optimizers, Mapping):
        return list(optimizers.items())
    return [(str(name), opt) for name, opt in optimizers]


def compare_optimizers(
    names: Sequence[str],
    optimizers: NamedOptimizers,
    seeds: Sequence[int],
    budget: int,
    dim: int = 10,
) -> BenchmarkTable:
    """Run every optimizer on every benchmark for every seed.

    The budget is first cut to the smallest budget an optimizer can spend
    exactly (FOX spends whole populations only), and that budget is given
    to every optimizer.

    Raises:
        OptimizerError: with fewer than 1 benchmark, 2 optimizers or 3
            seeds, or a budget below an optimizer's minimum.
    """
    pairs = _as_pairs(optimizers)
    if len(names) < 1:
        raise OptimizerError("At least one benchmark is required")
    if len(pairs) < 2:
        raise OptimizerError("At least two optimizers are required for a comparison")
    if len(seeds) < 3:
        raise OptimizerError("At least three seeds are required for median and IQR")
    for label, opt in pairs:
        minimum = getattr(opt, 'min_budget', 1)
        if budget < minimum:
            raise OptimizerError(f"Budget {budget} is below the minimum {minimum} of optimizer '{label}'")
    budget = min(getattr(opt, 'effective_budget', lambda b: b)(budget) for _, opt in pairs)

    runs = []
    summary = []
    for name in names:
        objective, bounds, _ = benchmark(name, dim)
        for label, opt in pairs:
            best = [float(opt(objective, bounds, budget, int(seed)).best_fitness) for seed in seeds]
            runs.extend({'benchmark': name, 'optimizer': label, 'seed': int(s), 'best_fitness': b}
                        for s, b in zip(seeds, best))
            q1, med, q3 = np.percentile(best, [25, 50, 75])
            summary.append({'benchmark': name, 'optimizer': label, 'median': float(med),
                            'q1': float(q1), 'q3': float(q3), 'iqr': float(q3 - q1),
                            'runs': len(best), 'budget': int(budget)})
    return BenchmarkTable(summary=pd.DataFrame(summary, columns=SUMMARY_COLUMNS), runs=pd.DataFrame(runs))
