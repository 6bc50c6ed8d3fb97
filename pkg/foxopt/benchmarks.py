"""
Classical benchmark functions for checking the optimizers.

Every function takes a 1-D position and returns a float; every listed
function has its global minimum value 0 inside the canonical box.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from core.errors import OptimizerError
from foxopt.optimizer import Bounds, Objective


def sphere(x):
    return float(np.sum(x ** 2))


def rosenbrock(x):
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (x[:-1] - 1.0) ** 2))


def rastrigin(x):
    d = x.shape[0]
    return float(10 * d + np.sum(x ** 2 - 10 * np.cos(2 * np.pi * x)))


def ackley(x):
    out = (
        -20 * np.exp(-0.2 * np.sqrt(np.mean(x ** 2)))
        - np.exp(np.mean(np.cos(2 * np.pi * x)))
        + 20
        + np.exp(1)
    )
    return float(out)


def griewank(x):
    i = np.arange(1, x.shape[0] + 1)
    return float(1 + np.sum(x ** 2 / 4000) - np.prod(np.cos(x / np.sqrt(i))))


def schwefel_2_22(x):
    return float(np.sum(np.abs(x)) + np.prod(np.abs(x)))


def zakharov(x):
    i = np.arange(1, x.shape[0] + 1)
    s = np.sum(0.5 * i * x)
    return float(np.sum(x ** 2) + s ** 2 + s ** 4)


def levy(x):
    w = 1 + (x - 1) / 4
    head = np.sin(np.pi * w[0]) ** 2
    body = np.sum((w[:-1] - 1) ** 2 * (1 + 10 * np.sin(np.pi * w[:-1] + 1) ** 2))
    tail = (w[-1] - 1) ** 2 * (1 + np.sin(2 * np.pi * w[-1]) ** 2)
    return float(head + body + tail)


@dataclass(frozen=True)
class BenchmarkSpec:
    function: Callable[[np.ndarray], float]
    lower: float
    upper: float
    optimum: float = 0.0
    min_dim: int = 1


BENCHMARKS: Dict[str, BenchmarkSpec] = {
    'sphere': BenchmarkSpec(sphere, -100.0, 100.0),
    'rosenbrock': BenchmarkSpec(rosenbrock, -30.0, 30.0, min_dim=2),
    'rastrigin': BenchmarkSpec(rastrigin, -5.12, 5.12),
    'ackley': BenchmarkSpec(ackley, -32.768, 32.768),
    'griewank': BenchmarkSpec(griewank, -600.0, 600.0),
    'schwefel_2_22': BenchmarkSpec(schwefel_2_22, -10.0, 10.0),
    'zakharov': BenchmarkSpec(zakharov, -5.0, 10.0),
    'levy': BenchmarkSpec(levy, -10.0, 10.0),
}

BENCHMARK_NAMES = tuple(BENCHMARKS)


def benchmark(name: str, dim: int = 10) -> Tuple[Objective, Bounds, float]:
    """Return (objective, canonical bounds, known optimum value) for *name*.

    Raises:
        OptimizerError: for an unknown name or a dimension the function does
            not support.
    """
    spec = BENCHMARKS.get(name)
    if spec is None:
        raise OptimizerError(f"Unknown benchmark '{name}'; choose from: {', '.join(BENCHMARK_NAMES)}")
    if dim < spec.min_dim:
        raise OptimizerError(f"Benchmark '{name}' needs dimension >= {spec.min_dim}, got {dim}")

    def objective(x) -> float:
        return spec.function(np.asarray(x, dtype=np.float64))

    return objective, Bounds.uniform(spec.lower, spec.upper, dim), spec.optimum
