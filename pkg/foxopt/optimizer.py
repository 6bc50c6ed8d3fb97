"""
FOX population-based optimizer and a uniform random-search baseline.

Both minimize an objective over a box.  In FOX, agent ``i`` of iteration
``t`` draws from its own ``default_rng([seed, t, i])`` stream, and all draws
happen before any objective call, so results do not depend on how
evaluations are spread over threads.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Protocol, Sequence

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, Field

from core.config import DEFAULT_SEED, resolve_n_jobs
from core.errors import OptimizerError

Objective = Callable[[np.ndarray], float]

GRAVITY = 9.81
# Chance that an exploiting agent uses the c1 jump scale.
C1_PROBABILITY = 0.18


@dataclass(frozen=True, eq=False)
class Bounds:
    """Per-dimension box ``lower[d] < upper[d]``."""
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.array(self.lower, dtype=np.float64).reshape(-1)
        upper = np.array(self.upper, dtype=np.float64).reshape(-1)
        if len(lower) == 0 or len(lower) != len(upper):
            raise OptimizerError(f"Bounds need equal, non-zero lengths (got {len(lower)} and {len(upper)})")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise OptimizerError("Bounds must be finite")
        bad = np.flatnonzero(lower >= upper)
        if len(bad):
            d = int(bad[0])
            raise OptimizerError(f"Lower bound {lower[d]} is not below upper bound {upper[d]} in dimension {d}")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)

    @classmethod
    def uniform(cls, lo: float, hi: float, dim: int) -> 'Bounds':
        return cls(np.full(dim, lo), np.full(dim, hi))

    @property
    def dim(self) -> int:
        return len(self.lower)

    def clip(self, positions: np.ndarray) -> np.ndarray:
        return np.clip(positions, self.lower, self.upper)

    def contains(self, position: np.ndarray) -> bool:
        position = np.asarray(position, dtype=np.float64)
        return bool(np.all(position >= self.lower) and np.all(position <= self.upper))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.lower + rng.random((n, self.dim)) * (self.upper - self.lower)


class FoxConfig(BaseModel):
    """FOX run settings."""

    pop_size: int = Field(20, ge=2, description="Number of agents")
    max_iters: int = Field(50, ge=1, description="Iterations after the initial population")
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2 ** 64, description="Seed of the per-iteration RNG streams")
    c1: float = Field(0.18, description="Jump scale used with probability 0.18")
    c2: float = Field(0.82, description="Jump scale used otherwise")


@dataclass
class OptResult:
    """Outcome of one optimizer run; ``history[i]`` is the best fitness after step i."""
    best_x: np.ndarray
    best_fitness: float
    history: List[float] = field(default_factory=list)
    evaluations: int = 0

    def to_dict(self) -> Dict:
        return {
            'best_x': [float(v) for v in self.best_x],
            'best_fitness': float(self.best_fitness),
            'history': [float(v) for v in self.history],
            'evaluations': int(self.evaluations),
        }


class CountingObjective:
    """Objective wrapper that counts calls and records out-of-box positions.

    Safe for concurrent calls.
    """

    def __init__(self, objective: Objective, bounds: Optional[Bounds] = None):
        self.objective = objective
        self.bounds = bounds
        self.calls = 0
        self.out_of_bounds: List[np.ndarray] = []
        self._lock = threading.Lock()

    def __call__(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        with self._lock:
            self.calls += 1
            if self.bounds is not None and not self.bounds.contains(x):
                self.out_of_bounds.append(x.copy())
        return self.objective(x)


def evaluate_positions(objective: Objective, positions: np.ndarray, n_jobs: int | None = None) -> np.ndarray:
    """Objective value of every row of *positions*.

    An objective with an ``evaluate_many(positions, n_jobs)`` method scores
    the whole population in one call and schedules the work itself.

    Raises:
        OptimizerError: naming the first position whose value is not finite.
    """
    n_jobs = resolve_n_jobs(n_jobs)
    evaluate_many = getattr(objective, 'evaluate_many', None)
    if evaluate_many is not None:
        values = evaluate_many(positions, n_jobs)
    elif n_jobs == 1 or len(positions) == 1:
        values = [objective(p) for p in positions]
    else:
        values = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(objective)(p) for p in positions)
    values = np.asarray(values, dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if len(bad):
        position = ', '.join(f"{v:.6g}" for v in positions[bad[0]])
        raise OptimizerError(f"Objective returned {values[bad[0]]} at position [{position}]")
    return values


def _agent_draws(seed: int, step: int, pop: int, dim: int):
    """Random numbers of every agent for one iteration, one stream per agent."""
    r = np.empty(pop)
    p = np.empty(pop)
    times = np.empty((pop, dim))
    noise = np.empty((pop, dim))
    for i in range(pop):
        rng = np.random.default_rng([seed, step, i])
        r[i] = rng.random()
        times[i] = rng.random(dim)
        p[i] = rng.random()
        noise[i] = rng.standard_normal(dim)
    return r, times, p, noise


def fox_optimize(
    objective: Objective,
    bounds: Bounds,
    cfg: FoxConfig | None = None,
    initial: Optional[Sequence[Sequence[float]]] = None,
    n_jobs: int | None = None,
) -> OptResult:
    """Minimize *objective* over *bounds* with the FOX metaheuristic.

    Each iteration, agents with r >= 0.5 jump relative to the best position
    (0.5 x BestX x Jump x c, with Jump = 0.5 g mean(T)^2); the others wander
    around the best with a standard-normal step of size MinT x a, where a
    decays linearly from 2.  Positions are clipped to the box and all agents
    move synchronously.  *initial* positions, when given, replace the first
    agents of the random initial population.

    Uses exactly ``pop_size x (max_iters + 1)`` objective calls.
    """
    cfg = cfg or FoxConfig()
    pop, dim = cfg.pop_size, bounds.dim

    positions = np.vstack([bounds.sample(np.random.default_rng([cfg.seed, 0, i]), 1) for i in range(pop)])
    if initial is not None:
        initial = np.atleast_2d(np.asarray(initial, dtype=np.float64))
        if initial.shape[1] != dim:
            raise OptimizerError(f"Initial positions have {initial.shape[1]} dimensions, bounds have {dim}")
        count = min(len(initial), pop)
        positions[:count] = bounds.clip(initial[:count])

    fitness = evaluate_positions(objective, positions, n_jobs)
    best = int(np.argmin(fitness))
    best_x, best_fitness = positions[best].copy(), float(fitness[best])
    history = [best_fitness]
    min_t = 1.0

    for t in range(cfg.max_iters):
        a = 2.0 * (1.0 - t / cfg.max_iters)
        r, times, p, noise = _agent_draws(cfg.seed, t + 1, pop, dim)

        exploit = r >= 0.5
        mean_t = times.mean(axis=1)
        jump = 0.5 * GRAVITY * mean_t ** 2
        scale = np.where(p < C1_PROBABILITY, cfg.c1, cfg.c2)
        exploit_move = (0.5 * best_x)[None, :] * (jump * scale)[:, None]
        explore_move = best_x[None, :] + noise * (min_t * a)
        positions = bounds.clip(np.where(exploit[:, None], exploit_move, explore_move))
        if exploit.any():
            min_t = min(min_t, float(np.min(mean_t[exploit])) / 2.0)

        fitness = evaluate_positions(objective, positions, n_jobs)
        best = int(np.argmin(fitness))
        if fitness[best] < best_fitness:
            best_x, best_fitness = positions[best].copy(), float(fitness[best])
        history.append(best_fitness)

    return OptResult(best_x=best_x, best_fitness=best_fitness, history=history,
                     evaluations=pop * (cfg.max_iters + 1))


def random_search(
    objective: Objective,
    bounds: Bounds,
    budget: int,
    seed: int = DEFAULT_SEED,
    n_jobs: int | None = None,
) -> OptResult:
    """Best of *budget* uniform samples from the box.

    ``history`` holds the best fitness after every evaluation.
    """
    if budget < 1:
        raise OptimizerError(f"Random search needs a budget of at least 1, got {budget}")
    positions = bounds.sample(np.random.default_rng(seed), budget)
    fitness = evaluate_positions(objective, positions, n_jobs)
    best = int(np.argmin(fitness))
    return OptResult(best_x=positions[best].copy(), best_fitness=float(fitness[best]),
                     history=np.minimum.accumulate(fitness).tolist(), evaluations=budget)


class Optimizer(Protocol):
    """Anything that minimizes an objective on a box within an evaluation budget."""

    def __call__(self, objective: Objective, bounds: Bounds, budget: int, seed: int) -> OptResult:
        ...


@dataclass
class FoxRunner:
    """FOX with a fixed population, sized to an evaluation budget."""
    pop_size: int = 30
    c1: float = 0.18
    c2: float = 0.82
    n_jobs: Optional[int] = None

    @property
    def min_budget(self) -> int:
        return 2 * self.pop_size

    def effective_budget(self, budget: int) -> int:
        """Evaluations actually spent: whole populations only."""
        return self.pop_size * (budget // self.pop_size)

    def __call__(self, objective: Objective, bounds: Bounds, budget: int, seed: int) -> OptResult:
        max_iters = budget // self.pop_size - 1
        if max_iters < 1:
            raise OptimizerError(
                f"Budget {budget} is too small for one FOX iteration with {self.pop_size} agents "
                f"(need {self.min_budget})")
        cfg = FoxConfig(pop_size=self.pop_size, max_iters=max_iters, seed=seed, c1=self.c1, c2=self.c2)
        return fox_optimize(objective, bounds, cfg, n_jobs=self.n_jobs)
