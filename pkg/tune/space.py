"""
Hyperparameter search spaces and their unit-box encoding.

A point ``x`` in ``[0, 1]^d`` decodes to one concrete model configuration:
real parameters map linearly, log_real parameters map linearly in log space
and integer parameters are rounded half up and clamped to their range.
"""
from __future__ import annotations

import math
from typing import Dict, List, Literal, Sequence, Type, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from boost.model import GbtConfig
from core.config import DEFAULT_SEED
from core.errors import TuneError
from core.io import load_config_file
from forest.model import ForestConfig

ModelKind = Literal["forest", "gbt"]
ModelConfig = Union[ForestConfig, GbtConfig]

CONFIG_TYPES: Dict[str, Type[BaseModel]] = {'forest': ForestConfig, 'gbt': GbtConfig}


class ParamSpec(BaseModel):
    """One tunable hyperparameter and its range."""

    name: str = Field(..., description="Field name on the model config")
    kind: Literal["integer", "real", "log_real"] = Field(..., description="How the unit interval maps onto the range")
    lo: float = Field(..., description="Lower end of the range")
    hi: float = Field(..., description="Upper end of the range")

    @model_validator(mode='after')
    def check_range(self):
        if not self.lo < self.hi:
            raise ValueError(f"Parameter '{self.name}': lo ({self.lo}) must be below hi ({self.hi})")
        if self.kind == "log_real" and self.lo <= 0:
            raise ValueError(f"Parameter '{self.name}': log_real ranges need lo > 0")
        return self


class SearchSpace(BaseModel):
    """Ordered parameters searched for one model kind."""

    model_kind: ModelKind = Field(..., description="forest or gbt")
    params: List[ParamSpec] = Field(..., min_length=1, description="Searched parameters, in encoding order")

    @model_validator(mode='after')
    def check_params(self):
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError("Parameter names must be unique")
        fields = set(CONFIG_TYPES[self.model_kind].model_fields) - {'seed'}
        unknown = [n for n in names if n not in fields]
        if unknown:
            raise ValueError(f"Not tunable for {self.model_kind}: {', '.join(unknown)}")
        return self

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def names(self) -> List[str]:
        return [p.name for p in self.params]


def default_space(model_kind: str) -> SearchSpace:
    """Search space covering the baseline defaults of *model_kind*."""
    if model_kind == "forest":
        params = [
            ParamSpec(name="n_trees", kind="integer", lo=10, hi=300),
            ParamSpec(name="max_depth", kind="integer", lo=2, hi=20),
            ParamSpec(name="min_samples_leaf", kind="integer", lo=1, hi=10),
            ParamSpec(name="max_features_fraction", kind="real", lo=0.1, hi=1.0),
        ]
    elif model_kind == "gbt":
        params = [
            ParamSpec(name="n_rounds", kind="integer", lo=20, hi=300),
            ParamSpec(name="learning_rate", kind="log_real", lo=1e-3, hi=0.5),
            ParamSpec(name="max_depth", kind="integer", lo=2, hi=10),
            ParamSpec(name="min_child_weight", kind="real", lo=0, hi=10),
            ParamSpec(name="reg_lambda", kind="log_real", lo=1e-3, hi=10),
            ParamSpec(name="gamma", kind="real", lo=0, hi=5),
            ParamSpec(name="subsample", kind="real", lo=0.5, hi=1.0),
            ParamSpec(name="colsample", kind="real", lo=0.5, hi=1.0),
        ]
    else:
        raise TuneError(f"Unknown model kind '{model_kind}'")
    return SearchSpace(model_kind=model_kind, params=params)


def load_space(path: str) -> SearchSpace:
    """Read a search-space override from a JSON or YAML file."""
    try:
        return SearchSpace.model_validate(load_config_file(path))
    except ValidationError as e:
        raise TuneError(f"Invalid search space in '{path}': {e}")


def baseline_config(model_kind: str, seed: int = DEFAULT_SEED) -> ModelConfig:
    """The untuned default configuration of *model_kind*."""
    if model_kind not in CONFIG_TYPES:
        raise TuneError(f"Unknown model kind '{model_kind}'")
    return CONFIG_TYPES[model_kind](seed=seed)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def decode_value(spec: ParamSpec, u: float) -> Union[int, float]:
    if u <= 0.0:
        value = spec.lo
    elif u >= 1.0:
        value = spec.hi
    elif spec.kind == "log_real":
        value = math.exp(math.log(spec.lo) + u * (math.log(spec.hi) - math.log(spec.lo)))
    else:
        value = spec.lo + u * (spec.hi - spec.lo)
    if spec.kind == "integer":
        return int(min(max(_round_half_up(value), math.ceil(spec.lo)), math.floor(spec.hi)))
    return float(min(max(value, spec.lo), spec.hi))


def decode_values(x: Sequence[float], space: SearchSpace) -> Dict[str, Union[int, float]]:
    """Parameter values of the unit-box point *x*.

    Raises:
        TuneError: if *x* has the wrong length or leaves the unit box.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if len(x) != space.dim:
        raise TuneError(f"Point has {len(x)} coordinates, search space has {space.dim}")
    if not np.all(np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise TuneError(f"Point {x.tolist()} lies outside the unit box")
    return {spec.name: decode_value(spec, float(u)) for spec, u in zip(space.params, x)}


def decode(x: Sequence[float], space: SearchSpace, seed: int = DEFAULT_SEED) -> ModelConfig:
    """The model configuration at *x*; unsearched fields keep their defaults."""
    values = decode_values(x, space)
    return CONFIG_TYPES[space.model_kind](seed=seed, **values)


def encode(config: ModelConfig, space: SearchSpace) -> np.ndarray:
    """Unit-box point of *config*, clipped to the box.

    Unlimited depth encodes as the top of the depth range and an unset
    feature fraction as the bottom of its range.
    """
    point = []
    for spec in space.params:
        value = getattr(config, spec.name)
        if value is None:
            point.append(1.0 if spec.name == "max_depth" else 0.0)
            continue
        if spec.kind == "log_real":
            value = max(float(value), spec.lo)
            u = (math.log(value) - math.log(spec.lo)) / (math.log(spec.hi) - math.log(spec.lo))
        else:
            u = (float(value) - spec.lo) / (spec.hi - spec.lo)
        point.append(u)
    return np.clip(np.asarray(point, dtype=np.float64), 0.0, 1.0)
