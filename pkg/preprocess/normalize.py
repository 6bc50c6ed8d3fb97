"""
Feature normalization: z-score standardization and min-max scaling.

Statistics are fitted on a reference dataset (the training split by default)
and applied unchanged to any other dataset; values outside the fitted range
are not clipped.  Constant columns map to 0.
"""
from __future__ import annotations

from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from core.errors import PreprocessError
from data.dataset import Dataset

NormalizerKind = Literal["zscore", "minmax"]


class NormalizerParams(BaseModel):
    """Fitted per-feature normalization statistics."""

    kind: NormalizerKind = Field(..., description="zscore or minmax")
    feature_names: List[str] = Field(default_factory=list, description="Features the statistics belong to")
    mean: Optional[List[float]] = Field(None, description="Per-feature mean (zscore)")
    std: Optional[List[float]] = Field(None, description="Per-feature population standard deviation (zscore)")
    minimum: Optional[List[float]] = Field(None, description="Per-feature minimum (minmax)")
    maximum: Optional[List[float]] = Field(None, description="Per-feature maximum (minmax)")

    @model_validator(mode='after')
    def check_statistics(self):
        if self.kind == "zscore":
            if self.mean is None or self.std is None or len(self.mean) != len(self.std):
                raise ValueError("zscore parameters need mean and std of equal length")
            if any(s < 0 for s in self.std):
                raise ValueError("std must be non-negative")
        else:
            if self.minimum is None or self.maximum is None or len(self.minimum) != len(self.maximum):
                raise ValueError("minmax parameters need minimum and maximum of equal length")
            if any(hi < lo for lo, hi in zip(self.minimum, self.maximum)):
                raise ValueError("maximum must not be below minimum")
        if self.feature_names and len(self.feature_names) != self.n_features:
            raise ValueError("feature_names length must match the statistics")
        return self

    @property
    def n_features(self) -> int:
        return len(self.mean if self.kind == "zscore" else self.minimum)

    def to_json_string(self, indent: int = 2) -> str:
        return self.model_dump_json(indent=indent)

    @classmethod
    def from_json_string(cls, text: str) -> 'NormalizerParams':
        return cls.model_validate_json(text)


def fit_normalizer(train: Dataset, kind: NormalizerKind = "zscore") -> NormalizerParams:
    """Fit per-feature statistics on *train*.

    Constant columns record std 0 (zscore) or max == min (minmax) exactly.

    Raises:
        PreprocessError: if *train* is empty or *kind* is unknown.
    """
    if train.n_rows == 0:
        raise PreprocessError("Cannot fit a normalizer on an empty dataset")
    X = train.features
    names = list(train.feature_names)
    if kind == "zscore":
        constant = np.ptp(X, axis=0) == 0
        mean = X.mean(axis=0)
        mean[constant] = X[0, constant]
        std = X.std(axis=0)
        std[constant] = 0.0
        return NormalizerParams(kind=kind, feature_names=names, mean=mean.tolist(), std=std.tolist())
    if kind == "minmax":
        return NormalizerParams(kind=kind, feature_names=names,
                                minimum=X.min(axis=0).tolist(), maximum=X.max(axis=0).tolist())
    raise PreprocessError(f"Unknown normalizer kind '{kind}'")


def apply_normalizer(ds: Dataset, params: NormalizerParams) -> Dataset:
    """Normalize *ds* with fitted *params*.

    Raises:
        PreprocessError: if the feature count does not match.
    """
    if params.n_features != ds.n_features:
        raise PreprocessError(
            f"Normalizer fitted on {params.n_features} features, dataset has {ds.n_features}")
    X = ds.features
    if params.kind == "zscore":
        center = np.asarray(params.mean)
        scale = np.asarray(params.std)
    else:
        center = np.asarray(params.minimum)
        scale = np.asarray(params.maximum) - center
    degenerate = scale <= 0
    safe = np.where(degenerate, 1.0, scale)
    out = (X - center) / safe
    out[:, degenerate] = 0.0
    return ds.with_features(out)
