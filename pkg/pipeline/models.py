"""
Pydantic models for pipeline configuration.
"""
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

from core.config import DEFAULT_OUTPUT_DIR, DEFAULT_SEED
from tune.space import SearchSpace

MODEL_NAMES = ("forest_baseline", "forest_tuned", "gbt_baseline", "gbt_tuned")


class PipelineConfig(BaseModel):
    """Everything a pipeline run depends on, apart from the thread count."""

    input: Optional[str] = Field(
        None, description="CSV feature table; None runs on the bundled synthetic dataset")
    label_column: str = Field("label", description="Name of the label column")
    synthetic_features: int = Field(107, ge=1, description="Feature count of the synthetic dataset")
    top_k: int = Field(50, ge=1, description="Number of Gini-ranked features kept")
    importance_trees: int = Field(200, ge=1, description="Trees of the auxiliary importance forest")
    normalizer: Literal["zscore", "minmax"] = Field("zscore", description="Feature normalization")
    test_fraction: float = Field(0.2, gt=0.0, lt=1.0, description="Held-out test fraction")
    stratified: bool = Field(True, description="Stratify the train/test split")
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2 ** 32, description="Seed every random decision derives from")
    models: List[Literal["forest", "gbt"]] = Field(
        default_factory=lambda: ["forest", "gbt"], min_length=1, description="Model kinds to run")
    tune: bool = Field(True, description="Tune every model kind with FOX")
    fox_pop_size: int = Field(20, ge=2, description="FOX population for tuning")
    fox_max_iters: int = Field(50, ge=1, description="FOX iterations for tuning")
    folds: int = Field(5, ge=2, description="Cross-validation folds of the tuning objective")
    tune_metric: Literal["accuracy", "f1_weighted"] = Field("accuracy", description="Tuning objective metric")
    forest_space: Optional[SearchSpace] = Field(None, description="Forest search space override")
    gbt_space: Optional[SearchSpace] = Field(None, description="gbt search space override")
    leakage_mode: Literal["safe", "paper-order"] = Field(
        "safe", description="safe: rank/select/normalize on train only; paper-order (alias pre-split): "
                            "on all rows, before the split")
    explain: bool = Field(True, description="Explain the best model on the test rows")
    explain_rows: Optional[int] = Field(None, ge=1, description="Explain only the first N test rows")
    max_features_exact: int = Field(15, ge=1, description="Exact Shapley enumeration limit")
    n_permutations: int = Field(200, ge=1, description="Permutations of sampled Shapley values")
    output_dir: str = Field(DEFAULT_OUTPUT_DIR, description="Directory receiving the artifact bundle")

    @field_validator('input')
    @classmethod
    def input_exists(cls, value):
        if value is not None and not Path(value).is_file():
            raise ValueError(f"Input file does not exist: '{value}'")
        return value

    @field_validator('forest_space', 'gbt_space')
    @classmethod
    def space_kind_matches(cls, value, info):
        expected = info.field_name.split('_')[0]
        if value is not None and value.model_kind != expected:
            raise ValueError(f"{info.field_name} must be a {expected} search space")
        return value

    @field_validator('leakage_mode', mode='before')
    @classmethod
    def leakage_alias(cls, value):
        return "paper-order" if value == "pre-split" else value
