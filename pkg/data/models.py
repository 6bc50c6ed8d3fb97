"""
Pydantic models for dataset splitting.
"""
from pydantic import BaseModel, Field

from core.config import DEFAULT_SEED


class SplitSpec(BaseModel):
    """How to partition a dataset into training and test rows."""

    test_fraction: float = Field(0.2, gt=0.0, lt=1.0, description="Fraction of rows assigned to the test split")
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2 ** 64, description="Seed of the shuffling RNG")
    stratified: bool = Field(True, description="Preserve class proportions in both splits")
