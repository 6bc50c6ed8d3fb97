"""
Synthetic radiomic-style dataset generator.

Produces seeded Gaussian class clusters whose columns carry the names of the
107 standard radiomic descriptors and whose class balance echoes a
75-patient brain-metastasis cohort, so every workflow can be demonstrated
without clinical data.
"""
from __future__ import annotations

from typing import List, Sequence

import numpy as np

from core.config import DEFAULT_SEED
from core.errors import DatasetError
from data.dataset import Dataset

COHORT_CLASSES = ("NSCLC", "SCLC", "Breast", "Melanoma", "Ovarian", "Kidney", "Uterine")
COHORT_COUNTS = (38, 5, 22, 6, 2, 1, 1)

RADIOMIC_FAMILIES = {
    "firstorder": [
        "10Percentile", "90Percentile", "Energy", "Entropy", "InterquartileRange", "Kurtosis",
        "Maximum", "MeanAbsoluteDeviation", "Mean", "Median", "Minimum", "Range",
        "RobustMeanAbsoluteDeviation", "RootMeanSquared", "Skewness", "TotalEnergy",
        "Uniformity", "Variance",
    ],
    "shape": [
        "Elongation", "Flatness", "LeastAxisLength", "MajorAxisLength", "Maximum2DDiameterColumn",
        "Maximum2DDiameterRow", "Maximum2DDiameterSlice", "Maximum3DDiameter", "MeshVolume",
        "MinorAxisLength", "Sphericity", "SurfaceArea", "SurfaceVolumeRatio", "VoxelVolume",
    ],
    "glcm": [
        "Autocorrelation", "ClusterProminence", "ClusterShade", "ClusterTendency", "Contrast",
        "Correlation", "DifferenceAverage", "DifferenceEntropy", "DifferenceVariance", "Id", "Idm",
        "Idmn", "Idn", "Imc1", "Imc2", "InverseVariance", "JointAverage", "JointEnergy",
        "JointEntropy", "MCC", "MaximumProbability", "SumAverage", "SumEntropy", "SumSquares",
    ],
    "glrlm": [
        "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized", "GrayLevelVariance",
        "HighGrayLevelRunEmphasis", "LongRunEmphasis", "LongRunHighGrayLevelEmphasis",
        "LongRunLowGrayLevelEmphasis", "LowGrayLevelRunEmphasis", "RunEntropy",
        "RunLengthNonUniformity", "RunLengthNonUniformityNormalized", "RunPercentage",
        "RunVariance", "ShortRunEmphasis", "ShortRunHighGrayLevelEmphasis",
        "ShortRunLowGrayLevelEmphasis",
    ],
    "glszm": [
        "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized", "GrayLevelVariance",
        "HighGrayLevelZoneEmphasis", "LargeAreaEmphasis", "LargeAreaHighGrayLevelEmphasis",
        "LargeAreaLowGrayLevelEmphasis", "LowGrayLevelZoneEmphasis", "SizeZoneNonUniformity",
        "SizeZoneNonUniformityNormalized", "SmallAreaEmphasis", "SmallAreaHighGrayLevelEmphasis",
        "SmallAreaLowGrayLevelEmphasis", "ZoneEntropy", "ZonePercentage", "ZoneVariance",
    ],
    "gldm": [
        "DependenceEntropy", "DependenceNonUniformity", "DependenceNonUniformityNormalized",
        "DependenceVariance", "GrayLevelNonUniformity", "GrayLevelVariance",
        "HighGrayLevelEmphasis", "LargeDependenceEmphasis", "LargeDependenceHighGrayLevelEmphasis",
        "LargeDependenceLowGrayLevelEmphasis", "LowGrayLevelEmphasis", "SmallDependenceEmphasis",
        "SmallDependenceHighGrayLevelEmphasis", "SmallDependenceLowGrayLevelEmphasis",
    ],
    "ngtdm": ["Busyness", "Coarseness", "Complexity", "Contrast", "Strength"],
}


def radiomic_feature_names(n_features: int = 107) -> List[str]:
    """Return *n_features* unique radiomic-style column names.

    The first 107 are the standard descriptors; further names repeat the list
    with a numeric suffix.
    """
    base = [f"original_{family}_{name}" for family, names in RADIOMIC_FAMILIES.items() for name in names]
    names = []
    for i in range(n_features):
        cycle, pos = divmod(i, len(base))
        names.append(base[pos] if cycle == 0 else f"{base[pos]}_{cycle}")
    return names


def make_radiomic_dataset(
    n_features: int = 107,
    class_counts: Sequence[int] = COHORT_COUNTS,
    class_names: Sequence[str] = COHORT_CLASSES,
    n_informative: int = 12,
    separation: float = 2.5,
    seed: int = DEFAULT_SEED,
) -> Dataset:
    """Generate seeded Gaussian clusters with radiomic-style features.

    The first *n_informative* columns get a class-specific mean offset of
    size *separation*; the remaining columns are class-independent noise.
    Each column is then given its own scale and location so raw values look
    like unnormalized measurements.  Rows are shuffled.
    """
    if len(class_counts) != len(class_names):
        raise DatasetError("class_counts and class_names must have the same length")
    if n_features < 1 or any(c < 0 for c in class_counts) or sum(class_counts) < 2:
        raise DatasetError("Need at least one feature and two samples")
    n_informative = min(n_informative, n_features)

    rng = np.random.default_rng(seed)
    n_classes = len(class_names)
    centers = np.zeros((n_classes, n_features))
    centers[:, :n_informative] = rng.normal(0.0, separation, size=(n_classes, n_informative))

    labels = np.repeat(np.arange(n_classes), class_counts)
    features = centers[labels] + rng.normal(0.0, 1.0, size=(len(labels), n_features))

    scale = np.exp(rng.uniform(-2.0, 4.0, size=n_features))
    location = rng.uniform(-50.0, 200.0, size=n_features)
    features = features * scale + location

    order = rng.permutation(len(labels))
    return Dataset(features[order], labels[order], radiomic_feature_names(n_features), list(class_names))
