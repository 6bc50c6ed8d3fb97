"""
Tabular datasets: loading, validation, serialization and train/test splits.

A ``Dataset`` is an immutable, row-major matrix of finite reals with integer
class labels.  Class indices are assigned by first appearance of each label
string in the file, so they are reproducible from file order alone.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from core.errors import DatasetError
from data.linter import lint_table, read_table
from data.models import SplitSpec


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix, labels and the names that go with them."""
    features: np.ndarray
    labels: np.ndarray
    feature_names: Tuple[str, ...]
    class_names: Tuple[str, ...]

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if features.ndim == 1 and features.size == 0:
            features = features.reshape(0, len(self.feature_names))
        if features.ndim != 2:
            raise DatasetError(f"Feature matrix must be 2-D, got {features.ndim} dimension(s)")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'feature_names', tuple(str(n) for n in self.feature_names))
        object.__setattr__(self, 'class_names', tuple(str(n) for n in self.class_names))
        self._validate()

    def _validate(self) -> None:
        n_rows, n_cols = self.features.shape
        if len(self.labels) != n_rows:
            raise DatasetError(f"Label count {len(self.labels)} does not match row count {n_rows}")
        if len(self.feature_names) != n_cols:
            raise DatasetError(f"Got {len(self.feature_names)} feature names for {n_cols} columns")
        if any(name == "" for name in self.feature_names):
            raise DatasetError("Feature names must be non-empty")
        if len(set(self.feature_names)) != len(self.feature_names):
            dupes = sorted({n for n in self.feature_names if self.feature_names.count(n) > 1})
            raise DatasetError(f"Duplicate feature names: {', '.join(dupes)}")
        if len(set(self.class_names)) != len(self.class_names):
            raise DatasetError("Duplicate class names")
        if n_rows and not np.all(np.isfinite(self.features)):
            r, c = np.argwhere(~np.isfinite(self.features))[0]
            raise DatasetError(f"Non-finite value at row {r + 1}, column '{self.feature_names[c]}'")
        if n_rows and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise DatasetError(f"Labels must lie in [0, {len(self.class_names)})")

    # ------------------------------------------------------------------
    # Shape
    # ------------------------------------------------------------------

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def __len__(self) -> int:
        return self.n_rows

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.feature_names == other.feature_names
                and self.class_names == other.class_names
                and np.array_equal(self.labels, other.labels)
                and np.array_equal(self.features, other.features))

    __hash__ = None

    # ------------------------------------------------------------------
    # Derived datasets
    # ------------------------------------------------------------------

    def subset(self, rows: Sequence[int]) -> 'Dataset':
        """Return the rows at *rows*, keeping every class name."""
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.features[rows], self.labels[rows], self.feature_names, self.class_names)

    def select_columns(self, columns: Sequence[int]) -> 'Dataset':
        """Return the dataset restricted to *columns*, in the given order."""
        columns = [int(c) for c in columns]
        names = tuple(self.feature_names[c] for c in columns)
        return Dataset(self.features[:, columns], self.labels, names, self.class_names)

    def with_features(self, features: np.ndarray) -> 'Dataset':
        """Return a copy with the feature matrix replaced (same shape)."""
        return Dataset(features, self.labels, self.feature_names, self.class_names)

    def align_to(self, feature_names: Sequence[str], class_names: Sequence[str]) -> 'Dataset':
        """Reorder columns and remap labels to match a trained model.

        Raises:
            DatasetError: if a required feature or an observed class is unknown.
        """
        index = {name: i for i, name in enumerate(self.feature_names)}
        missing = [n for n in feature_names if n not in index]
        if missing:
            raise DatasetError(f"Dataset lacks feature column(s): {', '.join(missing)}")
        class_index = {name: i for i, name in enumerate(class_names)}
        present = {self.class_names[k] for k in np.unique(self.labels)}
        unknown = sorted(present - set(class_index))
        if unknown:
            raise DatasetError(f"Dataset contains unknown class label(s): {', '.join(unknown)}")
        mapping = np.array([class_index.get(name, -1) for name in self.class_names], dtype=np.int64)
        columns = [index[n] for n in feature_names]
        labels = mapping[self.labels] if self.n_rows else self.labels
        return Dataset(self.features[:, columns], labels, tuple(feature_names), tuple(class_names))

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict:
        return {
            'feature_names': list(self.feature_names),
            'class_names': list(self.class_names),
            'rows': self.features.tolist(),
            'labels': self.labels.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'Dataset':
        try:
            names = data['feature_names']
            rows = data['rows']
            features = np.array(rows, dtype=np.float64).reshape(len(rows), len(names))
            return cls(features, data['labels'], names, data['class_names'])
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, DatasetError):
                raise
            raise DatasetError(f"Invalid dataset document: {e}")

    def to_json_string(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json_string(cls, text: str) -> 'Dataset':
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise DatasetError(f"Invalid JSON in dataset document: {e}")


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def load_csv(path: str, label_column: str = "label", class_names: Sequence[str] | None = None) -> Dataset:
    """Load a CSV feature table.

    Columns keep header order minus the label column.  Class indices follow
    *class_names* when given (so subsets of one table share an indexing),
    then the first appearance of each further distinct label string.

    Raises:
        DatasetError: on a missing file, missing header or label column, a
            non-numeric or non-finite cell (row and column are named), a
            duplicate feature name, or an empty table.
    """
    header, rows = read_table(path)
    issues = [i for i in lint_table(header, rows, label_column) if i.severity == "ERROR"]
    if issues:
        extra = f" (and {len(issues) - 1} more issue(s))" if len(issues) > 1 else ""
        raise DatasetError(f"{path}: {issues[0].format()}{extra}")

    label_idx = header.index(label_column)
    feature_cols = [c for c in range(len(header)) if c != label_idx]
    class_index: Dict[str, int] = {}
    for name in class_names or ():
        class_index.setdefault(str(name).strip(), len(class_index))
    labels: List[int] = []
    for row in rows:
        name = row[label_idx].strip()
        labels.append(class_index.setdefault(name, len(class_index)))
    features = np.array([[float(row[c]) for c in feature_cols] for row in rows], dtype=np.float64)
    return Dataset(features, labels, [header[c] for c in feature_cols], list(class_index))


def read_class_names(path: str, label_column: str = "label") -> List[str]:
    """Class names of a CSV table in first-appearance order."""
    return list(load_csv(path, label_column).class_names)


def write_csv(ds: Dataset, path: str, label_column: str = "label") -> None:
    """Write a dataset as CSV; reloading it with ``load_csv`` is exact."""
    if label_column in ds.feature_names:
        raise DatasetError(f"Label column '{label_column}' collides with a feature name")
    frame = pd.DataFrame(ds.features, columns=list(ds.feature_names))
    frame[label_column] = [ds.class_names[k] for k in ds.labels]
    frame.to_csv(path, index=False, encoding='utf-8', lineterminator='\n')


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------

def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _stratified_allocation(sizes: List[int], total: int) -> List[int]:
    """Number of test rows per eligible class (each class has >= 2 rows).

    Starts from round-half-up of each class's share of *total*, clamped so
    every class keeps at least one row on each side, then moves toward
    *total* one row at a time (largest deviation first, ties by class order).
    """
    grand = sum(sizes)
    ideal = [total * s / grand for s in sizes]
    alloc = [min(max(_round_half_up(q), 1), s - 1) for q, s in zip(ideal, sizes)]
    while sum(alloc) > total:
        candidates = [k for k in range(len(sizes)) if alloc[k] > 1]
        if not candidates:
            break
        k = max(candidates, key=lambda j: (alloc[j] - ideal[j], -j))
        alloc[k] -= 1
    while sum(alloc) < total:
        candidates = [k for k in range(len(sizes)) if alloc[k] < sizes[k] - 1]
        if not candidates:
            break
        k = max(candidates, key=lambda j: (ideal[j] - alloc[j], -j))
        alloc[k] += 1
    return alloc


def split_indices(ds: Dataset, spec: SplitSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Partition row indices into (train, test), both sorted ascending.

    Raises:
        DatasetError: if the dataset has fewer than 2 rows.
    """
    n = ds.n_rows
    if n < 2:
        raise DatasetError(f"Cannot split a dataset with {n} row(s); at least 2 are required")
    rng = np.random.default_rng(spec.seed)
    n_test = min(max(_round_half_up(spec.test_fraction * n), 1), n - 1)

    members = [np.flatnonzero(ds.labels == k) for k in range(ds.n_classes)]
    eligible = [k for k, m in enumerate(members) if len(m) >= 2]

    if spec.stratified and eligible:
        alloc = _stratified_allocation([len(members[k]) for k in eligible], n_test)
        test: List[int] = []
        for k, count in zip(eligible, alloc):
            shuffled = rng.permutation(members[k])
            test.extend(shuffled[:count].tolist())
        test_idx = np.array(sorted(test), dtype=np.int64)
    else:
        test_idx = np.sort(rng.permutation(n)[:n_test])

    mask = np.zeros(n, dtype=bool)
    mask[test_idx] = True
    return np.flatnonzero(~mask), test_idx


def split(ds: Dataset, spec: SplitSpec) -> Tuple[Dataset, Dataset]:
    """Split *ds* into (train, test) per *spec*; deterministic for a fixed seed."""
    train_idx, test_idx = split_indices(ds, spec)
    return ds.subset(train_idx), ds.subset(test_idx)


def class_distribution(ds: Dataset) -> List[int]:
    """Row count per class index; sums to the number of rows."""
    return np.bincount(ds.labels, minlength=ds.n_classes).astype(int).tolist()
