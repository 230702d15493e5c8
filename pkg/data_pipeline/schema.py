"""Canonical tabular contract for datasets: inputs x_0..x_{d-1} and one output column y."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np
import pandas as pd
from pandas.api.types import is_numeric_dtype

from submodular.size_functions import GroundSet

OUTPUT_COLUMN = "y"


class DatasetFormatError(ValueError):
    """Malformed dataset file or frame; messages carry 1-based file line numbers when known."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Inputs X (n, d) and outputs y (n,): class labels, or real values for cell ground sets."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.size:
            raise ValueError(f"dataset has {X.shape[0]} inputs but {y.size} outputs")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def dim(self) -> int:
        return int(self.X.shape[1])

    def labels(self, ground_set: GroundSet) -> np.ndarray:
        """Ground-set element of each output (cell index for regression ground sets)."""

        if ground_set.cells is not None:
            return ground_set.cells.locate(self.y)
        if not np.all(np.equal(np.mod(self.y, 1), 0)):
            raise DatasetFormatError("classification outputs must be integer labels")
        labels = self.y.astype(int)
        if labels.size and (labels.min() < 0 or labels.max() >= ground_set.size):
            raise DatasetFormatError(f"labels must lie in 0..{ground_set.size - 1}")
        return labels

    def subset(self, idx: np.ndarray) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx])


def feature_columns(dim: int) -> List[str]:
    return [f"x_{j}" for j in range(dim)]


def get_dataset_validation_errors(df: pd.DataFrame) -> List[str]:
    """Return schema validation errors for a dataset frame."""

    errors: List[str] = []
    columns = list(df.columns)
    if not columns or columns[-1] != OUTPUT_COLUMN:
        errors.append(f"Last column must be '{OUTPUT_COLUMN}', got {columns[-1:] or 'nothing'}")
        return errors
    expected = feature_columns(len(columns) - 1)
    if columns[:-1] != expected:
        errors.append(f"Input columns must be {expected}, got {columns[:-1]}")
    if len(columns) < 2:
        errors.append("Dataset needs at least one input column")

    for col in columns:
        if len(df) and not is_numeric_dtype(df[col]):
            errors.append(f"Column '{col}' must be numeric dtype.")
            continue
        bad = np.flatnonzero(~np.isfinite(df[col].to_numpy(dtype=float))) if len(df) else []
        if len(bad):
            errors.append(f"Column '{col}' has {len(bad)} missing or non-finite values (first at row {int(bad[0])})")
    return errors


def dataset_from_frame(df: pd.DataFrame) -> Dataset:
    errors = get_dataset_validation_errors(df)
    if errors:
        raise DatasetFormatError("Dataset schema validation failed: " + " | ".join(errors))
    X = df[feature_columns(df.shape[1] - 1)].to_numpy(dtype=float)
    return Dataset(X.reshape(len(df), df.shape[1] - 1), df[OUTPUT_COLUMN].to_numpy(dtype=float))


def frame_from_dataset(dataset: Dataset) -> pd.DataFrame:
    frame = pd.DataFrame(dataset.X, columns=feature_columns(dataset.dim))
    frame[OUTPUT_COLUMN] = dataset.y
    return frame
