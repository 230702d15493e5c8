"""CSV dataset files: header x_0..x_{d-1},y and float64 values with 17 significant digits."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pandas as pd

from data_pipeline.schema import Dataset, DatasetFormatError, dataset_from_frame, frame_from_dataset

FLOAT_FORMAT = "%.17g"


def write_csv(path: str | Path, dataset: Dataset) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(f".{target.name}.tmp")
    frame_from_dataset(dataset).to_csv(tmp, index=False, float_format=FLOAT_FORMAT)
    os.replace(tmp, target)
    return target


def read_csv(path: str | Path) -> Dataset:
    """Load a dataset; malformed rows are reported with their 1-based line number."""

    csv_path = Path(path)
    if not csv_path.exists():
        raise FileNotFoundError(f"Dataset file not found: {csv_path}")
    try:
        raw = pd.read_csv(csv_path, dtype=str, keep_default_na=False)
    except pd.errors.ParserError as exc:
        raise DatasetFormatError(f"{csv_path}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise DatasetFormatError(f"{csv_path}: file has no header row") from exc

    numeric = raw.apply(pd.to_numeric, errors="coerce")
    bad_rows = np.flatnonzero(numeric.isna().any(axis=1).to_numpy())
    if bad_rows.size:
        # line 1 is the header
        line = int(bad_rows[0]) + 2
        fields = raw.iloc[int(bad_rows[0])].to_dict()
        raise DatasetFormatError(f"{csv_path}: line {line}: missing or non-numeric field in {fields}")
    try:
        return dataset_from_frame(numeric.astype(float))
    except DatasetFormatError as exc:
        raise DatasetFormatError(f"{csv_path}: {exc}") from exc
