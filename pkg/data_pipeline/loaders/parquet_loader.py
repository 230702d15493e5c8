"""Parquet dataset files through pyarrow."""

from __future__ import annotations

import os
from pathlib import Path

import pandas as pd

from data_pipeline.schema import Dataset, DatasetFormatError, dataset_from_frame, frame_from_dataset


def write_parquet(path: str | Path, dataset: Dataset) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(f".{target.name}.tmp")
    frame_from_dataset(dataset).to_parquet(tmp, engine="pyarrow", index=False)
    os.replace(tmp, target)
    return target


def read_parquet(path: str | Path) -> Dataset:
    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(f"Dataset file not found: {source}")
    frame = pd.read_parquet(source, engine="pyarrow")
    try:
        return dataset_from_frame(frame)
    except DatasetFormatError as exc:
        raise DatasetFormatError(f"{source}: {exc}") from exc
