"""Dataset file dispatch by extension."""

from __future__ import annotations

from pathlib import Path

from data_pipeline.schema import Dataset

from .csv_loader import read_csv, write_csv
from .parquet_loader import read_parquet, write_parquet


def _format(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix == ".parquet":
        return "parquet"
    raise ValueError(f"Unsupported dataset file extension '{suffix}' for {path}")


def load_dataset(path: str | Path) -> Dataset:
    source = Path(path)
    if _format(source) == "csv":
        return read_csv(source)
    return read_parquet(source)


def save_dataset(path: str | Path, dataset: Dataset) -> Path:
    target = Path(path)
    if _format(target) == "csv":
        return write_csv(target, dataset)
    return write_parquet(target, dataset)


__all__ = ["load_dataset", "read_csv", "read_parquet", "save_dataset", "write_csv", "write_parquet"]
