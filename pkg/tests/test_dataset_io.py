from __future__ import annotations

import numpy as np
import pandas as pd
import pytest

from data_pipeline.loaders import load_dataset, save_dataset
from data_pipeline.schema import Dataset, DatasetFormatError, get_dataset_validation_errors
from submodular.size_functions import GroundSet


def _dataset(seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    return Dataset(rng.normal(size=(25, 2)), rng.integers(3, size=25))


def test_csv_round_trip_is_exact(tmp_path) -> None:
    original = _dataset()
    restored = load_dataset(save_dataset(tmp_path / "train.csv", original))
    np.testing.assert_array_equal(restored.X, original.X)
    np.testing.assert_array_equal(restored.y, original.y)
    header = (tmp_path / "train.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "x_0,x_1,y"


def test_parquet_round_trip(tmp_path) -> None:
    original = _dataset(1)
    restored = load_dataset(save_dataset(tmp_path / "nested" / "train.parquet", original))
    np.testing.assert_array_equal(restored.X, original.X)
    np.testing.assert_array_equal(restored.labels(GroundSet(3)), original.y.astype(int))


def test_bad_rows_report_their_line(tmp_path) -> None:
    path = tmp_path / "bad.csv"
    path.write_text("x_0,y\n1.0,0\nabc,1\n", encoding="utf-8")
    with pytest.raises(DatasetFormatError, match="line 3"):
        load_dataset(path)

    path.write_text("x_0,y\n1.0,0\n2.0,\n", encoding="utf-8")
    with pytest.raises(DatasetFormatError, match="line 3"):
        load_dataset(path)


def test_files_must_exist_and_carry_the_schema(tmp_path) -> None:
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path / "missing.csv")
    with pytest.raises(ValueError, match="Unsupported dataset file extension"):
        load_dataset(tmp_path / "data.txt")

    path = tmp_path / "columns.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(DatasetFormatError, match="Last column must be 'y'"):
        load_dataset(path)

    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(DatasetFormatError, match="no header row"):
        load_dataset(empty)


def test_schema_validation_messages() -> None:
    frame = pd.DataFrame({"x_1": [1.0], "y": [0.0]})
    assert get_dataset_validation_errors(frame) == ["Input columns must be ['x_0'], got ['x_1']"]
    frame = pd.DataFrame({"x_0": [1.0, np.inf], "y": [0.0, 1.0]})
    errors = get_dataset_validation_errors(frame)
    assert errors == ["Column 'x_0' has 1 missing or non-finite values (first at row 1)"]


def test_labels_must_be_integers_in_range() -> None:
    with pytest.raises(DatasetFormatError, match="integer labels"):
        Dataset(np.zeros((2, 1)), np.array([0.5, 1.0])).labels(GroundSet(3))
    with pytest.raises(DatasetFormatError, match="0..2"):
        Dataset(np.zeros((2, 1)), np.array([0.0, 3.0])).labels(GroundSet(3))
    with pytest.raises(ValueError, match="2 inputs but 3 outputs"):
        Dataset(np.zeros((2, 1)), np.zeros(3))
