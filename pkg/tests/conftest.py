from __future__ import annotations

from pathlib import Path

import pytest
import yaml


def tiny_config(out_dir: Path, **sections) -> dict:
    raw = {
        "experiment": {
            "name": "tiny",
            "seed": 11,
            "replications": 1,
            "output_dir": str(out_dir),
            "n_train": 60,
            "n_test": 80,
            "n_calibration": 40,
        },
        "generator": {"name": "gauss1d"},
        "kernel": {"family": "exponential"},
        "size_function": {"variant": "modular"},
        "loss": {"name": "choquet", "smoothing": 0.01, "reg": 0.01, "max_rank": 10},
        "coverage": {"alpha": 0.1, "grid_points": 25},
        "curves": {"n_points": 51, "per_x": 2},
    }
    raw.update(sections)
    return raw


@pytest.fixture
def write_config(tmp_path):
    def _write(name: str = "tiny.yaml", **sections) -> Path:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(tiny_config(tmp_path / "out", **sections)), encoding="utf-8")
        return path

    return _write
