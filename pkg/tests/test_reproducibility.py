from __future__ import annotations

import pytest

from scripts.reproduce import run_reproduce


def test_reproduce_runs_every_stage_then_hits_the_cache(write_config, tmp_path) -> None:
    config = write_config()
    stages = ("generate", "train", "eval", "coverage", "conformal")

    first = run_reproduce([config], stages=stages)["tiny"]
    assert [r.command for r in first] == list(stages)
    assert all(r.status == "executed" for r in first)
    train_csv = tmp_path / "out" / "data" / "rep00_train.csv"
    original = train_csv.read_bytes()

    second = run_reproduce([config], stages=stages)["tiny"]
    assert all(r.status == "cache_hit" for r in second)

    third = run_reproduce([config], stages=("generate",), force_refresh=True)["tiny"]
    assert third[0].status == "executed"
    assert train_csv.read_bytes() == original


def test_unknown_stage_is_rejected(write_config) -> None:
    with pytest.raises(ValueError, match="Unknown stages"):
        run_reproduce([write_config()], stages=("deploy",))
