from __future__ import annotations

import json

import pandas as pd

from scripts.cli import EXIT_CONFIG, EXIT_OK, main


def test_full_command_sequence(write_config, tmp_path) -> None:
    config = str(write_config())
    out = tmp_path / "out"

    assert main(["generate", "--config", config]) == EXIT_OK
    assert (out / "data" / "rep00_train.csv").exists()
    assert (out / "data" / "rep00_calibration.csv").exists()

    assert main(["train", "--config", config]) == EXIT_OK
    model = out / "model.json"
    assert model.exists()

    assert main(["eval", "--config", config, "--model", str(model)]) == EXIT_OK
    areas = pd.read_csv(out / "areas.csv")
    assert len(areas) == 1
    assert (areas["area_minus_mean"] <= areas["area_plus_mean"]).all()

    assert main(["coverage", "--config", config, "--model", "oracle"]) == EXIT_OK
    coverage = json.loads((out / "coverage.json").read_text(encoding="utf-8"))
    assert coverage["exact"] is True
    assert abs(coverage["summary"]["coverage_randomized_mean"] - 0.9) < 1e-6

    assert main(["curves", "--config", config, "--model", "zero"]) == EXIT_OK
    assert (out / "curves_averaged.csv").exists()
    assert (out / "top_ranked.csv").exists()

    assert main(["conformal", "--config", config, "--model", str(model), "--alpha", "0.2"]) == EXIT_OK
    conformal = json.loads((out / "conformal.json").read_text(encoding="utf-8"))
    assert conformal["calibration"]["rank"] == 33
    assert (out / "model_conformal.json").exists()

    manifest = json.loads((out / "train_manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "train"
    assert model.as_posix() in manifest["outputs"]


def test_invalid_config_exits_with_config_code(write_config) -> None:
    config = str(write_config(loss={"name": "hinge"}))
    assert main(["train", "--config", config]) == EXIT_CONFIG


def test_missing_or_incompatible_model_exits_with_config_code(write_config, tmp_path) -> None:
    config = str(write_config())
    assert main(["eval", "--config", config, "--model", str(tmp_path / "missing.json")]) == EXIT_CONFIG

    assert main(["train", "--config", config]) == EXIT_OK
    other = str(write_config("other.yaml", size_function={"variant": "concave_card", "phi": "sqrt"}))
    model = str(tmp_path / "out" / "model.json")
    assert main(["eval", "--config", other, "--model", model]) == EXIT_CONFIG


def test_seed_and_output_overrides(write_config, tmp_path) -> None:
    config = str(write_config())
    elsewhere = tmp_path / "elsewhere"
    assert main(["generate", "--config", config, "--seed", "5", "--out", str(elsewhere)]) == EXIT_OK
    manifest = json.loads((elsewhere / "generate_manifest.json").read_text(encoding="utf-8"))
    assert manifest["seed"] == 5
