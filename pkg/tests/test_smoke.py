from __future__ import annotations

import importlib
from pathlib import Path

import pytest

from scripts.config import load_experiment_config


def test_packages_import_cleanly() -> None:
    for module in ["submodular", "losses", "kernels", "solvers", "coverage", "data_pipeline", "scripts.cli"]:
        importlib.import_module(module)


@pytest.mark.parametrize("path", sorted(Path("config").glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_validate(path: Path) -> None:
    cfg = load_experiment_config(path)
    spec = cfg.training_spec()
    assert spec.size_function.k == cfg.generator().k
    for _, variant in cfg.variants():
        variant.training_spec()
