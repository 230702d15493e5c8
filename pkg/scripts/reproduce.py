"""Staged reproduction of every experiment config with manifest-based caching."""

from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence

from scripts.config import ExperimentConfig, load_experiment_config
from scripts.experiments import COMMANDS
from scripts.manifest import ROOT, build_manifest, load_manifest, write_manifest

LOGGER = logging.getLogger("scripts.reproduce")

CONFIG_DIR = ROOT / "config"
STAGE_ORDER = ("generate", "train", "eval", "coverage", "curves", "conformal", "compare")
# stages that evaluate the model written by 'train'
TRAINED_MODEL_STAGES = ("coverage", "curves", "conformal")


@dataclass
class StageResult:
    command: str
    status: str
    outputs: List[str]


def _stage_cache_hit(cfg: ExperimentConfig, out_dir: Path, command: str, upstream_reran: bool) -> bool:
    if upstream_reran:
        return False
    previous = load_manifest(out_dir, command)
    if not previous or previous.get("config_sha256") != cfg.digest():
        return False
    outputs = previous.get("outputs", {})
    return bool(outputs) and all(Path(name).exists() for name in outputs)


def _stage_kwargs(command: str, out_dir: Path) -> Dict[str, Any]:
    if command in TRAINED_MODEL_STAGES:
        return {"model": str(out_dir / "model.json")}
    return {}


def reproduce_config(cfg: ExperimentConfig, stages: Sequence[str], force_refresh: bool = False) -> List[StageResult]:
    out_dir = cfg.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    results: List[StageResult] = []
    upstream_reran = force_refresh
    for command in stages:
        if command == "compare" and not cfg.section("compare").get("variants"):
            continue
        if _stage_cache_hit(cfg, out_dir, command, upstream_reran):
            LOGGER.info(" - [%s/%s] cache hit", cfg.name, command)
            outputs = sorted(load_manifest(out_dir, command)["outputs"])
            results.append(StageResult(command, "cache_hit", outputs))
            continue
        LOGGER.info(" - [%s/%s] running", cfg.name, command)
        kwargs = _stage_kwargs(command, out_dir)
        paths = COMMANDS[command](cfg, out_dir, **kwargs)
        write_manifest(out_dir, build_manifest(command, cfg.digest(), cfg.source, cfg.seed, paths, extra=kwargs))
        upstream_reran = True
        results.append(StageResult(command, "executed", [p.as_posix() for p in paths]))
    return results


def run_reproduce(
    config_paths: Sequence[Path] | None = None,
    stages: Sequence[str] = STAGE_ORDER,
    force_refresh: bool = False,
) -> Dict[str, List[StageResult]]:
    unknown = [s for s in stages if s not in STAGE_ORDER]
    if unknown:
        raise ValueError(f"Unknown stages {unknown}. Expected a subset of: {list(STAGE_ORDER)}")
    ordered = [s for s in STAGE_ORDER if s in stages]
    paths = list(config_paths) if config_paths else sorted(CONFIG_DIR.glob("*.yaml"))
    summary: Dict[str, List[StageResult]] = {}
    for path in paths:
        cfg = load_experiment_config(path)
        LOGGER.info("Reproducing %s (%s)", cfg.name, path)
        summary[cfg.name] = reproduce_config(cfg, ordered, force_refresh)
    for name, results in summary.items():
        LOGGER.info("%s: %s", name, ", ".join(f"{r.command}={r.status}" for r in results))
    return summary


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Run every experiment config stage by stage")
    parser.add_argument("--config", type=Path, action="append", default=None, help="Config file (repeatable); default all")
    parser.add_argument("--stages", nargs="+", default=list(STAGE_ORDER), choices=list(STAGE_ORDER))
    parser.add_argument("--force-refresh", action="store_true", help="Ignore cached stage outputs")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(asctime)s | %(levelname)s | %(message)s")
    run_reproduce(args.config, args.stages, args.force_refresh)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
