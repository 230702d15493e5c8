"""Command-line front end for the set-prediction experiments."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np

from data_pipeline.schema import DatasetFormatError
from scripts.config import ConfigError, ExperimentConfig, load_experiment_config
from scripts.experiments import COMMANDS, IncompatibleModelError
from scripts.manifest import build_manifest, write_manifest

LOGGER = logging.getLogger("scripts.cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
MODEL_COMMANDS = ("eval", "coverage", "curves", "conformal")
ALPHA_COMMANDS = ("coverage", "conformal")


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        overrides.setdefault("experiment", {})["seed"] = args.seed
    if args.out is not None:
        overrides.setdefault("experiment", {})["output_dir"] = str(args.out)
    if getattr(args, "alpha", None) is not None:
        overrides.setdefault("coverage", {})["alpha"] = args.alpha
    return overrides


def run_command(command: str, cfg: ExperimentConfig, args: argparse.Namespace) -> List[Path]:
    out_dir = cfg.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    LOGGER.info("Running '%s' for %s -> %s", command, cfg.name, out_dir)
    kwargs: Dict[str, Any] = {}
    if command in MODEL_COMMANDS:
        kwargs["model"] = args.model
    if command in ALPHA_COMMANDS:
        kwargs["alpha"] = args.alpha
    if command == "generate":
        kwargs["file_format"] = args.format
    outputs = COMMANDS[command](cfg, out_dir, **kwargs)
    manifest = build_manifest(
        command,
        cfg.digest(),
        cfg.source,
        cfg.seed,
        outputs,
        extra={"model": getattr(args, "model", None), "replications": cfg.replications},
    )
    path = write_manifest(out_dir, manifest)
    for output in outputs:
        LOGGER.info("  wrote %s", output)
    LOGGER.info("Manifest: %s", path)
    return outputs


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Convex set prediction with submodular size functions")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=(COMMANDS[name].__doc__ or name).strip().splitlines()[0])
        cmd.add_argument("--config", required=True, help="Experiment YAML file")
        cmd.add_argument("--seed", type=int, default=None, help="Override experiment.seed")
        cmd.add_argument("--out", type=Path, default=None, help="Override experiment.output_dir")
        if name in MODEL_COMMANDS:
            cmd.add_argument(
                "--model",
                default=None,
                help="Model JSON file, 'oracle' or 'zero'; omitted means train one per replication",
            )
        if name in ALPHA_COMMANDS:
            cmd.add_argument("--alpha", type=float, default=None, help="Target miscoverage level")
        if name == "generate":
            cmd.add_argument("--format", default="csv", choices=["csv", "parquet"])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(asctime)s | %(levelname)s | %(message)s")
    try:
        cfg = load_experiment_config(args.config, _overrides(args))
        run_command(args.command, cfg, args)
    except (ConfigError, DatasetFormatError, IncompatibleModelError, FileNotFoundError) as exc:
        LOGGER.error("%s", exc)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        LOGGER.error("Numerical failure: %s", exc)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
