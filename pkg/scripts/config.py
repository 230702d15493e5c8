"""Experiment configuration: one YAML file per experiment, validated field by field."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple

import yaml

from coverage.conformal import CONVENTIONS
from data_pipeline.generators import DataGenerator, build_generator
from kernels.functions import KernelSpec
from losses.curves import INTERPOLANTS
from solvers.irls import DEFAULT_ETA_FLOOR
from solvers.selection import CRITERIA, DEFAULT_REG_GRID, LOSSES, TRAINERS, TrainingSpec
from submodular.size_functions import GroundSet, SizeFunction, build_size_function

SECTIONS = ("experiment", "generator", "kernel", "size_function", "loss", "coverage", "curves", "compare")
LINEAR_SOLVERS = ("auto", "direct", "cg")


class ConfigError(ValueError):
    """Config schema violation; the message lists every offending field."""


def _load_yaml(path: str | Path) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as handle:
        cfg = yaml.safe_load(handle)
    if not isinstance(cfg, dict):
        raise ConfigError(f"Config must be a mapping: {path}")
    return cfg


def deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _check_number(errors: List[str], section: Dict[str, Any], prefix: str, key: str, low: float | None = None,
                  high: float | None = None, integer: bool = False, open_low: bool = False,
                  open_high: bool = False) -> None:
    if key not in section or section[key] is None:
        return
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or (integer and not isinstance(value, int)):
        errors.append(f"{prefix}.{key}: must be {'an integer' if integer else 'a number'}, got {value!r}")
        return
    if low is not None and (value <= low if open_low else value < low):
        errors.append(f"{prefix}.{key}: must be {'>' if open_low else '>='} {low}, got {value}")
    if high is not None and (value >= high if open_high else value > high):
        errors.append(f"{prefix}.{key}: must be {'<' if open_high else '<='} {high}, got {value}")


def _check_choice(errors: List[str], section: Dict[str, Any], prefix: str, key: str, choices: Tuple[str, ...]) -> None:
    if key in section and section[key] not in choices:
        errors.append(f"{prefix}.{key}: must be one of {list(choices)}, got {section[key]!r}")


def _section(errors: List[str], raw: Dict[str, Any], name: str) -> Dict[str, Any]:
    value = raw.get(name, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        errors.append(f"{name}: must be a mapping")
        return {}
    return value


def get_config_validation_errors(raw: Dict[str, Any]) -> List[str]:
    """Return every schema violation of a raw config mapping."""

    errors: List[str] = []
    unknown = sorted(set(raw) - set(SECTIONS))
    if unknown:
        errors.append(f"unknown sections {unknown}; expected a subset of {list(SECTIONS)}")

    experiment = _section(errors, raw, "experiment")
    _check_number(errors, experiment, "experiment", "seed", low=0, integer=True)
    _check_number(errors, experiment, "experiment", "replications", low=1, integer=True)
    _check_number(errors, experiment, "experiment", "n_jobs", integer=True)
    for key in ("n_train", "n_test", "n_calibration"):
        _check_number(errors, experiment, "experiment", key, low=1, integer=True)

    generator = _section(errors, raw, "generator")
    if "name" not in generator:
        errors.append("generator.name: required")
    ground_set: GroundSet | None = None
    if "name" in generator:
        try:
            ground_set = build_generator(generator).ground_set
        except (ValueError, TypeError) as exc:
            errors.append(f"generator: {exc}")

    kernel = _section(errors, raw, "kernel")
    try:
        KernelSpec.from_dict(kernel)
    except (ValueError, TypeError) as exc:
        errors.append(f"kernel: {exc}")

    size_spec = _section(errors, raw, "size_function")
    if ground_set is not None:
        try:
            build_size_function(size_spec, ground_set.size)
        except (ValueError, TypeError, KeyError) as exc:
            errors.append(f"size_function: {exc}")

    loss = _section(errors, raw, "loss")
    _check_choice(errors, loss, "loss", "name", LOSSES)
    _check_choice(errors, loss, "loss", "trainer", TRAINERS)
    _check_choice(errors, loss, "loss", "criterion", CRITERIA)
    _check_choice(errors, loss, "loss", "linear_solver", LINEAR_SOLVERS)
    _check_number(errors, loss, "loss", "smoothing", low=0)
    _check_number(errors, loss, "loss", "reg", low=0, open_low=True)
    _check_number(errors, loss, "loss", "blend", low=0, high=1)
    _check_number(errors, loss, "loss", "laplacian_strength", low=0)
    _check_number(errors, loss, "loss", "icd_tol", low=0, high=1, open_low=True, open_high=True)
    _check_number(errors, loss, "loss", "eta_floor", low=0, open_low=True)
    _check_number(errors, loss, "loss", "cv_folds", low=2, integer=True)
    _check_number(errors, loss, "loss", "max_iter", low=1, integer=True)
    _check_number(errors, loss, "loss", "max_rank", low=1, integer=True)
    _check_number(errors, loss, "loss", "sgd_steps", low=1, integer=True)
    _check_number(errors, loss, "loss", "sgd_batch", low=1, integer=True)
    _check_number(errors, loss, "loss", "sgd_step", low=0, open_low=True)
    grid = loss.get("reg_grid")
    if grid is not None and (not isinstance(grid, list) or not grid or any(
        isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0 for v in grid
    )):
        errors.append("loss.reg_grid: must be a non-empty list of positive numbers")
    if loss.get("name") == "interval" and ground_set is not None and not ground_set.ordered:
        errors.append("loss.name: 'interval' needs a regression generator with ordered cells")

    coverage = _section(errors, raw, "coverage")
    _check_number(errors, coverage, "coverage", "alpha", low=0, high=1, open_low=True)
    if coverage.get("alpha") == 1:
        errors.append("coverage.alpha: must be < 1")
    _check_choice(errors, coverage, "coverage", "convention", CONVENTIONS)
    _check_number(errors, coverage, "coverage", "grid_points", low=2, integer=True)
    _check_number(errors, coverage, "coverage", "n_bins", low=1, integer=True)
    _check_number(errors, coverage, "coverage", "trials", low=1, integer=True)

    curves = _section(errors, raw, "curves")
    _check_number(errors, curves, "curves", "n_points", low=2, integer=True)
    _check_choice(errors, curves, "curves", "interpolant", INTERPOLANTS)

    compare = _section(errors, raw, "compare")
    variants = compare.get("variants", [])
    if not isinstance(variants, list):
        errors.append("compare.variants: must be a list")
    else:
        names = []
        for i, variant in enumerate(variants):
            if not isinstance(variant, dict) or "name" not in variant:
                errors.append(f"compare.variants[{i}]: must be a mapping with a name")
                continue
            names.append(variant["name"])
            overrides = {key: value for key, value in variant.items() if key != "name"}
            bad = sorted(set(overrides) - set(SECTIONS) | ({"compare"} & set(overrides)))
            if bad:
                errors.append(f"compare.variants[{i}]: cannot override sections {bad}")
                continue
            nested = get_config_validation_errors(deep_merge({k: v for k, v in raw.items() if k != "compare"}, overrides))
            errors.extend(f"compare.variants[{i}] ({variant['name']}): {msg}" for msg in nested)
        if len(set(names)) != len(names):
            errors.append("compare.variants: names must be unique")
    return errors


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment config; sections stay available as plain mappings."""

    raw: Dict[str, Any]
    source: str | None = None

    def __post_init__(self) -> None:
        errors = get_config_validation_errors(self.raw)
        if errors:
            raise ConfigError("Config validation failed: " + " | ".join(errors))

    def section(self, name: str) -> Dict[str, Any]:
        return dict(self.raw.get(name) or {})

    @property
    def name(self) -> str:
        return str(self.section("experiment").get("name", Path(self.source).stem if self.source else "experiment"))

    @property
    def seed(self) -> int:
        return int(self.section("experiment").get("seed", 0))

    @property
    def replications(self) -> int:
        return int(self.section("experiment").get("replications", 1))

    @property
    def n_jobs(self) -> int:
        return int(self.section("experiment").get("n_jobs", 1))

    @property
    def output_dir(self) -> Path:
        return Path(str(self.section("experiment").get("output_dir", f"outputs/{self.name}")))

    def sample_size(self, split: str) -> int:
        defaults = {"train": 1000, "test": 1000, "calibration": 200}
        return int(self.section("experiment").get(f"n_{split}", defaults[split]))

    @property
    def alpha(self) -> float:
        return float(self.section("coverage").get("alpha", 0.1))

    @property
    def loss_name(self) -> str:
        return str(self.section("loss").get("name", "choquet"))

    @property
    def reg(self) -> float | None:
        value = self.section("loss").get("reg")
        return None if value is None else float(value)

    @property
    def reg_grid(self) -> Tuple[float, ...]:
        grid = self.section("loss").get("reg_grid")
        return DEFAULT_REG_GRID if grid is None else tuple(float(v) for v in grid)

    def generator(self) -> DataGenerator:
        return build_generator(self.section("generator"))

    def size_function(self, ground_set: GroundSet) -> SizeFunction:
        return build_size_function(self.section("size_function"), ground_set.size)

    def training_spec(self) -> TrainingSpec:
        ground_set = self.generator().ground_set
        loss = self.section("loss")
        max_rank = loss.get("max_rank")
        return TrainingSpec(
            loss=self.loss_name,
            kernel=KernelSpec.from_dict(self.section("kernel")),
            size_function=self.size_function(ground_set),
            ground_set=ground_set,
            smoothing=float(loss.get("smoothing", 0.0)),
            trainer=str(loss.get("trainer", "auto")),
            icd_tol=float(loss.get("icd_tol", 1e-3)),
            max_rank=None if max_rank is None else int(max_rank),
            intercept=bool(loss.get("intercept", True)),
            eta_floor=float(loss.get("eta_floor", DEFAULT_ETA_FLOOR)),
            max_iter=int(loss.get("max_iter", 500)),
            linear_solver=str(loss.get("linear_solver", "auto")),
            laplacian_strength=float(loss.get("laplacian_strength", 0.0)),
            post_cluster=bool(loss.get("post_cluster", False)),
            blend=float(loss.get("blend", 0.1)),
            alpha=self.alpha,
            sgd_steps=int(loss.get("sgd_steps", 5000)),
            sgd_step=float(loss.get("sgd_step", 1.0)),
            sgd_batch=int(loss.get("sgd_batch", 32)),
        )

    def variants(self) -> List[Tuple[str, "ExperimentConfig"]]:
        """Named configs for 'compare'; the base config alone when no variants are listed."""

        base = {key: value for key, value in self.raw.items() if key != "compare"}
        listed = self.section("compare").get("variants", [])
        if not listed:
            return [(self.name, ExperimentConfig(base, self.source))]
        out = []
        for variant in listed:
            overrides = {key: value for key, value in variant.items() if key != "name"}
            out.append((str(variant["name"]), ExperimentConfig(deep_merge(base, overrides), self.source)))
        return out

    def with_overrides(self, overrides: Dict[str, Any]) -> "ExperimentConfig":
        return ExperimentConfig(deep_merge(self.raw, overrides), self.source)

    def digest(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_experiment_config(path: str | Path, overrides: Dict[str, Any] | None = None) -> ExperimentConfig:
    """Load, merge CLI overrides into, and validate one experiment config file."""

    source = Path(path)
    if not source.exists():
        raise ConfigError(f"Config file not found: {source}")
    try:
        raw = _load_yaml(source)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: invalid YAML: {exc}") from exc
    if overrides:
        raw = deep_merge(raw, overrides)
    return ExperimentConfig(raw, str(source))
