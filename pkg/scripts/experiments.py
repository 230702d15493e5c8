"""Experiment commands behind the CLI: each takes a validated config and an output directory."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from coverage.conformal import adaptive_lambdas, conformal_sets, conformalize, conformity_scores, label_scores
from coverage.report import coverage_report
from data_pipeline.generators import DataGenerator, rng_stream
from data_pipeline.loaders import save_dataset
from data_pipeline.schema import Dataset
from losses.area import area_table, summarize_areas
from losses.choquet import empirical_choquet_risk
from losses.curves import INTERPOLANTS, averaged_curve, build_curve, count_components, curve_frame
from scripts.config import ExperimentConfig
from solvers.predictor import LinearPredictor, load_model, predictor_scores, save_model, with_metadata, write_text_atomic
from solvers.selection import select_regularization, train_predictor
from submodular.separable import separable_min
from submodular.size_functions import SizeFunction

LOGGER = logging.getLogger("scripts.experiments")

FLOAT_FORMAT = "%.17g"
SPLITS = ("train", "test", "calibration")
ORACLE_MODEL = "oracle"
ZERO_MODEL = "zero"
PROBABILITY_FLOOR = 1e-12
SUMMARY_COLUMNS = ("area_plus_mean", "area_minus_mean", "area_mid_mean", "choquet_risk", "components_mean")


class IncompatibleModelError(ValueError):
    """A model file was trained for another ground set, size function or input dimension."""


def write_frame(path: Path, frame: pd.DataFrame) -> Path:
    write_text_atomic(path, frame.to_csv(index=False, float_format=FLOAT_FORMAT))
    return path


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    write_text_atomic(path, json.dumps(payload, indent=2, sort_keys=True, default=float))
    return path


def draw_split(cfg: ExperimentConfig, generator: DataGenerator, replication: int, split: str) -> Dataset:
    """The dataset of one (replication, split) pair; identical to the files written by 'generate'."""

    return generator.sample(cfg.sample_size(split), rng_stream(cfg.seed, replication, split))


def oracle_scores(V: SizeFunction, cond: np.ndarray, smoothing: float = 0.0) -> np.ndarray:
    """Population-optimal scores: argmin v(f) + 1/2 sum_y (pi_y + eps M_y) f_y^2 per input."""

    weights = np.atleast_2d(np.asarray(cond, dtype=float)) + smoothing * V.dominated_measure().weights[None, :]
    weights = np.maximum(weights, PROBABILITY_FLOOR)
    return np.vstack([separable_min(V, q) for q in weights]) if weights.shape[0] else np.zeros((0, V.k))


@dataclass(frozen=True, eq=False)
class ScoreModel:
    """What a command evaluates: a trained predictor, the oracle, or the all-zero table."""

    name: str
    size_function: SizeFunction
    smoothing: float
    generator: DataGenerator
    predictor: LinearPredictor | None = None

    def scores(self, X: np.ndarray) -> np.ndarray:
        if self.name == ORACLE_MODEL:
            return oracle_scores(self.size_function, self.generator.true_conditional(X), self.smoothing)
        if self.name == ZERO_MODEL:
            return np.zeros((np.asarray(X).shape[0], self.size_function.k))
        return predictor_scores(self.predictor, X)


def check_compatible(predictor: LinearPredictor, cfg: ExperimentConfig) -> None:
    generator = cfg.generator()
    V = cfg.size_function(generator.ground_set)
    problems: List[str] = []
    if predictor.ground_set is not None and predictor.ground_set.to_dict() != generator.ground_set.to_dict():
        problems.append(f"ground set {predictor.ground_set.to_dict()} != {generator.ground_set.to_dict()}")
    if predictor.kind == "scores" and predictor.n_outputs != generator.k:
        problems.append(f"model has {predictor.n_outputs} outputs but k={generator.k}")
    if predictor.size_function is not None and predictor.size_function.fingerprint() != V.fingerprint():
        problems.append("model was trained for a different size function")
    pivot_inputs = predictor.feature_map.pivot_inputs
    if predictor.feature_map.rank and pivot_inputs.shape[1] != generator.dim:
        problems.append(f"model inputs have dimension {pivot_inputs.shape[1]} but data has {generator.dim}")
    if problems:
        raise IncompatibleModelError("Incompatible model: " + " | ".join(problems))


def fit_replication(cfg: ExperimentConfig, replication: int) -> Tuple[LinearPredictor, pd.DataFrame | None]:
    """Train on one replication's train split; the ridge strength comes from config or 5-fold CV."""

    generator = cfg.generator()
    spec = cfg.training_spec()
    data = draw_split(cfg, generator, replication, "train")
    labels = data.labels(generator.ground_set)
    y_values = data.y if generator.ground_set.ordered else None
    loss = cfg.section("loss")
    table = None
    reg = cfg.reg
    if reg is None:
        reg, table = select_regularization(
            spec,
            data.X,
            labels,
            grid=cfg.reg_grid,
            n_folds=int(loss.get("cv_folds", 5)),
            seed=cfg.seed + replication,
            criterion=str(loss.get("criterion", "area_mid")),
            y_values=y_values,
        )
    predictor = train_predictor(spec, data.X, labels, reg, y_values, rng_stream(cfg.seed, replication, "sgd"))
    predictor = with_metadata(predictor, replication=replication, seed=cfg.seed, config_sha256=cfg.digest())
    return predictor, table


def resolve_model(cfg: ExperimentConfig, model: str | None, replication: int = 0) -> ScoreModel:
    generator = cfg.generator()
    V = cfg.size_function(generator.ground_set)
    smoothing = float(cfg.section("loss").get("smoothing", 0.0))
    if model in (ORACLE_MODEL, ZERO_MODEL):
        return ScoreModel(model, V, smoothing if model == ORACLE_MODEL else 0.0, generator)
    if model is None:
        predictor, _ = fit_replication(cfg, replication)
    else:
        predictor = load_model(model)
        check_compatible(predictor, cfg)
    return ScoreModel(predictor.loss, V, predictor.smoothing, generator, predictor)


def cmd_generate(cfg: ExperimentConfig, out_dir: Path, file_format: str = "csv") -> List[Path]:
    generator = cfg.generator()
    paths = []
    for replication in range(cfg.replications):
        for split in SPLITS:
            data = draw_split(cfg, generator, replication, split)
            path = out_dir / "data" / f"rep{replication:02d}_{split}.{file_format}"
            paths.append(save_dataset(path, data))
    paths.append(write_json(out_dir / "generator.json", generator.to_dict()))
    LOGGER.info("Wrote %d dataset files under %s", len(paths) - 1, out_dir / "data")
    return paths


def cmd_train(cfg: ExperimentConfig, out_dir: Path) -> List[Path]:
    predictor, table = fit_replication(cfg, 0)
    paths = [save_model(out_dir / "model.json", predictor)]
    if table is not None:
        paths.append(write_frame(out_dir / "cv_scores.csv", table))
    LOGGER.info("Trained %s predictor (reg=%.1e) -> %s", predictor.loss, predictor.regularization, paths[0])
    return paths


def _eval_replication(cfg: ExperimentConfig, model: str | None, replication: int) -> Dict[str, float]:
    handle = resolve_model(cfg, model, replication)
    generator = handle.generator
    test = draw_split(cfg, generator, replication, "test")
    labels = test.labels(generator.ground_set)
    scores = handle.scores(test.X)
    row: Dict[str, float] = {"replication": replication}
    row.update(summarize_areas(area_table(handle.size_function, scores, labels)))
    row["choquet_risk"] = empirical_choquet_risk(handle.size_function, scores, labels, handle.smoothing)
    if generator.ground_set.ordered:
        lambdas = adaptive_lambdas(handle.size_function, scores, cfg.alpha, handle.smoothing)
        sets = np.minimum(scores, 0.0) >= -lambdas[:, None]
        row["components_mean"] = float(np.mean([count_components(s) for s in sets]))
    if handle.predictor is not None:
        row["reg"] = handle.predictor.regularization
    return row


def _spread(frame: pd.DataFrame, columns: List[str]) -> Dict[str, float]:
    summary: Dict[str, float] = {"replications": int(len(frame))}
    for col in columns:
        values = frame[col].to_numpy(dtype=float)
        std = float(values.std(ddof=1)) if values.size > 1 else 0.0
        summary[f"{col}_mean"] = float(values.mean())
        summary[f"{col}_std"] = std
        summary[f"{col}_stderr"] = std / float(np.sqrt(values.size))
    return summary


def cmd_eval(cfg: ExperimentConfig, out_dir: Path, model: str | None = None) -> List[Path]:
    """Area losses on each replication's test split; one fresh model per replication unless one is given."""

    rows = Parallel(n_jobs=cfg.n_jobs)(delayed(_eval_replication)(cfg, model, r) for r in range(cfg.replications))
    frame = pd.DataFrame(rows)
    columns = [c for c in SUMMARY_COLUMNS if c in frame]
    summary = _spread(frame, columns)
    LOGGER.info(
        "area_mid %.6f +/- %.6f over %d replications",
        summary.get("area_mid_mean_mean", float("nan")),
        summary.get("area_mid_mean_stderr", float("nan")),
        len(frame),
    )
    return [write_frame(out_dir / "areas.csv", frame), write_json(out_dir / "areas_summary.json", summary)]


def _coverage_inputs(cfg: ExperimentConfig, generator: DataGenerator) -> Dict[str, Any]:
    """Exact evaluation on the generator's x-grid when it has one, else an empirical test split."""

    section = cfg.section("coverage")
    if generator.dim == 1:
        X = generator.grid(int(section.get("grid_points", 200)))
        return {"X": X, "cond": generator.true_conditional(X), "weights": generator.grid_weights(X), "y": None}
    test = draw_split(cfg, generator, 0, "test")
    return {"X": test.X, "cond": None, "weights": None, "y": test.labels(generator.ground_set)}


def cmd_coverage(cfg: ExperimentConfig, out_dir: Path, model: str | None = None, alpha: float | None = None) -> List[Path]:
    alpha = cfg.alpha if alpha is None else alpha
    handle = resolve_model(cfg, model)
    generator = handle.generator
    inputs = _coverage_inputs(cfg, generator)
    report = coverage_report(
        handle.size_function,
        handle.scores(inputs["X"]),
        alpha,
        x=inputs["X"],
        cond=inputs["cond"],
        y=inputs["y"],
        smoothing=handle.smoothing,
        weights=inputs["weights"],
        ordered=generator.ground_set.ordered,
        n_bins=int(cfg.section("coverage").get("n_bins", 20)),
    )
    payload = {**report.to_dict(), "model": handle.name}
    return [write_frame(out_dir / "coverage.csv", report.frame), write_json(out_dir / "coverage.json", payload)]


def top_ranked_frame(handle: ScoreModel, X: np.ndarray) -> pd.DataFrame:
    """Highest-scoring element at each input; ties go to the lowest index."""

    scores = handle.scores(X)
    frame = pd.DataFrame(scores, columns=[f"score_{j}" for j in range(scores.shape[1])])
    frame.insert(0, "top", np.argmax(scores, axis=1))
    frame.insert(0, "x", np.asarray(X, dtype=float)[:, 0])
    return frame


def cmd_curves(cfg: ExperimentConfig, out_dir: Path, model: str | None = None) -> List[Path]:
    """Per-input (size, miscoverage) curves under the exact conditional, and their averages."""

    section = cfg.section("curves")
    handle = resolve_model(cfg, model)
    generator = handle.generator
    test = draw_split(cfg, generator, 0, "test")
    scores = handle.scores(test.X)
    cond = generator.true_conditional(test.X)
    curves = [build_curve(handle.size_function, f, c) for f, c in zip(scores, cond)]

    per_x = []
    for i in range(min(int(section.get("per_x", 5)), len(curves))):
        frame = curve_frame(curves[i])
        frame.insert(0, "x_index", i)
        if generator.ground_set.ordered:
            frame["components"] = [count_components(s) for s in curves[i].sets]
        per_x.append(frame)

    n_points = int(section.get("n_points", 1001))
    interpolants = section.get("interpolants", list(INTERPOLANTS))
    averaged = pd.concat([averaged_curve(curves, n_points, name) for name in interpolants], ignore_index=True)
    paths = [
        write_frame(out_dir / "curves_per_x.csv", pd.concat(per_x, ignore_index=True) if per_x else pd.DataFrame()),
        write_frame(out_dir / "curves_averaged.csv", averaged),
    ]
    if generator.dim == 1:
        grid = generator.grid(int(cfg.section("coverage").get("grid_points", 200)))
        paths.append(write_frame(out_dir / "top_ranked.csv", top_ranked_frame(handle, grid)))
    return paths


def _conformal_trial(handle: ScoreModel, cfg: ExperimentConfig, alpha: float, convention: str, trial: int) -> Dict[str, float]:
    generator = handle.generator
    V = handle.size_function
    calib = draw_split(cfg, generator, trial, "calibration")
    test = draw_split(cfg, generator, trial, "test")
    cal_scores = handle.scores(calib.X)
    cal_conf = conformity_scores(cal_scores, adaptive_lambdas(V, cal_scores, alpha, handle.smoothing), convention)
    calibration = conformalize(label_scores(cal_conf, calib.labels(generator.ground_set)), alpha, convention)

    test_scores = handle.scores(test.X)
    test_conf = conformity_scores(test_scores, adaptive_lambdas(V, test_scores, alpha, handle.smoothing), convention)
    sets = conformal_sets(calibration, test_conf)
    labels = test.labels(generator.ground_set)
    return {
        "trial": trial,
        "threshold": calibration.threshold,
        "full_set": calibration.full_set,
        "coverage": float(np.mean(sets[np.arange(labels.size), labels])),
        "set_size": float(np.mean(V.evaluate_masks(sets))),
        "calibration": calibration,
    }


def cmd_conformal(cfg: ExperimentConfig, out_dir: Path, model: str | None = None, alpha: float | None = None) -> List[Path]:
    """Split-conformal calibration of the adaptive thresholds, checked on test splits."""

    section = cfg.section("coverage")
    alpha = cfg.alpha if alpha is None else alpha
    convention = str(section.get("convention", "additive"))
    handle = resolve_model(cfg, model)
    trials = int(section.get("trials", 1))
    rows = Parallel(n_jobs=cfg.n_jobs)(
        delayed(_conformal_trial)(handle, cfg, alpha, convention, t) for t in range(trials)
    )
    calibration = rows[0].pop("calibration")
    for row in rows[1:]:
        row.pop("calibration")
    frame = pd.DataFrame(rows)
    summary = {
        "alpha": alpha,
        "convention": convention,
        "model": handle.name,
        "calibration": calibration.to_dict(),
        "trials": trials,
        "coverage_mean": float(frame["coverage"].mean()),
        "coverage_stderr": float(frame["coverage"].std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0,
        "set_size_mean": float(frame["set_size"].mean()),
        "target_coverage": 1.0 - alpha,
    }
    LOGGER.info("Conformal coverage %.4f (target %.4f) over %d trial(s)", summary["coverage_mean"], 1.0 - alpha, trials)
    paths = [write_json(out_dir / "conformal.json", summary), write_frame(out_dir / "conformal_trials.csv", frame)]
    if handle.predictor is not None:
        calibrated = with_metadata(handle.predictor, conformal=calibration.to_dict())
        paths.append(save_model(out_dir / "model_conformal.json", calibrated))
    return paths


def cmd_compare(cfg: ExperimentConfig, out_dir: Path) -> List[Path]:
    """Every configured variant over every replication; per-run table and per-variant spread."""

    variants = cfg.variants()
    tasks = [(name, variant, r) for name, variant in variants for r in range(variant.replications)]
    rows = Parallel(n_jobs=cfg.n_jobs)(delayed(_eval_replication)(variant, None, r) for _, variant, r in tasks)
    for (name, _, _), row in zip(tasks, rows):
        row["variant"] = name
    frame = pd.DataFrame(rows)
    columns = [c for c in SUMMARY_COLUMNS if c in frame]
    summary = pd.DataFrame(
        [{"variant": name, **_spread(frame[frame["variant"] == name], columns)} for name, _ in variants]
    )
    return [write_frame(out_dir / "compare.csv", frame), write_frame(out_dir / "compare_summary.csv", summary)]


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "coverage": cmd_coverage,
    "curves": cmd_curves,
    "conformal": cmd_conformal,
    "compare": cmd_compare,
}
