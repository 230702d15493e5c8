"""Trainer dispatch and cross-validated choice of the ridge strength."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.model_selection import KFold

from kernels.features import DEFAULT_ICD_TOL, incomplete_cholesky
from kernels.functions import KernelSpec
from losses.area import area_table
from losses.choquet import DEFAULT_SMOOTHING, empirical_choquet_risk
from solvers.baselines import train_interval_baseline, train_softmax_baseline, train_square_baseline
from solvers.irls import DEFAULT_ETA_FLOOR, DEFAULT_MAX_ITER, LaplacianPenalty, train_concave_irls, train_cover_irls
from solvers.modular import train_modular
from solvers.post_cluster import DEFAULT_BLEND, check_decomposition, default_training_size_function
from solvers.predictor import LinearPredictor, predictor_scores
from solvers.sgd import StepSchedule, train_sgd
from submodular.size_functions import ConcaveCardinality, GroundSet, Modular, SetCover, SizeFunction

LOGGER = logging.getLogger("solvers.selection")

LOSSES = ("choquet", "square", "softmax", "interval")
TRAINERS = ("auto", "modular", "irls", "sgd")
CRITERIA = ("area_mid", "choquet")
DEFAULT_REG_GRID = tuple(float(v) for v in np.logspace(-6, 0, 7))


@dataclass(frozen=True)
class TrainingSpec:
    loss: str
    kernel: KernelSpec
    size_function: SizeFunction
    ground_set: GroundSet
    smoothing: float = DEFAULT_SMOOTHING
    trainer: str = "auto"
    icd_tol: float = DEFAULT_ICD_TOL
    max_rank: int | None = None
    intercept: bool = True
    eta_floor: float = DEFAULT_ETA_FLOOR
    max_iter: int = DEFAULT_MAX_ITER
    linear_solver: str = "auto"
    laplacian_strength: float = 0.0
    post_cluster: bool = False
    blend: float = DEFAULT_BLEND
    alpha: float = 0.1
    sgd_steps: int = 5000
    sgd_step: float = 1.0
    sgd_batch: int = 32

    def __post_init__(self) -> None:
        if self.loss not in LOSSES:
            raise ValueError(f"Unsupported loss '{self.loss}'. Expected one of: {list(LOSSES)}")
        if self.trainer not in TRAINERS:
            raise ValueError(f"Unsupported trainer '{self.trainer}'. Expected one of: {list(TRAINERS)}")
        if self.size_function.k != self.ground_set.size:
            raise ValueError(f"size function has k={self.size_function.k} but ground set has k={self.ground_set.size}")


def _laplacian(spec: TrainingSpec) -> LaplacianPenalty | None:
    if spec.laplacian_strength <= 0:
        return None
    width = spec.ground_set.cells.width if spec.ground_set.cells is not None else 1.0
    return LaplacianPenalty.chain(spec.ground_set.size, width=width, strength=spec.laplacian_strength)


def _train_choquet(
    spec: TrainingSpec,
    V: SizeFunction,
    X: np.ndarray,
    y: np.ndarray,
    feature_map,
    reg: float,
    rng: np.random.Generator | None,
) -> LinearPredictor:
    trainer = spec.trainer
    if trainer == "sgd":
        schedule = StepSchedule(initial=spec.sgd_step)
        return train_sgd(X, y, V, feature_map, reg, spec.smoothing, schedule, spec.sgd_steps, spec.sgd_batch, rng)
    # a modular V has no max terms, so IRLS reduces to the per-label systems
    if isinstance(V, Modular):
        return train_modular(X, y, V, feature_map, reg, spec.smoothing)
    if trainer == "modular":
        raise ValueError(f"trainer 'modular' cannot fit a '{V.variant}' size function")
    if isinstance(V, ConcaveCardinality):
        return train_concave_irls(
            X, y, V, feature_map, reg, spec.smoothing, spec.eta_floor, spec.max_iter, method=spec.linear_solver
        )
    if isinstance(V, SetCover):
        return train_cover_irls(
            X,
            y,
            V,
            feature_map,
            reg,
            spec.smoothing,
            _laplacian(spec),
            spec.eta_floor,
            spec.max_iter,
            method=spec.linear_solver,
        )
    raise ValueError(f"Unsupported size function variant '{type(V).__name__}'")


def train_predictor(
    spec: TrainingSpec,
    X: np.ndarray,
    y: np.ndarray,
    reg: float,
    y_values: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
) -> LinearPredictor:
    """Fit the feature map on X, then the predictor named by spec.loss."""

    feature_map = incomplete_cholesky(spec.kernel, X, tol=spec.icd_tol, max_rank=spec.max_rank, intercept=spec.intercept)
    V = spec.size_function
    k = spec.ground_set.size
    if spec.loss == "choquet":
        W = default_training_size_function(V, spec.blend) if spec.post_cluster else V
        if spec.post_cluster:
            check_decomposition(V, W)
        predictor = _train_choquet(spec, W, X, y, feature_map, reg, rng)
        return replace(
            predictor,
            ground_set=spec.ground_set,
            size_function=V,
            training_size_function=W if spec.post_cluster else None,
        )
    if spec.loss == "square":
        predictor = train_square_baseline(X, y, k, feature_map, reg)
    elif spec.loss == "softmax":
        predictor = train_softmax_baseline(X, y, k, feature_map, reg)
    else:
        if y_values is None:
            if spec.ground_set.cells is None:
                raise ValueError("interval loss needs real targets or a ground set with cells")
            y_values = spec.ground_set.cells.centers[np.asarray(y, dtype=int)]
        return train_interval_baseline(X, y_values, feature_map, reg, spec.alpha, spec.ground_set)
    return replace(predictor, ground_set=spec.ground_set, size_function=V)


def held_out_score(spec: TrainingSpec, predictor: LinearPredictor, X: np.ndarray, y: np.ndarray, criterion: str) -> float:
    scores = predictor_scores(predictor, X)
    if criterion == "area_mid":
        return float(area_table(spec.size_function, scores, y)["area_mid"].mean())
    if criterion == "choquet":
        return empirical_choquet_risk(spec.size_function, scores, y, spec.smoothing)
    raise ValueError(f"Unsupported selection criterion '{criterion}'. Expected one of: {list(CRITERIA)}")


def _fold_task(
    spec: TrainingSpec,
    X: np.ndarray,
    y: np.ndarray,
    y_values: np.ndarray | None,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    reg: float,
    fold: int,
    criterion: str,
    seed: int,
) -> Dict[str, float]:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, fold])))
    values = None if y_values is None else y_values[train_idx]
    predictor = train_predictor(spec, X[train_idx], y[train_idx], reg, values, rng)
    score = held_out_score(spec, predictor, X[test_idx], y[test_idx], criterion)
    return {"reg": reg, "fold": fold, "score": score}


def select_regularization(
    spec: TrainingSpec,
    X: np.ndarray,
    y: np.ndarray,
    grid: Sequence[float] = DEFAULT_REG_GRID,
    n_folds: int = 5,
    seed: int = 0,
    criterion: str = "area_mid",
    n_jobs: int = 1,
    y_values: np.ndarray | None = None,
) -> tuple[float, pd.DataFrame]:
    """Pick the grid value with the lowest mean held-out criterion; ties go to the larger value."""

    if criterion not in CRITERIA:
        raise ValueError(f"Unsupported selection criterion '{criterion}'. Expected one of: {list(CRITERIA)}")
    if not grid:
        raise ValueError("regularization grid is empty")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    folds = list(KFold(n_splits=n_folds, shuffle=True, random_state=seed).split(X))
    tasks: List = [
        delayed(_fold_task)(spec, X, y, y_values, train_idx, test_idx, float(reg), fold, criterion, seed)
        for reg in grid
        for fold, (train_idx, test_idx) in enumerate(folds)
    ]
    rows = Parallel(n_jobs=n_jobs)(tasks)
    table = pd.DataFrame(rows)
    means = table.groupby("reg")["score"].mean().sort_index(ascending=False)
    best = float(means.idxmin())
    LOGGER.info("Selected reg=%.1e (held-out %s %.6f)", best, criterion, float(means.min()))
    return best, table
