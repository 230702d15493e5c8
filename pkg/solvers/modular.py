"""Per-label ridge systems for modular size functions."""

from __future__ import annotations

import logging

import numpy as np

from kernels.features import FeatureMap, embed
from solvers.linalg import solve_label_systems
from solvers.predictor import LinearPredictor
from submodular.size_functions import Modular

LOGGER = logging.getLogger("solvers.modular")


def check_training_data(X: np.ndarray, y: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    inputs = np.asarray(X, dtype=float)
    if inputs.ndim == 1:
        inputs = inputs[:, None]
    labels = np.asarray(y)
    if labels.ndim != 1 or labels.size != inputs.shape[0]:
        raise ValueError(f"{inputs.shape[0]} inputs but {labels.size} labels")
    if labels.size == 0:
        raise ValueError("training data is empty")
    if not np.all(np.equal(np.mod(labels, 1), 0)):
        raise ValueError("labels must be integers")
    labels = labels.astype(int)
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"labels must lie in 0..{k - 1}")
    return inputs, labels


def label_curvature(labels: np.ndarray, k: int, smoothing: float, measure: np.ndarray) -> np.ndarray:
    """Diagonal curvature 1{y_i = j} + smoothing * M_j of the per-observation quadratic."""

    curvature = np.zeros((labels.size, k))
    curvature[np.arange(labels.size), labels] = 1.0
    if smoothing > 0:
        curvature += smoothing * measure[None, :]
    return curvature


def train_modular(
    X: np.ndarray,
    y: np.ndarray,
    V: Modular,
    feature_map: FeatureMap,
    reg: float,
    smoothing: float = 0.0,
    method: str = "direct",
) -> LinearPredictor:
    """Exact minimizer of the smoothed Choquet risk for a modular V, one label at a time."""

    if not isinstance(V, Modular):
        raise ValueError("train_modular needs a modular size function")
    if reg < 0 or smoothing < 0:
        raise ValueError("reg and smoothing must be >= 0")
    inputs, labels = check_training_data(X, y, V.k)
    features = embed(feature_map, inputs)
    n = labels.size
    curvature = label_curvature(labels, V.k, smoothing, V.dominated_measure().weights)
    linear = np.broadcast_to(V.weights, (n, V.k))
    weights = solve_label_systems(features, curvature, linear, reg, feature_map.penalty_mask, method=method)
    LOGGER.info("Trained modular predictor: n=%d k=%d rank=%d reg=%.1e", n, V.k, feature_map.rank, reg)
    return LinearPredictor.from_weights(
        weights,
        feature_map,
        regularization=reg,
        loss="choquet",
        size_function=V,
        smoothing=smoothing,
    )
