"""Convex Choquet-integral loss with optional label smoothing."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from submodular.size_functions import DominatedMeasure, SizeFunction, greedy_subgradients, lovasz

# Label-smoothing strength used by the experiment configs.
DEFAULT_SMOOTHING = 1e-2


def _measure_weights(V: SizeFunction, measure: DominatedMeasure | None) -> np.ndarray:
    weights = V.dominated_measure().weights if measure is None else np.asarray(measure.weights, dtype=float)
    if weights.shape != (V.k,):
        raise ValueError(f"dominated measure must have length k={V.k}")
    return weights


def _check_labels(y: np.ndarray, k: int) -> np.ndarray:
    labels = np.asarray(y).astype(int)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValueError(f"labels must lie in 0..{k - 1}")
    return labels


def choquet_loss(
    V: SizeFunction,
    f: np.ndarray | Sequence[float],
    y: int,
    smoothing: float = 0.0,
    measure: DominatedMeasure | None = None,
) -> float:
    """v(f) + 1/2 f_y^2 + smoothing * 1/2 sum_i M_i f_i^2."""

    if smoothing < 0:
        raise ValueError("smoothing must be >= 0")
    scores = np.asarray(getattr(f, "scores", f), dtype=float)
    label = int(_check_labels(np.array([y]), V.k)[0])
    value = float(lovasz(V, scores)) + 0.5 * scores[label] ** 2
    if smoothing > 0:
        value += 0.5 * smoothing * float(_measure_weights(V, measure) @ scores**2)
    return value


def empirical_choquet_risk(
    V: SizeFunction,
    scores: np.ndarray,
    y: np.ndarray,
    smoothing: float = 0.0,
    measure: DominatedMeasure | None = None,
) -> float:
    """Mean loss over the rows of a score matrix."""

    F = np.atleast_2d(np.asarray(scores, dtype=float))
    labels = _check_labels(y, V.k)
    if F.shape[0] == 0:
        return 0.0
    values = np.asarray(lovasz(V, F)) + 0.5 * F[np.arange(F.shape[0]), labels] ** 2
    if smoothing > 0:
        values = values + 0.5 * smoothing * (F**2 @ _measure_weights(V, measure))
    return float(values.mean())


def choquet_loss_gradients(
    V: SizeFunction,
    scores: np.ndarray,
    y: np.ndarray,
    smoothing: float = 0.0,
    measure: DominatedMeasure | None = None,
) -> np.ndarray:
    """Per-row subgradients with respect to the scores (greedy subgradient for v)."""

    F = np.atleast_2d(np.asarray(scores, dtype=float))
    labels = _check_labels(y, V.k)
    grad = greedy_subgradients(V, F)
    grad[np.arange(F.shape[0]), labels] += F[np.arange(F.shape[0]), labels]
    if smoothing > 0:
        grad += smoothing * F * _measure_weights(V, measure)[None, :]
    return grad
