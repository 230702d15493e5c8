"""Test-time re-solve of scores trained with W under the target size function V."""

from __future__ import annotations

import logging

import numpy as np

from losses.curves import ScoreTable
from submodular.oracles import MAX_BRUTE_FORCE_SIZE, subset_values, table_is_submodular
from submodular.separable import separable_min
from submodular.size_functions import SizeFunction, blend_with_dominated, greedy_subgradients

LOGGER = logging.getLogger("solvers.post_cluster")

DEFAULT_BLEND = 0.1
DEFAULT_DELTA = 1e-6
Q_FLOOR = 1e-12


def default_training_size_function(V: SizeFunction, epsilon: float = DEFAULT_BLEND) -> SizeFunction:
    return blend_with_dominated(V, epsilon)


def check_decomposition(V: SizeFunction, W: SizeFunction) -> None:
    """Require W submodular and non-decreasing and V - W submodular (exhaustive, k <= 12)."""

    if V.k != W.k:
        raise ValueError(f"V has k={V.k} but W has k={W.k}")
    if V.k > MAX_BRUTE_FORCE_SIZE:
        LOGGER.debug("Skipping decomposition check for k=%d", V.k)
        return
    w_values = subset_values(W)
    if not table_is_submodular(w_values, W.k, monotone=True):
        raise ValueError("W must be submodular and non-decreasing")
    if not table_is_submodular(subset_values(V) - w_values, V.k, monotone=False):
        raise ValueError("V - W must be submodular")


def cluster_weights(h: np.ndarray, W: SizeFunction, smoothing: float = 0.0, delta: float = DEFAULT_DELTA) -> np.ndarray:
    """q_y = mu_y / (-h_y)_-, the unnormalized conditional estimate behind scores trained with W."""

    H = np.atleast_2d(np.asarray(h, dtype=float))
    mu = greedy_subgradients(W, H)
    q = mu / np.maximum(-H, delta)
    if smoothing > 0:
        q = q - smoothing * W.dominated_measure().weights[None, :]
    return np.maximum(q, Q_FLOOR)


def post_cluster(
    h: np.ndarray,
    V: SizeFunction,
    W: SizeFunction,
    smoothing: float = 0.0,
    delta: float = DEFAULT_DELTA,
) -> ScoreTable:
    """Minimize v(f) + 1/2 sum_y q_y f_y^2 with q from the W-trained scores h."""

    scores = np.asarray(getattr(h, "scores", h), dtype=float)
    if scores.shape != (V.k,):
        raise ValueError(f"scores must have length k={V.k}")
    if np.any(scores >= 0):
        LOGGER.debug("Clipping %d non-negative scores at -%.0e", int(np.sum(scores >= 0)), delta)
    q = cluster_weights(scores, W, smoothing, delta)[0]
    return ScoreTable(separable_min(V, q), source="post_cluster")


def post_cluster_rows(
    H: np.ndarray,
    V: SizeFunction,
    W: SizeFunction,
    smoothing: float = 0.0,
    delta: float = DEFAULT_DELTA,
) -> np.ndarray:
    Q = cluster_weights(H, W, smoothing, delta)
    return np.vstack([separable_min(V, q) for q in Q]) if Q.shape[0] else np.zeros((0, V.k))
