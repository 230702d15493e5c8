"""Conditional probability estimates read off trained score vectors."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from submodular.size_functions import DominatedMeasure, SizeFunction, greedy_subgradients

LOGGER = logging.getLogger("coverage.conditional")

SCORE_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class ConditionalEstimate:
    probabilities: np.ndarray
    fallback: np.ndarray

    def row(self, i: int) -> np.ndarray:
        return self.probabilities[i]


def project_simplex(values: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex (sort-based)."""

    v = np.atleast_2d(np.asarray(values, dtype=float))
    k = v.shape[1]
    u = -np.sort(-v, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    ind = np.arange(1, k + 1)
    active = u - css / ind > 0
    rho = k - 1 - np.argmax(active[:, ::-1], axis=1)
    theta = css[np.arange(v.shape[0]), rho] / (rho + 1.0)
    out = np.maximum(v - theta[:, None], 0.0)
    return out[0] if np.asarray(values).ndim == 1 else out


def estimate_conditional(
    V: SizeFunction,
    scores: np.ndarray,
    smoothing: float = 0.0,
    measure: DominatedMeasure | None = None,
    floor: float = SCORE_FLOOR,
) -> ConditionalEstimate:
    """p(y|x) proportional to mu_y / (-f_y)_-, with mu the greedy subgradient at f.

    With label smoothing the smoothing mass is removed first and the result is
    projected onto the simplex instead of normalized.
    """

    F = np.atleast_2d(np.asarray(getattr(scores, "scores", scores), dtype=float))
    if F.shape[1] != V.k or not np.all(np.isfinite(F)):
        raise ValueError(f"scores must be finite with k={V.k} columns")
    mu = greedy_subgradients(V, F)
    raw = mu / np.maximum(-F, floor)
    fallback = ~(raw.sum(axis=1) > 0)
    if smoothing > 0:
        m = V.dominated_measure().weights if measure is None else np.asarray(measure.weights, dtype=float)
        probs = project_simplex(raw - smoothing * m[None, :])
    else:
        probs = raw / np.where(fallback, 1.0, raw.sum(axis=1))[:, None]
    if np.any(fallback):
        LOGGER.warning("Uniform conditional estimate for %d rows with zero subgradient mass", int(fallback.sum()))
        probs[fallback] = 1.0 / V.k
    return ConditionalEstimate(probabilities=probs, fallback=fallback)
