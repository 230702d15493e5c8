"""Split-conformal calibration of the adaptive thresholds."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from coverage.conditional import SCORE_FLOOR, estimate_conditional
from coverage.thresholds import thresholds_for_alpha
from submodular.size_functions import SizeFunction

LOGGER = logging.getLogger("coverage.conformal")

CONVENTIONS = ("additive", "ratio")


@dataclass(frozen=True, eq=False)
class ConformalCalibration:
    convention: str
    alpha: float
    scores: np.ndarray
    threshold: float
    rank: int
    full_set: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "convention": self.convention,
            "alpha": self.alpha,
            "threshold": None if self.full_set else self.threshold,
            "rank": self.rank,
            "n_calibration": int(self.scores.size),
            "full_set": self.full_set,
        }


def adaptive_lambdas(
    V: SizeFunction,
    scores: np.ndarray,
    alpha: float,
    smoothing: float = 0.0,
) -> np.ndarray:
    """lambda*(alpha, x) per row: the deterministic threshold under the estimated conditional law."""

    F = np.atleast_2d(np.asarray(scores, dtype=float))
    probs = estimate_conditional(V, F, smoothing).probabilities
    return np.array([thresholds_for_alpha(V, p, f, alpha).lambda_plus for p, f in zip(probs, F)])


def conformity_scores(scores: np.ndarray, lambdas: np.ndarray, convention: str = "additive") -> np.ndarray:
    """f(x, y) + lambda*(x) or f(x, y) / lambda*(x) for every output; larger means more conforming."""

    F = np.atleast_2d(np.asarray(scores, dtype=float))
    lam = np.asarray(lambdas, dtype=float)[:, None]
    if convention == "additive":
        return F + lam
    if convention == "ratio":
        return F / np.maximum(lam, SCORE_FLOOR)
    raise ValueError(f"Unsupported conformity convention '{convention}'. Expected one of: {list(CONVENTIONS)}")


def conformalize(calibration_scores: np.ndarray, alpha: float, convention: str = "additive") -> ConformalCalibration:
    """Threshold = minus the ceil((n+1)(1-alpha))-th smallest negated calibration score."""

    if convention not in CONVENTIONS:
        raise ValueError(f"Unsupported conformity convention '{convention}'. Expected one of: {list(CONVENTIONS)}")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    s = np.asarray(calibration_scores, dtype=float).ravel()
    n = s.size
    if n < 1:
        raise ValueError("conformal calibration needs at least one score")
    # guard against (n+1)(1-alpha) landing just above an integer in floating point
    rank = math.ceil((n + 1) * (1.0 - alpha) - 1e-9)
    if rank > n:
        LOGGER.warning("Calibration set of %d points too small for alpha=%.3f; predicting the full set", n, alpha)
        return ConformalCalibration(convention, alpha, s, -np.inf, rank, True)
    threshold = -float(np.sort(-s)[rank - 1])
    return ConformalCalibration(convention, alpha, s, threshold, rank, False)


def conformal_sets(calibration: ConformalCalibration, conformity: np.ndarray) -> np.ndarray:
    """Boolean (n, k) prediction sets {y : score(x, y) >= threshold}."""

    return np.atleast_2d(np.asarray(conformity, dtype=float)) >= calibration.threshold


def label_scores(conformity: np.ndarray, y: np.ndarray) -> np.ndarray:
    C = np.atleast_2d(conformity)
    labels = np.asarray(y).astype(int)
    return C[np.arange(labels.size), labels]
