"""Conditional and marginal coverage reports for a fixed target level."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from coverage.conditional import estimate_conditional
from coverage.thresholds import thresholds_for_alpha
from losses.curves import count_components
from submodular.size_functions import SizeFunction

LOGGER = logging.getLogger("coverage.report")

DEFAULT_BINS = 20
COVERAGE_COLUMNS = [
    "coverage_marginal_lambda",
    "coverage_marginal_lambda_randomized",
    "coverage_conditional_lambda",
    "coverage_randomized",
]
SIZE_COLUMNS = ["set_size_marginal_lambda", "set_size", "set_size_randomized"]


@dataclass(frozen=True, eq=False)
class MarginalThreshold:
    lambda_plus: float
    lambda_minus: float
    q: float
    alpha_plus: float
    alpha_minus: float


@dataclass(frozen=True, eq=False)
class CoverageReport:
    alpha: float
    exact: bool
    frame: pd.DataFrame
    summary: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {"alpha": self.alpha, "exact": self.exact, "summary": self.summary}


def _outcome_mass(k: int, cond: np.ndarray | None, y: np.ndarray | None) -> np.ndarray:
    """Per-row law of the output: the exact conditional if known, else the observed label."""

    if cond is not None:
        return np.atleast_2d(np.asarray(cond, dtype=float))
    if y is None:
        raise ValueError("coverage report needs exact conditionals or observed labels")
    labels = np.asarray(y).astype(int)
    return np.eye(k)[labels]


def marginal_threshold(scores: np.ndarray, mass: np.ndarray, alpha: float, weights: np.ndarray) -> MarginalThreshold:
    """One lambda for all inputs with average miscoverage at most alpha, plus its randomized partner."""

    F = np.atleast_2d(scores)
    w = weights / weights.sum()
    keys = -F.ravel()
    entry_mass = (mass * w[:, None]).ravel()
    order = np.argsort(keys, kind="stable")
    keys, covered = keys[order], np.cumsum(entry_mass[order])
    last = np.append(np.diff(keys) > 0, True)
    levels, miscoverage = keys[last], 1.0 - covered[last]
    t = int(np.flatnonzero(miscoverage <= alpha + 1e-12)[0])
    lam_minus = float(levels[t - 1]) if t > 0 else -np.inf
    alpha_minus = float(miscoverage[t - 1]) if t > 0 else 1.0
    alpha_plus = float(max(miscoverage[t], 0.0))
    q = 0.0 if alpha_minus <= alpha_plus else float((alpha - alpha_plus) / (alpha_minus - alpha_plus))
    return MarginalThreshold(float(levels[t]), lam_minus, min(max(q, 0.0), 1.0), alpha_plus, alpha_minus)


def coverage_report(
    V: SizeFunction,
    scores: np.ndarray,
    alpha: float,
    x: np.ndarray | None = None,
    cond: np.ndarray | None = None,
    y: np.ndarray | None = None,
    smoothing: float = 0.0,
    weights: np.ndarray | None = None,
    ordered: bool = False,
    n_bins: int = DEFAULT_BINS,
) -> CoverageReport:
    """Coverage of marginal-lambda and conditional-lambda sets, deterministic and randomized.

    With exact conditionals every row of the frame is one input; otherwise
    rows are equal-mass bins of x (one-dimensional inputs) or of the
    conditional threshold lambda*(alpha, x).
    """

    F = np.atleast_2d(np.asarray(scores, dtype=float))
    n = F.shape[0]
    exact = cond is not None
    mass = _outcome_mass(V.k, cond, y)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)

    marginal = marginal_threshold(F, mass, alpha, w)
    plus_sets = F >= -marginal.lambda_plus
    minus_sets = F >= -marginal.lambda_minus
    cov_marg = np.sum(mass * plus_sets, axis=1)
    cov_marg_rand = marginal.q * np.sum(mass * minus_sets, axis=1) + (1.0 - marginal.q) * cov_marg

    estimate = estimate_conditional(V, F, smoothing)
    rows: List[Dict[str, float]] = []
    for i in range(n):
        pair = thresholds_for_alpha(V, estimate.probabilities[i], F[i], alpha)
        cov_plus = float(mass[i] @ pair.set_plus)
        cov_minus = float(mass[i] @ pair.set_minus)
        row = {
            "lambda_conditional": pair.lambda_plus,
            "coverage_marginal_lambda": float(cov_marg[i]),
            "coverage_marginal_lambda_randomized": float(cov_marg_rand[i]),
            "coverage_conditional_lambda": cov_plus,
            "coverage_randomized": pair.q * cov_minus + (1.0 - pair.q) * cov_plus,
            "set_size_marginal_lambda": float(V.evaluate_masks(plus_sets[i][None, :])[0]),
            "set_size": pair.size_plus,
            "set_size_randomized": pair.expected_size,
        }
        if ordered:
            row["components"] = float(count_components(pair.set_plus))
            row["components_marginal_lambda"] = float(count_components(plus_sets[i]))
        rows.append(row)
    frame = pd.DataFrame(rows)

    inputs = None if x is None else np.asarray(x, dtype=float)
    if inputs is not None and inputs.ndim == 2 and inputs.shape[1] == 1:
        inputs = inputs[:, 0]
    if inputs is not None and inputs.ndim == 1:
        frame.insert(0, "x", inputs)
    frame["weight"] = w / w.sum()

    summary: Dict[str, Any] = {
        "alpha": alpha,
        "n": n,
        "exact": exact,
        "lambda_marginal": marginal.lambda_plus,
        "lambda_marginal_minus": marginal.lambda_minus,
        "q_marginal": marginal.q,
        "n_fallback": int(estimate.fallback.sum()),
    }
    for col in COVERAGE_COLUMNS + SIZE_COLUMNS:
        summary[f"{col}_mean"] = float(frame[col] @ frame["weight"])

    if not exact:
        key = frame["x"] if "x" in frame else frame["lambda_conditional"]
        bins = pd.qcut(key.rank(method="first"), q=min(n_bins, n), labels=False)
        frame = frame.groupby(bins).mean(numeric_only=True).reset_index(drop=True)
        frame["weight"] = frame["weight"] / frame["weight"].sum()

    for col in COVERAGE_COLUMNS:
        summary[f"{col}_max_deviation"] = float(np.max(np.abs(frame[col] - (1.0 - alpha))))
    LOGGER.info(
        "Coverage at alpha=%.3f: conditional-lambda %.4f, marginal-lambda %.4f (max deviation %.4f vs %.4f)",
        alpha,
        summary["coverage_conditional_lambda_mean"],
        summary["coverage_marginal_lambda_mean"],
        summary["coverage_conditional_lambda_max_deviation"],
        summary["coverage_marginal_lambda_max_deviation"],
    )
    return CoverageReport(alpha=alpha, exact=exact, frame=frame, summary=summary)
