"""Nested level-set curves, their interpolants, convex envelopes and averages."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
import pandas as pd
from sklearn.isotonic import isotonic_regression

from submodular.size_functions import LEVEL_TOLERANCE, SizeFunction, level_blocks

INTERPOLANTS = ("upper", "lower", "affine", "convex")


@dataclass(frozen=True, eq=False)
class ScoreTable:
    scores: np.ndarray
    source: str = "unknown"

    def __post_init__(self) -> None:
        arr = np.asarray(self.scores, dtype=float)
        if arr.ndim != 1 or not np.all(np.isfinite(arr)):
            raise ValueError("score table must be a finite 1-D vector")
        object.__setattr__(self, "scores", arr)


@dataclass(frozen=True, eq=False)
class PredictionCurve:
    """Level sets of one score vector, empty set first and the full set last."""

    sets: np.ndarray
    thresholds: np.ndarray
    sizes: np.ndarray
    alphas: np.ndarray | None
    size_key: str

    @property
    def n_levels(self) -> int:
        return int(self.sets.shape[0] - 1)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.sizes)

    @property
    def total(self) -> float:
        return float(self.sizes[-1])

    def require_alphas(self) -> np.ndarray:
        if self.alphas is None:
            raise ValueError("curve carries no miscoverage values; build it with a conditional distribution")
        return self.alphas


def _check_conditional(cond: np.ndarray, k: int) -> np.ndarray:
    pi = np.asarray(cond, dtype=float).ravel()
    if pi.size != k or np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-9:
        raise ValueError("conditional distribution must be a non-negative vector summing to 1")
    return pi


def build_curve(
    V: SizeFunction,
    f: ScoreTable | np.ndarray | Sequence[float],
    cond: np.ndarray | None = None,
    tol: float = LEVEL_TOLERANCE,
) -> PredictionCurve:
    scores = np.asarray(getattr(f, "scores", f), dtype=float)
    if scores.shape != (V.k,) or not np.all(np.isfinite(scores)):
        raise ValueError(f"scores must be a finite vector of length k={V.k}")
    blocks = level_blocks(scores, tol)
    sets = np.zeros((len(blocks) + 1, V.k), dtype=bool)
    thresholds = np.empty(len(blocks) + 1)
    thresholds[0] = np.inf
    for j, block in enumerate(blocks, start=1):
        sets[j] = sets[j - 1]
        sets[j, block] = True
        thresholds[j] = float(scores[block].min())
    sizes = V.evaluate_masks(sets)
    alphas = None
    if cond is not None:
        pi = _check_conditional(cond, V.k)
        alphas = (~sets).astype(float) @ pi
        alphas[-1] = 0.0
    return PredictionCurve(sets=sets, thresholds=thresholds, sizes=sizes, alphas=alphas, size_key=V.fingerprint())


def _distinct_points(curve: PredictionCurve) -> tuple[np.ndarray, np.ndarray]:
    """Keep the last point per size; equal-size sets are ordered so the last has least miscoverage."""

    sizes = curve.sizes
    alphas = curve.require_alphas()
    keep = np.append(np.diff(sizes) > 0, True)
    return sizes[keep], alphas[keep]


def convex_envelope(curve: PredictionCurve) -> PredictionCurve:
    """Lower convex envelope of the (size, miscoverage) points, via isotonic slopes."""

    x, y = _distinct_points(curve)
    if x.size <= 2:
        hull = y
    else:
        widths = np.diff(x)
        slopes = np.diff(y) / widths
        fitted = isotonic_regression(slopes, sample_weight=widths, increasing=True)
        hull = y[0] + np.concatenate([[0.0], np.cumsum(fitted * widths)])
    alphas = np.interp(curve.sizes, x, hull)
    return PredictionCurve(
        sets=curve.sets,
        thresholds=curve.thresholds,
        sizes=curve.sizes,
        alphas=alphas,
        size_key=curve.size_key,
    )


def interpolate(curve: PredictionCurve, s: np.ndarray, interpolant: str = "affine") -> np.ndarray:
    """Miscoverage of the chosen interpolant at sizes s in [0, V(Y)]."""

    grid = np.clip(np.asarray(s, dtype=float), 0.0, curve.total)
    alphas = curve.require_alphas()
    if interpolant in ("upper", "lower"):
        j = np.searchsorted(curve.sizes, grid, side="left")
        j = np.clip(j, 0, curve.n_levels)
        if interpolant == "upper":
            return np.where(j == 0, alphas[0], alphas[np.maximum(j - 1, 0)])
        return alphas[j]
    if interpolant == "affine":
        x, y = _distinct_points(curve)
        return np.interp(grid, x, y)
    if interpolant == "convex":
        hull = convex_envelope(curve)
        x, y = _distinct_points(hull)
        return np.interp(grid, x, y)
    raise ValueError(f"Unknown interpolant '{interpolant}'. Expected one of: {list(INTERPOLANTS)}")


def averaged_curve(
    curves: List[PredictionCurve],
    n_points: int = 1001,
    interpolant: str = "affine",
) -> pd.DataFrame:
    """Mean miscoverage over curves at a common grid of sizes."""

    if not curves:
        raise ValueError("averaged_curve needs at least one curve")
    keys = {c.size_key for c in curves}
    if len(keys) != 1:
        raise ValueError("curves were built with different size functions")
    grid = np.linspace(0.0, curves[0].total, n_points)
    alpha = np.mean([interpolate(c, grid, interpolant) for c in curves], axis=0)
    return pd.DataFrame({"s": grid, "alpha": alpha, "interpolant": interpolant})


def curve_frame(curve: PredictionCurve) -> pd.DataFrame:
    alphas = curve.alphas if curve.alphas is not None else np.full(curve.sizes.shape, np.nan)
    return pd.DataFrame(
        {
            "j": np.arange(curve.n_levels + 1),
            "threshold": curve.thresholds,
            "s": curve.sizes,
            "alpha": alphas,
            "set_cardinality": curve.sets.sum(axis=1),
        }
    )


def count_components(mask: np.ndarray) -> int:
    """Number of maximal runs of selected cells in an ordered ground set."""

    m = np.asarray(mask, dtype=bool).astype(int)
    if m.size == 0:
        return 0
    return int(m[0] + np.sum(np.diff(m) == 1))
