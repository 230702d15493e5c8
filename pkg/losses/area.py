"""Area losses of nested prediction sets and their data estimators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np
import pandas as pd

from losses.curves import PredictionCurve, build_curve
from submodular.size_functions import SizeFunction


@dataclass(frozen=True)
class AreaTriple:
    area_plus: float
    area_minus: float
    area_mid: float

    @classmethod
    def from_bounds(cls, area_plus: float, area_minus: float) -> "AreaTriple":
        return cls(area_plus=area_plus, area_minus=area_minus, area_mid=0.5 * (area_plus + area_minus))


def _check_label(curve: PredictionCurve, y: int) -> int:
    k = curve.sets.shape[1]
    if not 0 <= int(y) < k:
        raise ValueError(f"label {y} outside 0..{k - 1}")
    return int(y)


def area_losses(curve: PredictionCurve, y: int) -> AreaTriple:
    """Increment-weighted miscoverage indicators of one observation.

    area_plus sums the increments V(B_j) - V(B_{j-1}) with y outside B_{j-1},
    area_minus those with y outside B_j.
    """

    label = _check_label(curve, y)
    missed = ~curve.sets[:, label]
    increments = curve.increments
    return AreaTriple.from_bounds(
        area_plus=float(increments @ missed[:-1]),
        area_minus=float(increments @ missed[1:]),
    )


def smallest_covering_size(curve: PredictionCurve, y: int) -> float:
    """Size of the smallest set of the family containing y (equals area_plus)."""

    label = _check_label(curve, y)
    first = int(np.argmax(curve.sets[:, label]))
    return float(curve.sizes[first])


def largest_missing_size(curve: PredictionCurve, y: int) -> float:
    """Size of the largest set of the family missing y (equals area_minus)."""

    label = _check_label(curve, y)
    first = int(np.argmax(curve.sets[:, label]))
    return float(curve.sizes[first - 1])


def expected_areas(curve: PredictionCurve) -> AreaTriple:
    """Areas under the upper and lower step interpolants of an exact curve."""

    alphas = curve.require_alphas()
    increments = curve.increments
    return AreaTriple.from_bounds(
        area_plus=float(increments @ alphas[:-1]),
        area_minus=float(increments @ alphas[1:]),
    )


def area_table(V: SizeFunction, scores: np.ndarray, y: np.ndarray) -> pd.DataFrame:
    """Per-observation area losses of a score matrix on labelled data."""

    F = np.atleast_2d(np.asarray(scores, dtype=float))
    labels = np.asarray(y).astype(int)
    if F.shape[0] != labels.size:
        raise ValueError(f"{F.shape[0]} score rows but {labels.size} labels")
    rows = []
    for i in range(F.shape[0]):
        triple = area_losses(build_curve(V, F[i]), int(labels[i]))
        rows.append((triple.area_plus, triple.area_minus, triple.area_mid))
    return pd.DataFrame(rows, columns=["area_plus", "area_minus", "area_mid"])


def summarize_areas(table: pd.DataFrame) -> Dict[str, float]:
    """Mean of each area column plus its standard deviation and standard error."""

    summary: Dict[str, float] = {"n": float(len(table))}
    for col in ["area_plus", "area_minus", "area_mid"]:
        series = table[col].astype(float)
        std = float(series.std(ddof=1)) if len(series) > 1 else 0.0
        summary[f"{col}_mean"] = float(series.mean()) if len(series) else 0.0
        summary[f"{col}_std"] = std
        summary[f"{col}_stderr"] = std / np.sqrt(len(series)) if len(series) else 0.0
    return summary
