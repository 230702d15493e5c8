"""Choquet loss, nested-set curves and area losses."""

from losses.area import AreaTriple, area_losses, area_table, expected_areas, summarize_areas
from losses.choquet import DEFAULT_SMOOTHING, choquet_loss, empirical_choquet_risk
from losses.curves import (
    PredictionCurve,
    ScoreTable,
    averaged_curve,
    build_curve,
    convex_envelope,
    count_components,
    interpolate,
)

__all__ = [
    "AreaTriple",
    "DEFAULT_SMOOTHING",
    "PredictionCurve",
    "ScoreTable",
    "area_losses",
    "area_table",
    "averaged_curve",
    "build_curve",
    "choquet_loss",
    "convex_envelope",
    "count_components",
    "empirical_choquet_risk",
    "expected_areas",
    "interpolate",
    "summarize_areas",
]
