"""Conditional estimates, fixed-level thresholds, conformal calibration and coverage reports."""

from coverage.conditional import ConditionalEstimate, estimate_conditional, project_simplex
from coverage.conformal import (
    ConformalCalibration,
    adaptive_lambdas,
    conformal_sets,
    conformalize,
    conformity_scores,
)
from coverage.report import CoverageReport, coverage_report, marginal_threshold
from coverage.thresholds import ThresholdPair, thresholds_for_alpha

__all__ = [
    "ConditionalEstimate",
    "ConformalCalibration",
    "CoverageReport",
    "ThresholdPair",
    "adaptive_lambdas",
    "conformal_sets",
    "conformalize",
    "conformity_scores",
    "coverage_report",
    "estimate_conditional",
    "marginal_threshold",
    "project_simplex",
    "thresholds_for_alpha",
]
