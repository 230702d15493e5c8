"""Trainers for score predictors: exact modular systems, IRLS, SGD and baselines."""

from solvers.baselines import train_interval_baseline, train_softmax_baseline, train_square_baseline
from solvers.irls import (
    IRLSState,
    LaplacianPenalty,
    MaxTermDecomposition,
    irls_separable_min,
    smoothed_sum_largest,
    train_concave_irls,
    train_cover_irls,
)
from solvers.linalg import NumericalError, conjugate_gradient, solve_label_systems
from solvers.modular import train_modular
from solvers.post_cluster import check_decomposition, post_cluster
from solvers.predictor import LinearPredictor, load_model, predictor_scores, save_model, zero_predictor
from solvers.selection import TrainingSpec, select_regularization, train_predictor
from solvers.sgd import StepSchedule, sgd_train, stochastic_subgradients, train_sgd

__all__ = [
    "IRLSState",
    "LaplacianPenalty",
    "LinearPredictor",
    "MaxTermDecomposition",
    "NumericalError",
    "StepSchedule",
    "TrainingSpec",
    "check_decomposition",
    "conjugate_gradient",
    "irls_separable_min",
    "load_model",
    "post_cluster",
    "predictor_scores",
    "save_model",
    "select_regularization",
    "sgd_train",
    "smoothed_sum_largest",
    "solve_label_systems",
    "stochastic_subgradients",
    "train_concave_irls",
    "train_cover_irls",
    "train_interval_baseline",
    "train_modular",
    "train_predictor",
    "train_sgd",
    "train_softmax_baseline",
    "train_square_baseline",
    "zero_predictor",
]
