"""Reference losses on the same feature maps: square loss, softmax and pinball intervals."""

from __future__ import annotations

import logging
import warnings

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import LogisticRegression, QuantileRegressor, Ridge

from kernels.features import FeatureMap, embed
from solvers.modular import check_training_data
from solvers.predictor import LinearPredictor
from submodular.size_functions import GroundSet

LOGGER = logging.getLogger("solvers.baselines")

SOFTMAX_TOL = 1e-6
SOFTMAX_MAX_ITER = 5000
MISSING_CLASS_LOGIT = -1e3


def _penalized_features(feature_map: FeatureMap, X: np.ndarray) -> np.ndarray:
    return embed(feature_map, X)[:, : feature_map.rank]


def train_square_baseline(
    X: np.ndarray,
    y: np.ndarray,
    k: int,
    feature_map: FeatureMap,
    reg: float,
) -> LinearPredictor:
    """Ridge regression on one-hot targets; (1/2n)||Y - G||^2 + reg/2 ||theta||^2."""

    inputs, labels = check_training_data(X, y, k)
    n = labels.size
    targets = np.eye(k)[labels]
    features = _penalized_features(feature_map, inputs)
    model = Ridge(alpha=max(n * reg, 1e-12), fit_intercept=feature_map.intercept, solver="auto")
    model.fit(features, targets)
    beta = np.asarray(model.intercept_, dtype=float) if feature_map.intercept else np.zeros(k)
    LOGGER.info("Trained square-loss baseline: n=%d k=%d reg=%.1e", n, k, reg)
    return LinearPredictor(
        theta=np.asarray(model.coef_, dtype=float).reshape(k, -1).T,
        beta=beta,
        feature_map=feature_map,
        regularization=reg,
        loss="square",
    )


def train_softmax_baseline(
    X: np.ndarray,
    y: np.ndarray,
    k: int,
    feature_map: FeatureMap,
    reg: float,
    seed: int = 0,
) -> LinearPredictor:
    """Multinomial logistic regression fitted by SAGA; scores are the logits."""

    if reg <= 0:
        raise ValueError("softmax baseline needs reg > 0")
    inputs, labels = check_training_data(X, y, k)
    n = labels.size
    features = _penalized_features(feature_map, inputs)
    theta = np.zeros((feature_map.rank, k))
    beta = np.full(k, MISSING_CLASS_LOGIT)
    classes = np.unique(labels)
    if classes.size == 1:
        beta[classes[0]] = 0.0
    else:
        model = LogisticRegression(
            C=1.0 / (n * reg),
            solver="saga",
            tol=SOFTMAX_TOL,
            max_iter=SOFTMAX_MAX_ITER,
            fit_intercept=feature_map.intercept,
            random_state=seed,
        )
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ConvergenceWarning)
            model.fit(features, labels)
        if any(issubclass(w.category, ConvergenceWarning) for w in caught):
            LOGGER.warning("SAGA did not reach tol=%.0e in %d epochs", SOFTMAX_TOL, SOFTMAX_MAX_ITER)
        coef = np.asarray(model.coef_, dtype=float)
        intercept = np.asarray(model.intercept_, dtype=float) if feature_map.intercept else np.zeros(coef.shape[0])
        if classes.size == 2:
            coef = np.vstack([-0.5 * coef[0], 0.5 * coef[0]])
            intercept = np.array([-0.5 * intercept[0], 0.5 * intercept[0]])
        theta[:, model.classes_] = coef.T
        beta[model.classes_] = intercept
    LOGGER.info("Trained softmax baseline: n=%d k=%d reg=%.1e classes seen=%d", n, k, reg, classes.size)
    return LinearPredictor(theta=theta, beta=beta, feature_map=feature_map, regularization=reg, loss="softmax")


def train_interval_baseline(
    X: np.ndarray,
    y_values: np.ndarray,
    feature_map: FeatureMap,
    reg: float,
    alpha: float,
    ground_set: GroundSet,
) -> LinearPredictor:
    """Pinball-loss quantile regressions at alpha/2 and 1 - alpha/2 (HiGHS linear program).

    The penalty is the L1 norm of the feature weights, the form the linear
    program supports; the intercept is unpenalized.
    """

    if not 0.0 < alpha < 1.0:
        raise ValueError("interval level alpha must lie in (0, 1)")
    if ground_set.cells is None:
        raise ValueError("interval baseline needs a ground set with cell metadata")
    inputs = np.asarray(X, dtype=float)
    targets = np.asarray(y_values, dtype=float).ravel()
    if inputs.shape[0] != targets.size or targets.size == 0:
        raise ValueError(f"{inputs.shape[0]} inputs but {targets.size} targets")
    features = _penalized_features(feature_map, inputs)
    theta = np.zeros((feature_map.rank, 2))
    beta = np.zeros(2)
    for column, quantile in enumerate((alpha / 2.0, 1.0 - alpha / 2.0)):
        model = QuantileRegressor(quantile=quantile, alpha=reg, fit_intercept=feature_map.intercept, solver="highs")
        model.fit(features, targets)
        theta[:, column] = model.coef_
        beta[column] = model.intercept_ if feature_map.intercept else 0.0
    LOGGER.info("Trained interval baseline at alpha=%.3f (n=%d)", alpha, targets.size)
    return LinearPredictor(
        theta=theta,
        beta=beta,
        feature_map=feature_map,
        regularization=reg,
        loss="interval",
        kind="interval",
        ground_set=ground_set,
        metadata={"alpha": alpha},
    )


def pinball_loss(residual: np.ndarray, quantile: float) -> np.ndarray:
    r = np.asarray(residual, dtype=float)
    return np.maximum(quantile * r, (quantile - 1.0) * r)
