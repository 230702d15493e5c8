"""Stochastic subgradient training with unbiased one-element samples of the Lovász gradient."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterator, Protocol

import numpy as np

from kernels.features import FeatureMap, embed
from solvers.irls import MaxTermDecomposition
from solvers.linalg import NumericalError
from solvers.modular import check_training_data
from solvers.predictor import LinearPredictor
from submodular.size_functions import SizeFunction

LOGGER = logging.getLogger("solvers.sgd")

SCHEDULE_DECAYS = ("sqrt", "constant")


@dataclass(frozen=True)
class StepSchedule:
    initial: float
    decay: str = "sqrt"

    def __post_init__(self) -> None:
        if self.initial < 0:
            raise ValueError("initial step size must be >= 0")
        if self.decay not in SCHEDULE_DECAYS:
            raise ValueError(f"Unsupported step decay '{self.decay}'. Expected one of: {list(SCHEDULE_DECAYS)}")

    def step(self, t: int) -> float:
        if self.decay == "sqrt":
            return self.initial / math.sqrt(t + 1.0)
        return self.initial


class ScoreModel(Protocol):
    """Any differentiable map from a minibatch of inputs to (batch, k) scores."""

    def scores(self, batch: np.ndarray) -> np.ndarray: ...

    def backward(self, batch: np.ndarray, score_grad: np.ndarray, reg: float) -> np.ndarray: ...

    def get_parameters(self) -> np.ndarray: ...

    def set_parameters(self, params: np.ndarray) -> None: ...


class LinearScoreModel:
    """g = features @ weights; rows of the penalty mask mark ridge-penalized coordinates."""

    def __init__(self, weights: np.ndarray, penalty_mask: np.ndarray) -> None:
        self.weights = np.asarray(weights, dtype=float).copy()
        self.penalty_mask = np.asarray(penalty_mask, dtype=bool)

    def scores(self, batch: np.ndarray) -> np.ndarray:
        return batch @ self.weights

    def backward(self, batch: np.ndarray, score_grad: np.ndarray, reg: float) -> np.ndarray:
        grad = batch.T @ score_grad / max(batch.shape[0], 1)
        return grad + reg * self.penalty_mask[:, None] * self.weights

    def get_parameters(self) -> np.ndarray:
        return self.weights.copy()

    def set_parameters(self, params: np.ndarray) -> None:
        self.weights = np.asarray(params, dtype=float).copy()


def stochastic_subgradients(decomp: MaxTermDecomposition, G: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One sampled element per row, scaled so the expectation is the greedy subgradient.

    A component is drawn with probability proportional to its mass (linear
    weight, or term weight times rank). A linear component returns its own
    element; a term returns one of its r largest members uniformly. For a
    modular V this is sampling z from M; for a set cover it is the argmax over
    the neighbourhood of a cover term drawn from its weights.
    """

    G = np.atleast_2d(np.asarray(G, dtype=float))
    n, k = G.shape
    mass = np.concatenate([decomp.linear, decomp.weights * decomp.ranks])
    total = float(mass.sum())
    out = np.zeros((n, k))
    if total <= 0 or n == 0:
        return out
    components = rng.choice(mass.size, size=n, p=mass / total)
    elements = np.where(components < k, components, -1)
    for i in np.flatnonzero(components >= k):
        tau = int(components[i] - k)
        top = decomp.top_members(G[i], tau)
        elements[i] = top[rng.integers(top.size)]
    out[np.arange(n), elements] = total
    return out


def iterate_minibatches(n: int, batch_size: int, rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Endless pass over shuffled epochs of row indices."""

    if n < 1 or batch_size < 1:
        raise ValueError("minibatches need n >= 1 and batch_size >= 1")
    while True:
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            yield order[start : start + batch_size]


def sgd_train(
    features: np.ndarray,
    labels: np.ndarray,
    V: SizeFunction,
    model: ScoreModel,
    schedule: StepSchedule,
    n_steps: int,
    rng: np.random.Generator,
    reg: float = 0.0,
    smoothing: float = 0.0,
    batch_size: int = 32,
) -> ScoreModel:
    """Averaged stochastic subgradient descent on the smoothed Choquet risk."""

    decomp = MaxTermDecomposition.from_size_function(V)
    measure = V.dominated_measure().weights
    batches = iterate_minibatches(labels.size, batch_size, rng)
    average = model.get_parameters()
    for step in range(n_steps):
        idx = next(batches)
        batch = features[idx]
        G = model.scores(batch)
        grad = stochastic_subgradients(decomp, G, rng)
        grad[np.arange(idx.size), labels[idx]] += G[np.arange(idx.size), labels[idx]]
        if smoothing > 0:
            grad += smoothing * measure[None, :] * G
        params = model.get_parameters() - schedule.step(step) * model.backward(batch, grad, reg)
        if not np.all(np.isfinite(params)):
            raise NumericalError(f"SGD diverged at step {step}; lower the initial step size")
        model.set_parameters(params)
        average += (params - average) / (step + 2.0)
    model.set_parameters(average)
    LOGGER.info("SGD finished %d steps (batch %d, initial step %.3g)", n_steps, batch_size, schedule.initial)
    return model


def train_sgd(
    X: np.ndarray,
    y: np.ndarray,
    V: SizeFunction,
    feature_map: FeatureMap,
    reg: float,
    smoothing: float = 0.0,
    schedule: StepSchedule | None = None,
    n_steps: int = 5000,
    batch_size: int = 32,
    rng: np.random.Generator | None = None,
) -> LinearPredictor:
    inputs, labels = check_training_data(X, y, V.k)
    features = embed(feature_map, inputs)
    model = LinearScoreModel(np.zeros((feature_map.dim, V.k)), feature_map.penalty_mask)
    schedule = schedule or StepSchedule(initial=1.0)
    sgd_train(
        features,
        labels,
        V,
        model,
        schedule,
        n_steps,
        rng if rng is not None else np.random.default_rng(0),
        reg=reg,
        smoothing=smoothing,
        batch_size=batch_size,
    )
    return LinearPredictor.from_weights(
        model.get_parameters(),
        feature_map,
        regularization=reg,
        loss="choquet",
        size_function=V,
        smoothing=smoothing,
        metadata={"trainer": "sgd", "n_steps": n_steps, "initial_step": schedule.initial},
    )
