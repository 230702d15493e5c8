from __future__ import annotations

import numpy as np
import pytest

from kernels.features import incomplete_cholesky
from kernels.functions import KernelSpec
from solvers.irls import MaxTermDecomposition
from solvers.linalg import NumericalError
from solvers.predictor import predictor_scores
from solvers.sgd import StepSchedule, iterate_minibatches, stochastic_subgradients, train_sgd
from submodular.size_functions import ConcaveCardinality, Modular, SetCover, greedy_subgradients


@pytest.mark.parametrize(
    "V",
    [
        Modular(np.array([0.1, 0.4, 0.2, 0.3])),
        ConcaveCardinality.from_shape(4, "log1p"),
        SetCover.morphological(4, radius=1),
    ],
    ids=lambda V: V.variant,
)
def test_sampled_subgradients_are_unbiased(V) -> None:
    g = np.array([0.3, -1.2, 0.8, 0.1])
    G = np.tile(g, (20000, 1))
    samples = stochastic_subgradients(MaxTermDecomposition.from_size_function(V), G, np.random.default_rng(0))
    assert np.all(np.count_nonzero(samples, axis=1) == 1)
    np.testing.assert_allclose(samples.mean(axis=0), greedy_subgradients(V, g)[0], atol=0.02 * V.total)


def test_step_schedule() -> None:
    assert StepSchedule(1.0).step(3) == pytest.approx(0.5)
    assert StepSchedule(0.2, decay="constant").step(100) == pytest.approx(0.2)
    with pytest.raises(ValueError, match="initial step size"):
        StepSchedule(-1.0)
    with pytest.raises(ValueError, match="Unsupported step decay"):
        StepSchedule(1.0, decay="cosine")


def test_minibatches_cover_every_row_each_epoch() -> None:
    batches = iterate_minibatches(10, 4, np.random.default_rng(1))
    epoch = np.concatenate([next(batches) for _ in range(3)])
    assert sorted(epoch.tolist()) == list(range(10))
    with pytest.raises(ValueError, match="batch_size"):
        next(iterate_minibatches(10, 0, np.random.default_rng(1)))


def _constant_problem() -> tuple[np.ndarray, np.ndarray, Modular]:
    y = np.repeat(np.arange(3), [20, 12, 8])
    X = np.random.default_rng(2).normal(size=(y.size, 1))
    return X, y, Modular.uniform(3)


def test_constant_model_approaches_the_population_formula() -> None:
    X, y, V = _constant_problem()
    fmap = incomplete_cholesky(KernelSpec("exponential"), X, max_rank=0)
    predictor = train_sgd(X, y, V, fmap, reg=0.0, n_steps=20000, rng=np.random.default_rng(3))
    freq = np.bincount(y, minlength=3) / y.size
    np.testing.assert_allclose(predictor_scores(predictor, X[:1])[0], -V.weights / freq, atol=0.05)
    assert predictor.metadata["trainer"] == "sgd"


def test_same_stream_gives_the_same_predictor() -> None:
    X, y, V = _constant_problem()
    fmap = incomplete_cholesky(KernelSpec("exponential"), X, max_rank=4)
    first = train_sgd(X, y, V, fmap, reg=1e-3, n_steps=300, rng=np.random.default_rng(4))
    second = train_sgd(X, y, V, fmap, reg=1e-3, n_steps=300, rng=np.random.default_rng(4))
    np.testing.assert_array_equal(first.weights, second.weights)


def test_divergence_raises() -> None:
    X, y, V = _constant_problem()
    fmap = incomplete_cholesky(KernelSpec("exponential"), X, max_rank=0)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(NumericalError, match="diverged"):
            train_sgd(X, y, V, fmap, reg=0.0, schedule=StepSchedule(1e300, "constant"), n_steps=50)
