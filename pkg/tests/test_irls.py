from __future__ import annotations

import numpy as np
import pytest

from kernels.features import incomplete_cholesky
from kernels.functions import KernelSpec
from solvers.irls import (
    LaplacianPenalty,
    MaxTermDecomposition,
    irls_separable_min,
    smoothed_sum_largest,
    train_concave_irls,
    train_cover_irls,
)
from solvers.predictor import predictor_scores
from submodular.oracles import separable_objective
from submodular.separable import separable_min
from submodular.size_functions import ConcaveCardinality, Modular, SetCover, lovasz


def _families() -> list:
    return [
        Modular(np.array([0.1, 0.3, 0.2, 0.4])),
        ConcaveCardinality.from_shape(4, "log1p"),
        ConcaveCardinality.from_shape(4, "truncated", r=2),
        SetCover.morphological(4, radius=1),
        SetCover(4, ((0,), (1, 2), (0, 3), (2, 3)), np.array([0.2, 0.3, 0.1, 0.4])),
    ]


@pytest.mark.parametrize("V", _families(), ids=lambda V: V.variant)
def test_max_term_decomposition_reproduces_the_extension(V) -> None:
    decomp = MaxTermDecomposition.from_size_function(V)
    G = np.random.default_rng(0).normal(size=(25, 4))
    np.testing.assert_allclose(decomp.value(G), lovasz(V, G), atol=1e-12)
    assert decomp.total == pytest.approx(V.total)


def test_smoothed_sum_of_largest_entries_is_a_tight_upper_bound() -> None:
    g = np.array([0.5, -1.0, 2.0, 0.49, 3.0])
    eps = 1e-2
    for r in range(1, 6):
        exact = float(np.sort(g)[::-1][:r].sum())
        value = smoothed_sum_largest(g, r, eps)
        assert exact - 1e-9 <= value <= exact + g.size * eps / 4.0 + 1e-9
    with pytest.raises(ValueError, match="r must lie in"):
        smoothed_sum_largest(g, 0)


def _constant_fit_inputs() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    y = np.repeat(np.arange(4), [33, 15, 8, 4])
    X = np.random.default_rng(0).normal(size=(y.size, 1))
    freq = np.bincount(y, minlength=4) / y.size
    return X, y, freq


@pytest.mark.parametrize(
    "V",
    [ConcaveCardinality.from_shape(4, "log1p"), SetCover.morphological(4, radius=1)],
    ids=lambda V: V.variant,
)
def test_constant_model_solves_the_separable_problem(V) -> None:
    X, y, freq = _constant_fit_inputs()
    smoothing = 0.05
    fmap = incomplete_cholesky(KernelSpec("exponential"), X, max_rank=0)
    trainer = train_concave_irls if isinstance(V, ConcaveCardinality) else train_cover_irls
    predictor = trainer(X, y, V, fmap, reg=0.0, smoothing=smoothing)

    q = freq + smoothing * V.dominated_measure().weights
    exact = separable_min(V, q)
    fitted = predictor_scores(predictor, X[:1])[0]
    assert separable_objective(V, q, np.zeros(4), fitted) == pytest.approx(
        separable_objective(V, q, np.zeros(4), exact), abs=1e-4
    )
    np.testing.assert_allclose(fitted, exact, atol=0.1)


def test_objective_trace_never_increases() -> None:
    rng = np.random.default_rng(1)
    y = rng.integers(5, size=50)
    X = y[:, None] / 5.0 + 0.2 * rng.normal(size=(50, 1))
    V = SetCover.morphological(5, radius=1)
    fmap = incomplete_cholesky(KernelSpec("exponential", alpha=2.0), X, max_rank=6)
    predictor = train_cover_irls(X, y, V, fmap, reg=1e-2, smoothing=0.01)
    trace = np.asarray(predictor.metadata["irls"]["objective_trace"])
    assert trace.size >= 2
    assert np.all(np.diff(trace) <= 1e-6 * (1.0 + np.abs(trace[:-1])))
    assert predictor.metadata["eta_floor"] > 0


def test_iterative_and_direct_linear_solvers_agree() -> None:
    rng = np.random.default_rng(2)
    y = rng.integers(4, size=40)
    X = rng.normal(size=(40, 2)) + y[:, None]
    V = ConcaveCardinality.from_shape(4, "sqrt")
    fmap = incomplete_cholesky(KernelSpec("polynomial", degree=1), X)
    direct = train_concave_irls(X, y, V, fmap, reg=1e-2, smoothing=0.01, method="direct", max_iter=40)
    iterative = train_concave_irls(X, y, V, fmap, reg=1e-2, smoothing=0.01, method="cg", max_iter=40)
    np.testing.assert_allclose(predictor_scores(iterative, X), predictor_scores(direct, X), atol=1e-5)


def test_separable_irls_matches_the_exact_decomposition() -> None:
    V = SetCover(5, ((0, 1), (1, 2, 3), (3, 4), (0, 4)), np.array([0.3, 0.2, 0.4, 0.1]))
    q = np.array([0.2, 0.3, 0.1, 0.25, 0.15])
    a = np.array([0.5, 0.0, -0.5, 1.0, 0.2])
    smoothed = irls_separable_min(V, q, a)
    exact = separable_min(V, q, a)
    assert separable_objective(V, q, a, smoothed) == pytest.approx(separable_objective(V, q, a, exact), abs=1e-5)


def test_laplacian_penalty() -> None:
    chain = LaplacianPenalty.chain(4, width=0.5, strength=2.0)
    np.testing.assert_allclose(chain.laplacian.sum(axis=1), 0.0)
    G = np.array([[0.0, 1.0, 1.0, 3.0]])
    assert chain.value(G)[0] == pytest.approx(2.0 * 2.0 * (1.0 + 0.0 + 4.0))
    with pytest.raises(ValueError, match="symmetric"):
        LaplacianPenalty(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_laplacian_coupling_flattens_neighbouring_scores() -> None:
    rng = np.random.default_rng(3)
    y = rng.integers(6, size=60)
    X = rng.normal(size=(60, 1))
    V = SetCover.morphological(6, radius=1)
    fmap = incomplete_cholesky(KernelSpec("exponential"), X, max_rank=0)
    plain = train_cover_irls(X, y, V, fmap, reg=0.0, smoothing=0.05)
    coupled = train_cover_irls(X, y, V, fmap, reg=0.0, smoothing=0.05, laplacian=LaplacianPenalty.chain(6, strength=5.0))
    assert np.sum(np.diff(coupled.beta) ** 2) <= np.sum(np.diff(plain.beta) ** 2) + 1e-6
    assert coupled.metadata["laplacian_strength"] == 5.0


def test_trainers_reject_the_wrong_family() -> None:
    X = np.zeros((3, 1))
    y = np.array([0, 1, 2])
    fmap = incomplete_cholesky(KernelSpec("exponential"), X, max_rank=0)
    with pytest.raises(ValueError, match="concave cardinality"):
        train_concave_irls(X, y, Modular.uniform(3), fmap, reg=0.0)
    with pytest.raises(ValueError, match="set-cover"):
        train_cover_irls(X, y, ConcaveCardinality.from_shape(3, "sqrt"), fmap, reg=0.0)
