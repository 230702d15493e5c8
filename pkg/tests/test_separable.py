from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from submodular.oracles import (
    calibration_gap_integral,
    pava_bruteforce,
    separable_min_bruteforce,
    separable_objective,
)
from submodular.separable import pava, separable_min
from submodular.size_functions import ConcaveCardinality, Modular, SetCover

K = 6


def _weights(seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    return rng.uniform(0.05, 1.0, size=K), rng.normal(scale=2.0, size=K)


def test_modular_closed_form() -> None:
    V = Modular(np.array([0.2, 0.3, 0.5]))
    q = np.array([0.5, 0.25, 0.25])
    np.testing.assert_allclose(separable_min(V, q), [-0.4, -1.2, -2.0])
    np.testing.assert_allclose(separable_min(V, q, np.array([1.0, 1.0, 1.0])), [0.6, -0.2, -1.0])


@pytest.mark.parametrize("shape", ["linear", "log1p", "sqrt", "truncated"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_concave_cardinality_matches_exhaustive_decomposition(shape: str, seed: int) -> None:
    V = ConcaveCardinality.from_shape(K, shape, r=2 if shape == "truncated" else None)
    q, a = _weights(seed)
    np.testing.assert_allclose(separable_min(V, q), separable_min_bruteforce(V, q), atol=1e-9)
    np.testing.assert_allclose(separable_min(V, q, a), separable_min_bruteforce(V, q, a), atol=1e-9)


def test_maximum_with_a_probability_vector_gives_constant_minus_one() -> None:
    V = ConcaveCardinality.from_shape(5, "truncated", r=1)
    q = np.array([0.1, 0.3, 0.2, 0.25, 0.15])
    np.testing.assert_allclose(separable_min(V, q), -np.ones(5), atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_set_cover_matches_exhaustive_decomposition(seed: int) -> None:
    V = SetCover.morphological(K, radius=1)
    q, a = _weights(seed)
    np.testing.assert_allclose(separable_min(V, q, a), separable_min_bruteforce(V, q, a), atol=1e-7)
    np.testing.assert_allclose(separable_min(V, q), separable_min_bruteforce(V, q), atol=1e-7)


@pytest.mark.parametrize(
    "V",
    [
        Modular(np.linspace(0.1, 0.6, K)),
        ConcaveCardinality.from_shape(K, "log1p"),
        SetCover.morphological(K, radius=2),
        SetCover(K, ((0, 3), (1, 2), (4, 5), (0, 5)), np.array([0.4, 0.1, 0.3, 0.2])),
    ],
    ids=lambda V: V.variant,
)
def test_solution_beats_random_perturbations(V) -> None:
    q, a = _weights(7)
    f = separable_min(V, q, a)
    best = separable_objective(V, q, a, f)
    rng = np.random.default_rng(11)
    for _ in range(200):
        step = rng.normal(scale=10.0 ** rng.uniform(-4, 0), size=K)
        assert best <= separable_objective(V, q, a, f + step) + 1e-10


def test_non_positive_weights_are_rejected() -> None:
    V = ConcaveCardinality.from_shape(3, "sqrt")
    with pytest.raises(ValueError, match="q must be strictly positive"):
        separable_min(V, np.array([0.5, 0.0, 0.5]))
    with pytest.raises(ValueError, match="q must have length"):
        separable_min(V, np.array([0.5, 0.5]))
    with pytest.raises(ValueError, match="concave phi"):
        separable_min(ConcaveCardinality(np.array([0.0, 1.0, 3.0])), np.array([0.5, 0.5]))


@settings(max_examples=80, deadline=None)
@given(
    data=st.lists(
        st.tuples(st.floats(min_value=-10, max_value=10), st.floats(min_value=0.1, max_value=5.0)),
        min_size=1,
        max_size=7,
    )
)
def test_pava_matches_exhaustive_block_search(data) -> None:
    targets = np.array([t for t, _ in data])
    weights = np.array([w for _, w in data])
    fit = pava(targets, weights)
    assert np.all(np.diff(fit) <= 1e-12)
    np.testing.assert_allclose(fit, pava_bruteforce(targets, weights), atol=1e-8)


def test_pava_rejects_bad_weights() -> None:
    with pytest.raises(ValueError, match="strictly positive"):
        pava(np.array([1.0, 2.0]), np.array([1.0, 0.0]))


@pytest.mark.parametrize(
    "V",
    [ConcaveCardinality.from_shape(4, "sqrt"), SetCover.morphological(4, radius=1)],
    ids=lambda V: V.variant,
)
def test_excess_objective_is_the_integral_of_level_set_gaps(V) -> None:
    rng = np.random.default_rng(5)
    q = rng.uniform(0.1, 1.0, size=4)
    a = rng.normal(size=4)
    f_star = separable_min(V, q, a)
    for _ in range(20):
        f = f_star + rng.normal(scale=0.7, size=4)
        excess = separable_objective(V, q, a, f) - separable_objective(V, q, a, f_star)
        assert calibration_gap_integral(V, q, a, f, f_star) == pytest.approx(excess, abs=1e-6)


def test_set_cover_routes_default_to_the_exact_decomposition() -> None:
    V = SetCover.morphological(5, radius=1)
    q = np.array([0.2, 0.3, 0.1, 0.25, 0.15])
    a = np.array([0.5, 0.0, -0.5, 1.0, 0.2])
    exact = separable_min(V, q, a, method="exact")
    np.testing.assert_array_equal(separable_min(V, q, a), exact)
    smoothed = separable_min(V, q, a, method="irls")
    assert separable_objective(V, q, a, smoothed) == pytest.approx(separable_objective(V, q, a, exact), abs=1e-5)
    with pytest.raises(ValueError, match="Unsupported separable_min method"):
        separable_min(V, q, a, method="bisection")
