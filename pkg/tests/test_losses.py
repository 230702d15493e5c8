from __future__ import annotations

import numpy as np
import pytest

from losses.choquet import choquet_loss, choquet_loss_gradients, empirical_choquet_risk
from submodular.oracles import integrated_level_loss, lovasz_quadrature
from submodular.separable import separable_min
from submodular.size_functions import ConcaveCardinality, Modular, SetCover, lovasz


def test_choquet_loss_of_a_modular_size_function() -> None:
    V = Modular.uniform(3)
    f = np.array([-1.0, -2.0, -3.0])
    assert choquet_loss(V, f, 0) == pytest.approx(-2.0 + 0.5)
    assert choquet_loss(V, f, 2) == pytest.approx(-2.0 + 4.5)
    assert choquet_loss(V, f, 0, smoothing=0.1) == pytest.approx(-1.5 + 0.5 * 0.1 * 14.0 / 3.0)


def test_empirical_risk_is_the_mean_loss() -> None:
    V = ConcaveCardinality.from_shape(4, "log1p")
    rng = np.random.default_rng(0)
    F = rng.normal(size=(6, 4))
    y = np.array([0, 1, 3, 3, 2, 0])
    expected = np.mean([choquet_loss(V, f, label, smoothing=0.05) for f, label in zip(F, y)])
    assert empirical_choquet_risk(V, F, y, smoothing=0.05) == pytest.approx(expected)
    assert empirical_choquet_risk(V, np.zeros((0, 4)), np.array([], dtype=int)) == 0.0


def test_gradients_match_finite_differences_away_from_ties() -> None:
    V = SetCover.morphological(4, radius=1)
    F = np.array([[-0.3, -1.1, 0.4, -2.0], [0.9, 0.1, -0.5, -0.7]])
    y = np.array([1, 3])
    grad = choquet_loss_gradients(V, F, y, smoothing=0.2)
    h = 1e-6
    for i in range(F.shape[0]):
        for j in range(4):
            bump = np.zeros(4)
            bump[j] = h
            numeric = (choquet_loss(V, F[i] + bump, y[i], 0.2) - choquet_loss(V, F[i] - bump, y[i], 0.2)) / (2 * h)
            assert grad[i, j] == pytest.approx(numeric, abs=1e-6)


def test_labels_outside_the_ground_set_are_rejected() -> None:
    V = Modular.uniform(3)
    with pytest.raises(ValueError, match="labels must lie in 0..2"):
        choquet_loss(V, np.zeros(3), 3)
    with pytest.raises(ValueError, match="smoothing must be >= 0"):
        choquet_loss(V, np.zeros(3), 0, smoothing=-1.0)


@pytest.mark.parametrize(
    "V",
    [Modular(np.array([0.1, 0.5, 0.4])), ConcaveCardinality.from_shape(3, "sqrt"), SetCover.morphological(3, radius=1)],
    ids=lambda V: V.variant,
)
def test_layer_cake_integrals_recover_the_extension(V) -> None:
    rng = np.random.default_rng(5)
    for _ in range(10):
        f = rng.normal(size=3)
        assert lovasz_quadrature(V, f) == pytest.approx(lovasz(V, f), abs=1e-12)

        h = -np.abs(f)
        q = rng.dirichlet(np.ones(3))
        expected = lovasz(V, h) + 0.5 * float(q @ h**2)
        assert integrated_level_loss(V, q, h) == pytest.approx(expected, abs=1e-12)


def test_expected_loss_is_minimized_by_the_separable_solution() -> None:
    V = ConcaveCardinality.from_shape(4, "log1p")
    cond = np.array([0.4, 0.3, 0.2, 0.1])
    f = separable_min(V, cond)

    def expected(scores: np.ndarray) -> float:
        return float(sum(p * choquet_loss(V, scores, y) for y, p in enumerate(cond)))

    rng = np.random.default_rng(2)
    for _ in range(100):
        assert expected(f) <= expected(f + 0.05 * rng.normal(size=4)) + 1e-12
    assert np.all(f < 0)
    assert np.all(np.diff(f) <= 1e-12)


def test_integrated_level_loss_requires_non_positive_scores() -> None:
    with pytest.raises(ValueError, match="non-positive"):
        integrated_level_loss(Modular.uniform(2), np.array([0.5, 0.5]), np.array([0.1, -0.2]))
