from __future__ import annotations

import numpy as np
import pytest

from losses.area import (
    area_losses,
    area_table,
    expected_areas,
    largest_missing_size,
    smallest_covering_size,
    summarize_areas,
)
from losses.curves import (
    averaged_curve,
    build_curve,
    convex_envelope,
    count_components,
    curve_frame,
    interpolate,
)
from submodular.separable import separable_min
from submodular.size_functions import ConcaveCardinality, Modular, SetCover


def test_level_sets_are_nested_from_empty_to_full() -> None:
    V = Modular.uniform(4)
    curve = build_curve(V, np.array([0.3, -1.0, 0.3, 2.0]))
    assert curve.n_levels == 3
    np.testing.assert_array_equal(
        curve.sets,
        [[False, False, False, False], [False, False, False, True], [True, False, True, True], [True, True, True, True]],
    )
    np.testing.assert_allclose(curve.sizes, [0.0, 0.25, 0.75, 1.0])
    np.testing.assert_allclose(curve.thresholds, [np.inf, 2.0, 0.3, -1.0])
    with pytest.raises(ValueError, match="no miscoverage values"):
        curve.require_alphas()


@pytest.mark.parametrize(
    "V",
    [Modular(np.array([0.1, 0.2, 0.3, 0.15, 0.25])), ConcaveCardinality.from_shape(5, "sqrt"), SetCover.morphological(5, 1)],
    ids=lambda V: V.variant,
)
def test_areas_are_the_sizes_around_the_first_covering_set(V) -> None:
    rng = np.random.default_rng(4)
    for _ in range(20):
        curve = build_curve(V, np.round(rng.normal(size=5), 1))
        for y in range(5):
            triple = area_losses(curve, y)
            assert triple.area_plus == pytest.approx(smallest_covering_size(curve, y))
            assert triple.area_minus == pytest.approx(largest_missing_size(curve, y))
            assert triple.area_mid == pytest.approx(0.5 * (triple.area_plus + triple.area_minus))
            assert triple.area_minus <= triple.area_plus


def test_constant_scores_give_half_the_total_size() -> None:
    V = ConcaveCardinality.from_shape(4, "log1p")
    table = area_table(V, np.zeros((3, 4)), np.array([0, 2, 3]))
    np.testing.assert_allclose(table["area_plus"], V.total)
    np.testing.assert_allclose(table["area_minus"], 0.0)
    np.testing.assert_allclose(table["area_mid"], 0.5 * V.total)

    summary = summarize_areas(table)
    assert summary["n"] == 3
    assert summary["area_mid_mean"] == pytest.approx(0.5 * V.total)
    assert summary["area_mid_std"] == pytest.approx(0.0, abs=1e-12)


def test_expected_areas_average_the_per_label_areas() -> None:
    V = SetCover.morphological(5, radius=1)
    cond = np.array([0.1, 0.4, 0.05, 0.3, 0.15])
    curve = build_curve(V, np.array([-0.5, 0.2, -1.0, 0.1, 0.0]), cond)
    exact = expected_areas(curve)
    per_label = [area_losses(curve, y) for y in range(5)]
    assert exact.area_plus == pytest.approx(sum(p * t.area_plus for p, t in zip(cond, per_label)))
    assert exact.area_minus == pytest.approx(sum(p * t.area_minus for p, t in zip(cond, per_label)))


def test_area_table_checks_shapes_and_labels() -> None:
    V = Modular.uniform(3)
    with pytest.raises(ValueError, match="2 score rows but 3 labels"):
        area_table(V, np.zeros((2, 3)), np.array([0, 1, 2]))
    with pytest.raises(ValueError, match="label 3 outside"):
        area_losses(build_curve(V, np.zeros(3)), 3)


def _curve_with_law():
    V = Modular.uniform(4)
    cond = np.array([0.4, 0.1, 0.3, 0.2])
    return build_curve(V, np.array([3.0, 0.0, 2.0, 1.0]), cond)


def test_miscoverage_decreases_along_the_curve() -> None:
    curve = _curve_with_law()
    np.testing.assert_allclose(curve.alphas, [1.0, 0.6, 0.3, 0.1, 0.0])


def test_interpolants_are_ordered() -> None:
    curve = _curve_with_law()
    grid = np.linspace(0.0, 1.0, 41)
    upper = interpolate(curve, grid, "upper")
    lower = interpolate(curve, grid, "lower")
    affine = interpolate(curve, grid, "affine")
    convex = interpolate(curve, grid, "convex")
    assert np.all(lower <= affine + 1e-12)
    assert np.all(affine <= upper + 1e-12)
    assert np.all(convex <= affine + 1e-12)
    assert interpolate(curve, np.array([0.5]), "upper")[0] == pytest.approx(0.6)
    assert interpolate(curve, np.array([0.5]), "lower")[0] == pytest.approx(0.3)
    assert interpolate(curve, np.array([0.375]), "affine")[0] == pytest.approx(0.45)
    with pytest.raises(ValueError, match="Unknown interpolant"):
        interpolate(curve, grid, "cubic")


def test_convex_envelope_lies_below_and_is_convex() -> None:
    V = Modular.uniform(5)
    curve = build_curve(V, np.array([4.0, 3.0, 2.0, 1.0, 0.0]), np.array([0.1, 0.5, 0.1, 0.25, 0.05]))
    hull = convex_envelope(curve)
    assert np.all(hull.alphas <= curve.alphas + 1e-12)
    assert hull.alphas[0] == pytest.approx(curve.alphas[0])
    assert hull.alphas[-1] == pytest.approx(0.0)
    slopes = np.diff(hull.alphas) / np.diff(hull.sizes)
    assert np.all(np.diff(slopes) >= -1e-12)


def test_averaged_curve_requires_one_size_function() -> None:
    cond = np.array([0.5, 0.5])
    curve_a = build_curve(Modular.uniform(2), np.array([1.0, 0.0]), cond)
    curve_b = build_curve(Modular(np.array([0.2, 0.8])), np.array([1.0, 0.0]), cond)
    with pytest.raises(ValueError, match="different size functions"):
        averaged_curve([curve_a, curve_b])

    frame = averaged_curve([curve_a, curve_a], n_points=5)
    np.testing.assert_allclose(frame["alpha"], interpolate(curve_a, frame["s"].to_numpy()))
    assert list(frame.columns) == ["s", "alpha", "interpolant"]


def test_curve_frame_columns() -> None:
    frame = curve_frame(_curve_with_law())
    assert list(frame.columns) == ["j", "threshold", "s", "alpha", "set_cardinality"]
    assert frame["set_cardinality"].tolist() == [0, 1, 2, 3, 4]


def test_count_components_counts_runs() -> None:
    assert count_components(np.array([0, 1, 1, 0, 1], dtype=bool)) == 2
    assert count_components(np.array([1, 1, 1], dtype=bool)) == 1
    assert count_components(np.array([0, 0], dtype=bool)) == 0
    assert count_components(np.array([], dtype=bool)) == 0


def _trapezoid(s: np.ndarray, alpha: np.ndarray) -> float:
    return float(np.sum(np.diff(s) * 0.5 * (alpha[:-1] + alpha[1:])))


@pytest.mark.parametrize(
    "V",
    [Modular(np.array([0.1, 0.3, 0.2, 0.15, 0.05, 0.2])), ConcaveCardinality.from_shape(6, "sqrt"), SetCover.morphological(6, 1)],
    ids=lambda V: V.variant,
)
def test_population_optimal_curve_is_its_own_convex_envelope(V) -> None:
    rng = np.random.default_rng(8)
    for _ in range(10):
        cond = rng.dirichlet(np.ones(6))
        curve = build_curve(V, separable_min(V, cond), cond)
        hull = convex_envelope(curve)
        np.testing.assert_allclose(hull.alphas, curve.alphas, atol=1e-9)
        assert _trapezoid(hull.sizes, hull.alphas) == pytest.approx(expected_areas(curve).area_mid, abs=1e-9)


def test_averaged_curve_area_is_the_mean_area() -> None:
    V = ConcaveCardinality.from_shape(5, "sqrt")
    rng = np.random.default_rng(9)
    curves = [build_curve(V, rng.normal(size=5), rng.dirichlet(np.ones(5))) for _ in range(12)]
    frame = averaged_curve(curves, n_points=4001)
    mean_area = np.mean([expected_areas(c).area_mid for c in curves])
    assert _trapezoid(frame["s"].to_numpy(), frame["alpha"].to_numpy()) == pytest.approx(mean_area, abs=1e-3)
