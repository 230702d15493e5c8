from __future__ import annotations

import numpy as np
import pytest

from data_pipeline.generators import Gauss1D, MixtureHighD, Regression1D, build_generator, rng_stream


def test_streams_are_keyed_by_seed_replication_and_purpose() -> None:
    first = rng_stream(7, 0, "train").random(5)
    np.testing.assert_array_equal(first, rng_stream(7, 0, "train").random(5))
    assert not np.array_equal(first, rng_stream(7, 0, "test").random(5))
    assert not np.array_equal(first, rng_stream(7, 1, "train").random(5))
    with pytest.raises(ValueError, match="Unknown stream purpose"):
        rng_stream(7, 0, "validation")


def test_gaussian_conditional_is_normalized_and_symmetric() -> None:
    generator = Gauss1D()
    X = generator.grid(21)
    cond = generator.true_conditional(X)
    np.testing.assert_allclose(cond.sum(axis=1), 1.0)
    np.testing.assert_allclose(cond[:, 0], cond[::-1, 2])
    assert np.all(generator.grid_weights(X) > 0)

    data = generator.sample(50, rng_stream(0, 0, "train"))
    assert data.X.shape == (50, 1)
    assert set(np.unique(data.y)) <= {0.0, 1.0, 2.0}


def test_gaussian_priors_are_validated() -> None:
    with pytest.raises(ValueError, match="priors must be non-negative and sum to 1"):
        Gauss1D(priors=(0.5, 0.2, 0.2))
    with pytest.raises(ValueError, match="same positive length"):
        Gauss1D(means=(0.0, 1.0))
    with pytest.raises(ValueError, match="sample size"):
        Gauss1D().sample(0, rng_stream(0, 0, "train"))


def test_mixture_means_come_from_their_seed() -> None:
    first = MixtureHighD(n_classes=5, input_dim=3, means_seed=11)
    second = MixtureHighD(n_classes=5, input_dim=3, means_seed=11)
    np.testing.assert_array_equal(first.means, second.means)
    assert first.means.shape == (5, 2, 3)

    data = first.sample(40, rng_stream(1, 0, "train"))
    assert data.X.shape == (40, 3)
    np.testing.assert_allclose(first.true_conditional(data.X).sum(axis=1), 1.0)
    with pytest.raises(ValueError, match="no evaluation grid"):
        first.grid(10)


def test_regression_outputs_stay_in_range_and_cells_sum_to_one() -> None:
    generator = Regression1D(n_cells=20)
    data = generator.sample(300, rng_stream(2, 0, "train"))
    assert data.X.min() >= 0.0 and data.X.max() <= 1.0
    assert data.y.min() >= 0.0 and data.y.max() <= 1.0
    labels = data.labels(generator.ground_set)
    assert labels.min() >= 0 and labels.max() <= 19

    cond = generator.true_conditional(generator.grid(11))
    assert cond.shape == (11, 20)
    np.testing.assert_allclose(cond.sum(axis=1), 1.0, atol=1e-10)
    assert np.all(cond >= 0)


def test_build_generator_from_config() -> None:
    generator = build_generator({"name": "gauss1d", "means": [-1.0, 1.0]})
    assert isinstance(generator, Gauss1D)
    assert generator.priors == (0.5, 0.5)
    mixture = build_generator({"name": "mixture"}, overrides={"k": 6, "dim": 2})
    assert mixture.k == 6 and mixture.dim == 2
    assert build_generator({"name": "Regression1D"}).ground_set.cells is not None

    with pytest.raises(ValueError, match="missing required field: name"):
        build_generator({})
    with pytest.raises(ValueError, match="Unsupported generator"):
        build_generator({"name": "moons"})
    with pytest.raises(ValueError, match=r"\[intercept, slope\]"):
        build_generator({"name": "regression1d", "center_low": [0.1]})
