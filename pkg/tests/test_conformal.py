from __future__ import annotations

import numpy as np
import pytest

from coverage.conformal import (
    adaptive_lambdas,
    conformal_sets,
    conformalize,
    conformity_scores,
    label_scores,
)
from data_pipeline.generators import Gauss1D, rng_stream
from scripts.experiments import oracle_scores
from submodular.size_functions import Modular


def test_calibration_rank_and_threshold() -> None:
    s = np.arange(1.0, 10.0)
    ninety = conformalize(s, 0.1)
    assert ninety.rank == 9
    assert ninety.threshold == 1.0

    eighty = conformalize(s, 0.2)
    assert eighty.rank == 8
    assert eighty.threshold == 2.0
    np.testing.assert_array_equal(conformal_sets(eighty, np.array([[1.0, 2.0, 3.0]])), [[False, True, True]])

    assert conformalize(np.arange(19.0), 0.05).rank == 19


def test_small_calibration_sets_predict_everything() -> None:
    calibration = conformalize(np.arange(1.0, 10.0), 0.05)
    assert calibration.full_set
    assert calibration.to_dict()["threshold"] is None
    assert conformal_sets(calibration, np.array([[-1e9, 0.0]])).all()


def test_calibration_arguments_are_checked() -> None:
    with pytest.raises(ValueError, match="alpha must lie in"):
        conformalize(np.ones(5), 0.0)
    with pytest.raises(ValueError, match="at least one score"):
        conformalize(np.array([]), 0.1)
    with pytest.raises(ValueError, match="Unsupported conformity convention"):
        conformalize(np.ones(5), 0.1, convention="quantile")


def test_conformity_conventions() -> None:
    F = np.array([[-1.0, -2.0]])
    np.testing.assert_allclose(conformity_scores(F, np.array([0.5])), [[-0.5, -1.5]])
    np.testing.assert_allclose(conformity_scores(F, np.array([0.5]), "ratio"), [[-2.0, -4.0]])
    with pytest.raises(ValueError, match="Unsupported conformity convention"):
        conformity_scores(F, np.array([0.5]), "quantile")
    np.testing.assert_array_equal(label_scores(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([1, 0])), [2.0, 3.0])


@pytest.mark.parametrize("convention", ["additive", "ratio"])
def test_calibrated_oracle_sets_reach_marginal_coverage(convention: str) -> None:
    generator = Gauss1D()
    V = Modular.uniform(3)
    alpha = 0.1

    def conformity(data):
        scores = oracle_scores(V, generator.true_conditional(data.X))
        return conformity_scores(scores, adaptive_lambdas(V, scores, alpha), convention)

    calib = generator.sample(500, rng_stream(3, 0, "calibration"))
    test = generator.sample(4000, rng_stream(3, 0, "test"))
    calibration = conformalize(label_scores(conformity(calib), calib.labels(generator.ground_set)), alpha, convention)
    sets = conformal_sets(calibration, conformity(test))
    covered = sets[np.arange(test.n), test.labels(generator.ground_set)]
    assert covered.mean() >= 1.0 - alpha - 0.04
    assert sets.sum(axis=1).mean() < 3.0
