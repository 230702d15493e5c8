from __future__ import annotations

import numpy as np
import pytest

from solvers.post_cluster import (
    check_decomposition,
    cluster_weights,
    default_training_size_function,
    post_cluster,
    post_cluster_rows,
)
from submodular.separable import separable_min
from submodular.size_functions import ConcaveCardinality, Modular, SetCover


@pytest.mark.parametrize(
    "V",
    [ConcaveCardinality.from_shape(5, "log1p"), SetCover.morphological(5, radius=1)],
    ids=lambda V: V.variant,
)
def test_blended_training_function_is_a_valid_decomposition(V) -> None:
    W = default_training_size_function(V)
    check_decomposition(V, W)
    assert W.total == pytest.approx(V.total)


def test_invalid_decompositions_are_rejected() -> None:
    with pytest.raises(ValueError, match="V - W must be submodular"):
        check_decomposition(Modular.uniform(4), ConcaveCardinality.from_shape(4, "sqrt"))
    with pytest.raises(ValueError, match="W must be submodular"):
        check_decomposition(Modular.uniform(4), ConcaveCardinality(np.array([0.0, 1.0, 3.0, 6.0, 10.0])))
    with pytest.raises(ValueError, match="V has k=3 but W has k=4"):
        check_decomposition(Modular.uniform(3), Modular.uniform(4))


def test_modular_training_scores_recover_the_weights() -> None:
    W = Modular(np.array([0.1, 0.2, 0.3, 0.4]))
    q = np.array([0.4, 0.3, 0.2, 0.1])
    h = -W.weights / q
    np.testing.assert_allclose(cluster_weights(h, W)[0], q)

    V = ConcaveCardinality.from_shape(4, "log1p")
    table = post_cluster(h, V, W)
    np.testing.assert_allclose(table.scores, separable_min(V, q))
    assert table.source == "post_cluster"

    rows = post_cluster_rows(np.vstack([h, h]), V, W)
    np.testing.assert_allclose(rows, np.tile(separable_min(V, q), (2, 1)))


def test_smoothing_is_removed_and_weights_stay_positive() -> None:
    W = Modular.uniform(3)
    h = np.array([-1.0, -2.0, 0.5])
    q = cluster_weights(h, W, smoothing=0.5)[0]
    assert np.all(q > 0)
    assert q[0] == pytest.approx(1.0 / 3.0 - 0.5 / 3.0)
    assert np.isfinite(post_cluster(h, Modular.uniform(3), W).scores).all()


def test_score_length_must_match() -> None:
    with pytest.raises(ValueError, match="length k=3"):
        post_cluster(np.array([-1.0, -1.0]), Modular.uniform(3), Modular.uniform(3))
    assert post_cluster_rows(np.zeros((0, 3)), Modular.uniform(3), Modular.uniform(3)).shape == (0, 3)
