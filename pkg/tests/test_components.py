from __future__ import annotations

import numpy as np

from coverage.thresholds import thresholds_for_alpha
from data_pipeline.generators import Regression1D, rng_stream
from kernels.features import incomplete_cholesky
from kernels.functions import KernelSpec
from losses.curves import build_curve, count_components
from scripts.experiments import oracle_scores
from solvers.baselines import train_interval_baseline
from solvers.predictor import predictor_scores
from submodular.size_functions import Modular, SetCover


def _histogram_sets(V, labels: np.ndarray, k: int, alpha: float) -> np.ndarray:
    freq = np.bincount(labels, minlength=k) / labels.size
    scores = oracle_scores(V, freq[None, :], smoothing=0.05)[0]
    return thresholds_for_alpha(V, freq, scores, alpha).set_plus


def test_cover_sets_have_fewer_components_than_modular_sets() -> None:
    generator = Regression1D()
    ground = generator.ground_set
    cover = SetCover.morphological(ground.size, radius=2)
    modular = Modular.matching(cover)

    cover_parts, modular_parts = [], []
    for rep in range(10):
        data = generator.sample(150, rng_stream(0, rep, "train"))
        labels = data.labels(ground)
        cover_set = _histogram_sets(cover, labels, ground.size, 0.1)
        modular_set = _histogram_sets(modular, labels, ground.size, 0.1)
        cover_parts.append(count_components(cover_set))
        modular_parts.append(count_components(modular_set))
        assert cover_set.any() and modular_set.any()

    assert sum(cover_parts) < sum(modular_parts)


def test_interval_baseline_predicts_one_run_of_cells_per_input() -> None:
    generator = Regression1D()
    ground = generator.ground_set
    data = generator.sample(200, rng_stream(1, 0, "train"))
    fmap = incomplete_cholesky(KernelSpec("polynomial", degree=1), data.X)
    predictor = train_interval_baseline(data.X, data.y, fmap, reg=1e-3, alpha=0.1, ground_set=ground)

    scores = predictor_scores(predictor, generator.grid(21))
    V = Modular.uniform(ground.size)
    for row in scores:
        curve = build_curve(V, row)
        assert all(count_components(mask) == 1 for mask in curve.sets[1:])
