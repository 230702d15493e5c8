"""Fixed-level thresholds on the nested-set curve of one score vector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from losses.curves import build_curve
from submodular.size_functions import SizeFunction


@dataclass(frozen=True, eq=False)
class ThresholdPair:
    """Adjacent level sets around miscoverage alpha.

    The plus set has miscoverage at most alpha and is the deterministic
    prediction; the randomized prediction returns the minus set with
    probability q and the plus set otherwise.
    """

    alpha: float
    lambda_minus: float
    lambda_plus: float
    q: float
    alpha_minus: float
    alpha_plus: float
    set_minus: np.ndarray
    set_plus: np.ndarray
    size_minus: float
    size_plus: float

    @property
    def expected_miscoverage(self) -> float:
        return self.q * self.alpha_minus + (1.0 - self.q) * self.alpha_plus

    @property
    def expected_size(self) -> float:
        return self.q * self.size_minus + (1.0 - self.q) * self.size_plus

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.set_minus if rng.random() < self.q else self.set_plus


def thresholds_for_alpha(V: SizeFunction, probabilities: np.ndarray, scores: np.ndarray, alpha: float) -> ThresholdPair:
    """Walk the curve of (f)_- under p and bracket the target miscoverage."""

    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    f = np.minimum(np.asarray(getattr(scores, "scores", scores), dtype=float), 0.0)
    curve = build_curve(V, f, cond=probabilities)
    alphas = curve.alphas
    # alpha = 0 asks for the full set even when some labels have zero probability
    j = curve.n_levels if alpha <= 0.0 else int(np.flatnonzero(alphas <= alpha)[0])
    i = max(j - 1, 0)
    if alphas[j] == alpha or j == 0:
        i, q = j, 0.0
    else:
        q = float((alpha - alphas[j]) / (alphas[i] - alphas[j]))
    return ThresholdPair(
        alpha=alpha,
        lambda_minus=float(-curve.thresholds[i]),
        lambda_plus=float(-curve.thresholds[j]),
        q=q,
        alpha_minus=float(alphas[i]),
        alpha_plus=float(alphas[j]),
        set_minus=curve.sets[i].copy(),
        set_plus=curve.sets[j].copy(),
        size_minus=float(curve.sizes[i]),
        size_plus=float(curve.sizes[j]),
    )
