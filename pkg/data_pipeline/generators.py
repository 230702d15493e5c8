"""Synthetic generators with closed-form conditional distributions.

All randomness flows through named counter-based streams: one Philox
generator per (seed, replication, purpose) triple.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, Tuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm, truncnorm

from data_pipeline.schema import Dataset
from submodular.size_functions import CellPartition, GroundSet

LOGGER = logging.getLogger("data_pipeline.generators")

STREAM_PURPOSES: Dict[str, int] = {"train": 0, "test": 1, "calibration": 2, "sgd": 3, "grid": 4, "cv": 5}


def rng_stream(seed: int, replication: int, purpose: str) -> np.random.Generator:
    if purpose not in STREAM_PURPOSES:
        raise ValueError(f"Unknown stream purpose '{purpose}'. Expected one of: {sorted(STREAM_PURPOSES)}")
    key = np.random.SeedSequence([int(seed), int(replication), STREAM_PURPOSES[purpose]])
    return np.random.Generator(np.random.Philox(key))


class DataGenerator(ABC):
    name: ClassVar[str]

    @property
    @abstractmethod
    def ground_set(self) -> GroundSet: ...

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @abstractmethod
    def sample(self, n: int, rng: np.random.Generator) -> Dataset: ...

    @abstractmethod
    def true_conditional(self, X: np.ndarray) -> np.ndarray:
        """Exact (n, k) matrix of P(element | x)."""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]: ...

    @property
    def k(self) -> int:
        return self.ground_set.size

    def grid(self, n_points: int) -> np.ndarray:
        """Evaluation inputs for one-dimensional generators."""

        raise ValueError(f"generator '{self.name}' has no evaluation grid")

    def grid_weights(self, X: np.ndarray) -> np.ndarray:
        raise ValueError(f"generator '{self.name}' has no evaluation grid")


def _check_n(n: int) -> int:
    if int(n) < 1:
        raise ValueError("sample size n must be >= 1")
    return int(n)


@dataclass(frozen=True)
class Gauss1D(DataGenerator):
    """Class-conditional Gaussians on the real line."""

    means: Tuple[float, ...] = (-2.0, 0.0, 2.0)
    stds: Tuple[float, ...] = (1.0, 1.0, 1.0)
    priors: Tuple[float, ...] = (1.0 / 3, 1.0 / 3, 1.0 / 3)
    grid_range: Tuple[float, float] = (-4.0, 4.0)
    name: ClassVar[str] = "gauss1d"

    def __post_init__(self) -> None:
        if not len(self.means) == len(self.stds) == len(self.priors) or len(self.means) < 1:
            raise ValueError("means, stds and priors must have the same positive length")
        if any(s <= 0 for s in self.stds):
            raise ValueError("class standard deviations must be > 0")
        if any(p < 0 for p in self.priors) or abs(sum(self.priors) - 1.0) > 1e-9:
            raise ValueError("priors must be non-negative and sum to 1")

    @property
    def ground_set(self) -> GroundSet:
        return GroundSet(len(self.means))

    @property
    def dim(self) -> int:
        return 1

    def sample(self, n: int, rng: np.random.Generator) -> Dataset:
        n = _check_n(n)
        labels = rng.choice(self.k, size=n, p=np.asarray(self.priors))
        x = np.asarray(self.means)[labels] + np.asarray(self.stds)[labels] * rng.standard_normal(n)
        return Dataset(x[:, None], labels.astype(float))

    def _log_joint(self, X: np.ndarray) -> np.ndarray:
        x = np.asarray(X, dtype=float).reshape(-1, 1)
        with np.errstate(divide="ignore"):
            log_prior = np.log(np.asarray(self.priors))
        return log_prior[None, :] + norm.logpdf(x, loc=np.asarray(self.means)[None, :], scale=np.asarray(self.stds)[None, :])

    def true_conditional(self, X: np.ndarray) -> np.ndarray:
        log_joint = self._log_joint(X)
        return np.exp(log_joint - logsumexp(log_joint, axis=1, keepdims=True))

    def grid(self, n_points: int) -> np.ndarray:
        return np.linspace(self.grid_range[0], self.grid_range[1], n_points)[:, None]

    def grid_weights(self, X: np.ndarray) -> np.ndarray:
        return np.exp(logsumexp(self._log_joint(X), axis=1))

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "means": list(self.means), "stds": list(self.stds), "priors": list(self.priors)}


@dataclass(frozen=True)
class MixtureHighD(DataGenerator):
    """k classes in dimension d, each an equal mixture of Gaussian components of variance sigma^2.

    Component means come from a fixed seed so a config names them exactly.
    """

    n_classes: int = 24
    input_dim: int = 4
    sigma: float = 0.5
    components: int = 2
    means_seed: int = 20160601
    spread: float = 1.0
    means: np.ndarray = field(init=False, repr=False, compare=False)
    name: ClassVar[str] = "mixture"

    def __post_init__(self) -> None:
        if self.n_classes < 1 or self.input_dim < 1 or self.components < 1:
            raise ValueError("n_classes, input_dim and components must be >= 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(self.means_seed)))
        means = self.spread * rng.standard_normal((self.n_classes, self.components, self.input_dim))
        object.__setattr__(self, "means", means)

    @property
    def ground_set(self) -> GroundSet:
        return GroundSet(self.n_classes)

    @property
    def dim(self) -> int:
        return self.input_dim

    def sample(self, n: int, rng: np.random.Generator) -> Dataset:
        n = _check_n(n)
        labels = rng.integers(self.n_classes, size=n)
        comps = rng.integers(self.components, size=n)
        X = self.means[labels, comps] + self.sigma * rng.standard_normal((n, self.input_dim))
        return Dataset(X, labels.astype(float))

    def true_conditional(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        diff = X[:, None, None, :] - self.means[None]
        log_comp = -0.5 * np.sum(diff**2, axis=-1) / self.sigma**2
        log_class = logsumexp(log_comp, axis=2)
        return np.exp(log_class - logsumexp(log_class, axis=1, keepdims=True))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "k": self.n_classes,
            "dim": self.input_dim,
            "sigma": self.sigma,
            "components": self.components,
            "means_seed": self.means_seed,
            "spread": self.spread,
        }


@dataclass(frozen=True)
class Regression1D(DataGenerator):
    """x ~ U[0, 1]; y | x a two-mode mixture of truncated normals on [lower, upper], cut into cells.

    The modes drift towards each other and the second one gains weight as x
    grows, so optimal prediction sets switch between one and two intervals.
    """

    n_cells: int = 40
    lower: float = 0.0
    upper: float = 1.0
    center_low: Tuple[float, float] = (0.25, 0.1)
    center_high: Tuple[float, float] = (0.75, -0.1)
    width_low: Tuple[float, float] = (0.05, 0.05)
    width_high: Tuple[float, float] = (0.08, 0.0)
    weight_low: Tuple[float, float] = (0.7, -0.4)
    name: ClassVar[str] = "regression1d"

    @property
    def ground_set(self) -> GroundSet:
        return GroundSet(self.n_cells, CellPartition(self.lower, self.upper, self.n_cells))

    @property
    def dim(self) -> int:
        return 1

    @staticmethod
    def _affine(coeffs: Tuple[float, float], x: np.ndarray) -> np.ndarray:
        return coeffs[0] + coeffs[1] * x

    def _modes(self, x: np.ndarray):
        span = self.upper - self.lower
        out = []
        for center, width in ((self.center_low, self.width_low), (self.center_high, self.width_high)):
            loc = self.lower + span * self._affine(center, x)
            scale = span * self._affine(width, x)
            a, b = (self.lower - loc) / scale, (self.upper - loc) / scale
            out.append(truncnorm(a, b, loc=loc, scale=scale))
        weight = np.clip(self._affine(self.weight_low, x), 0.0, 1.0)
        return out[0], out[1], weight

    def sample(self, n: int, rng: np.random.Generator) -> Dataset:
        n = _check_n(n)
        x = rng.uniform(0.0, 1.0, size=n)
        low, high, weight = self._modes(x)
        pick_low = rng.random(n) < weight
        y = np.where(pick_low, low.rvs(random_state=rng), high.rvs(random_state=rng))
        return Dataset(x[:, None], y)

    def true_conditional(self, X: np.ndarray) -> np.ndarray:
        x = np.asarray(X, dtype=float).reshape(-1)
        low, high, weight = self._modes(x[:, None])
        edges = self.ground_set.cells.edges[None, :]
        cdf = weight * low.cdf(edges) + (1.0 - weight) * high.cdf(edges)
        return np.diff(cdf, axis=1)

    def grid(self, n_points: int) -> np.ndarray:
        return np.linspace(0.0, 1.0, n_points)[:, None]

    def grid_weights(self, X: np.ndarray) -> np.ndarray:
        return np.ones(np.asarray(X).shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "n_cells": self.n_cells,
            "lower": self.lower,
            "upper": self.upper,
            "center_low": list(self.center_low),
            "center_high": list(self.center_high),
            "width_low": list(self.width_low),
            "width_high": list(self.width_high),
            "weight_low": list(self.weight_low),
        }


def _pair(cfg: Dict[str, Any], key: str, default: Tuple[float, float]) -> Tuple[float, float]:
    values = cfg.get(key, list(default))
    if len(values) != 2:
        raise ValueError(f"generator.{key} must hold [intercept, slope]")
    return (float(values[0]), float(values[1]))


def build_generator(cfg: Dict[str, Any], overrides: Dict[str, Any] | None = None) -> DataGenerator:
    """Generator from the config 'generator' section (name plus variant fields)."""

    cfg = {**cfg, **(overrides or {})}
    name = str(cfg.get("name", "")).lower().strip()
    if not name:
        raise ValueError("generator config missing required field: name")
    if name == Gauss1D.name:
        k = len(cfg.get("means", [-2.0, 0.0, 2.0]))
        return Gauss1D(
            means=tuple(float(v) for v in cfg.get("means", [-2.0, 0.0, 2.0])),
            stds=tuple(float(v) for v in cfg.get("stds", [1.0] * k)),
            priors=tuple(float(v) for v in cfg.get("priors", [1.0 / k] * k)),
            grid_range=tuple(float(v) for v in cfg.get("grid_range", [-4.0, 4.0])),
        )
    if name == MixtureHighD.name:
        return MixtureHighD(
            n_classes=int(cfg.get("k", 24)),
            input_dim=int(cfg.get("dim", 4)),
            sigma=float(cfg.get("sigma", 0.5)),
            components=int(cfg.get("components", 2)),
            means_seed=int(cfg.get("means_seed", 20160601)),
            spread=float(cfg.get("spread", 1.0)),
        )
    if name == Regression1D.name:
        return Regression1D(
            n_cells=int(cfg.get("n_cells", 40)),
            lower=float(cfg.get("lower", 0.0)),
            upper=float(cfg.get("upper", 1.0)),
            center_low=_pair(cfg, "center_low", (0.25, 0.1)),
            center_high=_pair(cfg, "center_high", (0.75, -0.1)),
            width_low=_pair(cfg, "width_low", (0.05, 0.05)),
            width_high=_pair(cfg, "width_high", (0.08, 0.0)),
            weight_low=_pair(cfg, "weight_low", (0.7, -0.4)),
        )
    raise ValueError(f"Unsupported generator '{name}'")
