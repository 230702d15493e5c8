"""Submodular size functions on finite ground sets and their Lovász extensions."""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, Iterable, List, Sequence, Tuple

import numpy as np

SubsetLike = int | Sequence[int] | np.ndarray

# Score values closer than this are treated as one level of a level-set family.
LEVEL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CellPartition:
    """Uniform partition of [lower, upper] into ordered, equal-width cells."""

    lower: float
    upper: float
    size: int

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("cell partition needs at least one cell")
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)) or self.upper <= self.lower:
            raise ValueError(f"invalid cell range [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return (self.upper - self.lower) / self.size

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.size + 1)

    @property
    def centers(self) -> np.ndarray:
        edges = self.edges
        return 0.5 * (edges[:-1] + edges[1:])

    def locate(self, values: np.ndarray) -> np.ndarray:
        """Map real outputs to cell indices; the upper edge belongs to the last cell."""

        idx = np.floor((np.asarray(values, dtype=float) - self.lower) / self.width).astype(int)
        return np.clip(idx, 0, self.size - 1)


@dataclass(frozen=True)
class GroundSet:
    size: int
    cells: CellPartition | None = None

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("ground set size k must be >= 1")
        if self.cells is not None and self.cells.size != self.size:
            raise ValueError(f"cell partition has {self.cells.size} cells but k={self.size}")

    @property
    def ordered(self) -> bool:
        return self.cells is not None

    def to_dict(self) -> Dict[str, Any]:
        cells = None
        if self.cells is not None:
            cells = {"lower": self.cells.lower, "upper": self.cells.upper, "size": self.cells.size}
        return {"size": self.size, "cells": cells}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "GroundSet":
        cells = payload.get("cells")
        partition = None
        if cells:
            partition = CellPartition(float(cells["lower"]), float(cells["upper"]), int(cells["size"]))
        return cls(size=int(payload["size"]), cells=partition)


@dataclass(frozen=True, eq=False)
class CoreMeasure:
    """Element of the base polytope B(V): mu(Y) = V(Y) and mu(A) <= V(A)."""

    weights: np.ndarray


@dataclass(frozen=True, eq=False)
class DominatedMeasure:
    """Additive measure M with M(Y) = V(Y) and M(A) <= V(A)."""

    weights: np.ndarray

    @property
    def total(self) -> float:
        return float(self.weights.sum())


def as_mask(subset: SubsetLike, k: int) -> np.ndarray:
    """Convert a bitmask, an index list or a boolean vector into a boolean mask."""

    if isinstance(subset, (int, np.integer)) and not isinstance(subset, bool):
        value = int(subset)
        if value < 0 or value >= (1 << k):
            raise ValueError(f"bitmask {value} out of range for k={k}")
        return ((value >> np.arange(k)) & 1).astype(bool)

    arr = np.asarray(subset)
    if arr.dtype == bool:
        if arr.shape != (k,):
            raise ValueError(f"boolean subset must have shape ({k},), got {arr.shape}")
        return arr.copy()

    idx = arr.astype(int).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= k):
        raise ValueError(f"subset indices must lie in 0..{k - 1}")
    mask = np.zeros(k, dtype=bool)
    mask[idx] = True
    return mask


def _as_scores(f: np.ndarray | Sequence[float], k: int) -> np.ndarray:
    arr = np.asarray(f, dtype=float)
    if arr.shape[-1] != k or arr.ndim not in (1, 2):
        raise ValueError(f"score vector must have trailing dimension k={k}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("score vector contains non-finite entries")
    return arr


def decreasing_order(f: np.ndarray) -> np.ndarray:
    """Decreasing sort of scores, ties broken by ascending element index."""

    return np.argsort(-f, axis=-1, kind="stable")


class SizeFunction(ABC):
    """Non-decreasing submodular set function V on {0..k-1}."""

    variant: ClassVar[str]

    @property
    @abstractmethod
    def k(self) -> int: ...

    @abstractmethod
    def evaluate_masks(self, masks: np.ndarray) -> np.ndarray:
        """Evaluate V on each row of a boolean (m, k) matrix."""

    @abstractmethod
    def _lovasz_rows(self, F: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _greedy_rows(self, F: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def dominated_measure(self) -> DominatedMeasure: ...

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]: ...

    @property
    def total(self) -> float:
        return float(self.evaluate_masks(np.ones((1, self.k), dtype=bool))[0])

    def fingerprint(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True, eq=False)
class Modular(SizeFunction):
    weights: np.ndarray
    variant: ClassVar[str] = "modular"

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size < 1 or not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("modular weights must be finite and non-negative")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, k: int, total: float = 1.0) -> "Modular":
        return cls(np.full(k, total / k))

    @classmethod
    def matching(cls, V: "SizeFunction") -> "Modular":
        """Uniform weights with the same total as V: |A| V(Y) / k."""

        return cls.uniform(V.k, total=V.total)

    @property
    def k(self) -> int:
        return int(self.weights.size)

    def evaluate_masks(self, masks: np.ndarray) -> np.ndarray:
        return np.asarray(masks, dtype=float) @ self.weights

    def _lovasz_rows(self, F: np.ndarray) -> np.ndarray:
        return F @ self.weights

    def _greedy_rows(self, F: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.weights, F.shape).copy()

    def dominated_measure(self) -> DominatedMeasure:
        return DominatedMeasure(self.weights.copy())

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "weights": self.weights.tolist()}


@dataclass(frozen=True, eq=False)
class ConcaveCardinality(SizeFunction):
    """V(A) = phi(|A|); phi is stored as the vector phi(0..k)."""

    phi: np.ndarray
    variant: ClassVar[str] = "concave_card"

    def __post_init__(self) -> None:
        p = np.asarray(self.phi, dtype=float).ravel()
        if p.size < 2:
            raise ValueError("phi must hold phi(0..k) with k >= 1")
        if not np.all(np.isfinite(p)):
            raise ValueError("phi values must be finite")
        if abs(p[0]) > 0.0:
            raise ValueError("phi(0) must equal 0")
        if np.any(np.diff(p) < -LEVEL_TOLERANCE):
            raise ValueError("phi must be non-decreasing")
        object.__setattr__(self, "phi", p)

    @classmethod
    def from_shape(cls, k: int, shape: str, scale: float = 1.0, r: int | None = None) -> "ConcaveCardinality":
        i = np.arange(k + 1, dtype=float)
        if shape == "linear":
            values = i
        elif shape == "log1p":
            values = np.log1p(i)
        elif shape == "truncated":
            if r is None or r < 1:
                raise ValueError("truncated phi needs r >= 1")
            values = np.minimum(i, float(r))
        elif shape == "sqrt":
            values = np.sqrt(i)
        else:
            raise ValueError(f"Unsupported phi shape '{shape}'")
        return cls(scale * values)

    @property
    def k(self) -> int:
        return int(self.phi.size - 1)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.phi)

    @property
    def is_concave(self) -> bool:
        return bool(np.all(np.diff(self.increments) <= LEVEL_TOLERANCE * (1.0 + abs(self.phi[-1]))))

    def evaluate_masks(self, masks: np.ndarray) -> np.ndarray:
        return self.phi[np.asarray(masks, dtype=bool).sum(axis=-1)]

    def _lovasz_rows(self, F: np.ndarray) -> np.ndarray:
        ordered = np.take_along_axis(F, decreasing_order(F), axis=-1)
        return ordered @ self.increments

    def _greedy_rows(self, F: np.ndarray) -> np.ndarray:
        mu = np.empty_like(F)
        np.put_along_axis(mu, decreasing_order(F), np.broadcast_to(self.increments, F.shape), axis=-1)
        return mu

    def dominated_measure(self) -> DominatedMeasure:
        return DominatedMeasure(np.full(self.k, self.phi[-1] / self.k))

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant, "phi": self.phi.tolist()}


@dataclass(frozen=True, eq=False)
class SetCover(SizeFunction):
    """V(A) = sum of w_z over cover terms z whose neighborhood N(z) meets A."""

    size: int
    neighborhoods: Tuple[Tuple[int, ...], ...]
    weights: np.ndarray
    incidence: np.ndarray = field(init=False, repr=False)
    variant: ClassVar[str] = "set_cover"

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("set cover needs k >= 1")
        hoods = tuple(tuple(sorted({int(j) for j in hood})) for hood in self.neighborhoods)
        w = np.asarray(self.weights, dtype=float).ravel()
        if len(hoods) != w.size:
            raise ValueError(f"{len(hoods)} neighborhoods but {w.size} weights")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("cover weights must be finite and non-negative")
        incidence = np.zeros((len(hoods), self.size), dtype=bool)
        for z, hood in enumerate(hoods):
            if not hood:
                raise ValueError(f"neighborhood of cover term {z} is empty")
            if hood[0] < 0 or hood[-1] >= self.size:
                raise ValueError(f"neighborhood of cover term {z} leaves 0..{self.size - 1}")
            incidence[z, list(hood)] = True
        object.__setattr__(self, "neighborhoods", hoods)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "incidence", incidence)

    @classmethod
    def morphological(cls, k: int, radius: int, weights: np.ndarray | None = None) -> "SetCover":
        """Dilation by the structuring element {-radius..radius} on ordered cells."""

        if radius < 0:
            raise ValueError("structuring radius must be >= 0")
        hoods = [tuple(range(max(0, z - radius), min(k, z + radius + 1))) for z in range(k)]
        w = np.full(k, 1.0 / k) if weights is None else np.asarray(weights, dtype=float)
        return cls(k, tuple(hoods), w)

    @property
    def k(self) -> int:
        return self.size

    @property
    def self_covering(self) -> bool:
        """True when term z is indexed by element z and z lies in N(z)."""

        if self.incidence.shape[0] != self.size:
            return False
        return bool(np.all(np.diag(self.incidence)))

    def evaluate_masks(self, masks: np.ndarray) -> np.ndarray:
        m = np.asarray(masks, dtype=bool)
        covered = (m.astype(np.int64) @ self.incidence.T.astype(np.int64)) > 0
        return covered @ self.weights

    def _masked(self, F: np.ndarray) -> np.ndarray:
        return np.where(self.incidence[None, :, :], F[:, None, :], -np.inf)

    def _lovasz_rows(self, F: np.ndarray) -> np.ndarray:
        return self._masked(F).max(axis=-1) @ self.weights

    def _greedy_rows(self, F: np.ndarray) -> np.ndarray:
        # argmax keeps the first maximizer, matching the stable decreasing order
        winners = self._masked(F).argmax(axis=-1)
        onehot = winners[:, :, None] == np.arange(self.size)[None, None, :]
        return np.einsum("nzk,z->nk", onehot, self.weights)

    def dominated_measure(self) -> DominatedMeasure:
        if self.self_covering:
            return DominatedMeasure(self.weights.copy())
        share = self.incidence / self.incidence.sum(axis=1, keepdims=True)
        return DominatedMeasure(self.weights @ share)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "k": self.size,
            "neighborhoods": [list(h) for h in self.neighborhoods],
            "weights": self.weights.tolist(),
        }


def evaluate(V: SizeFunction, subset: SubsetLike) -> float:
    return float(V.evaluate_masks(as_mask(subset, V.k)[None, :])[0])


def lovasz(V: SizeFunction, f: np.ndarray | Sequence[float]) -> float | np.ndarray:
    """Lovász extension v(f); a matrix of score rows gives one value per row."""

    F = _as_scores(f, V.k)
    values = V._lovasz_rows(np.atleast_2d(F))
    return float(values[0]) if F.ndim == 1 else values


def greedy_subgradient(V: SizeFunction, f: np.ndarray | Sequence[float]) -> CoreMeasure:
    F = _as_scores(f, V.k)
    if F.ndim != 1:
        raise ValueError("greedy_subgradient expects one score vector; use greedy_subgradients for rows")
    return CoreMeasure(V._greedy_rows(F[None, :])[0])


def greedy_subgradients(V: SizeFunction, F: np.ndarray) -> np.ndarray:
    return V._greedy_rows(np.atleast_2d(_as_scores(F, V.k)))


def blend_with_dominated(V: SizeFunction, epsilon: float) -> SizeFunction:
    """Return W = epsilon*M + (1-epsilon)*V, kept inside V's family."""

    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("blend epsilon must lie in [0, 1]")
    if isinstance(V, Modular):
        return V
    if isinstance(V, ConcaveCardinality):
        chord = np.arange(V.k + 1) * V.phi[-1] / V.k
        return ConcaveCardinality(epsilon * chord + (1.0 - epsilon) * V.phi)
    if isinstance(V, SetCover):
        m = V.dominated_measure().weights
        hoods = list(V.neighborhoods) + [(j,) for j in range(V.k)]
        weights = np.concatenate([(1.0 - epsilon) * V.weights, epsilon * m])
        return SetCover(V.k, tuple(hoods), weights)
    raise ValueError(f"Unsupported size function variant '{type(V).__name__}'")


def size_function_from_dict(payload: Dict[str, Any]) -> SizeFunction:
    variant = str(payload.get("variant", "")).strip()
    if variant == Modular.variant:
        return Modular(np.asarray(payload["weights"], dtype=float))
    if variant == ConcaveCardinality.variant:
        return ConcaveCardinality(np.asarray(payload["phi"], dtype=float))
    if variant == SetCover.variant:
        hoods: Iterable[Sequence[int]] = payload["neighborhoods"]
        return SetCover(int(payload["k"]), tuple(tuple(h) for h in hoods), np.asarray(payload["weights"], dtype=float))
    raise ValueError(f"Unsupported size function variant '{variant}'")


def build_size_function(spec: Dict[str, Any], k: int) -> SizeFunction:
    """Build a size function from a config section for a ground set of size k."""

    variant = str(spec.get("variant", "modular")).strip()
    scale = float(spec.get("scale", 1.0))
    if variant == Modular.variant:
        if spec.get("match") is not None:
            return Modular.matching(build_size_function(spec["match"], k))
        weights = spec.get("weights")
        if weights is None:
            return Modular.uniform(k, total=scale)
        return Modular(np.asarray(weights, dtype=float))
    if variant == ConcaveCardinality.variant:
        phi = spec.get("phi", "linear")
        if isinstance(phi, list):
            return ConcaveCardinality(np.asarray(phi, dtype=float))
        r = spec.get("r")
        return ConcaveCardinality.from_shape(k, str(phi), scale=scale, r=None if r is None else int(r))
    if variant == SetCover.variant:
        weights = spec.get("weights")
        w = None if weights is None else np.asarray(weights, dtype=float)
        cover = SetCover.morphological(k, int(spec.get("radius", 1)), w)
        if w is None and scale != 1.0:
            cover = SetCover(k, cover.neighborhoods, scale * cover.weights)
        return cover
    raise ValueError(f"Unsupported size function variant '{variant}'")


def level_blocks(f: np.ndarray, tol: float = LEVEL_TOLERANCE) -> List[np.ndarray]:
    """Group elements into blocks of (numerically) equal score, highest block first."""

    order = decreasing_order(np.asarray(f, dtype=float))
    values = np.asarray(f, dtype=float)[order]
    breaks = np.flatnonzero(np.abs(np.diff(values)) > tol) + 1
    return [block for block in np.split(order, breaks)]
