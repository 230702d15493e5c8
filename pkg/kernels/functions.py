"""Kernel functions for score predictors."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Dict

import numpy as np
from scipy.spatial.distance import cdist

KERNEL_FAMILIES = ("exponential", "polynomial", "negative_distance")


@dataclass(frozen=True)
class KernelSpec:
    family: str
    alpha: float = 1.0
    degree: int = 1
    shift: float | None = None

    def __post_init__(self) -> None:
        if self.family not in KERNEL_FAMILIES:
            raise ValueError(f"Unsupported kernel family '{self.family}'. Expected one of: {list(KERNEL_FAMILIES)}")
        if not self.alpha > 0:
            raise ValueError("kernel alpha must be > 0")
        if self.degree < 1:
            raise ValueError("polynomial degree must be >= 1")
        if self.shift is not None and self.shift < 0:
            raise ValueError("negative-distance shift must be >= 0")

    def to_dict(self) -> Dict[str, Any]:
        return {"family": self.family, "alpha": self.alpha, "degree": self.degree, "shift": self.shift}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "KernelSpec":
        family = str(payload.get("family", "polynomial"))
        degree = int(payload.get("degree", 1))
        if family == "linear":
            family, degree = "polynomial", 1
        elif family == "quadratic":
            family, degree = "polynomial", 2
        elif family == "spline":
            family = "negative_distance"
        shift = payload.get("shift")
        return cls(
            family=family,
            alpha=float(payload.get("alpha", 1.0)),
            degree=degree,
            shift=None if shift is None else float(shift),
        )


def shift_for_radius(radius: float, dim: int) -> float:
    """Shift making -||x - y|| + s positive semidefinite on a ball of the given radius.

    ||z|| is c_d times the mean of |u . z| over unit directions u, and along
    one direction a shift of the radius suffices, so s = c_d * radius with
    c_d = sqrt(pi) Gamma((d + 1) / 2) / Gamma(d / 2).
    """

    log_ratio = math.lgamma((dim + 1) / 2.0) - math.lgamma(dim / 2.0)
    return radius * math.sqrt(math.pi) * math.exp(log_ratio)


def data_radius(X: np.ndarray) -> float:
    """Radius of the smallest ball centred at the data mean that contains the data."""

    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        return 0.0
    return float(np.linalg.norm(X - X.mean(axis=0), axis=1).max())


def resolve_shift(spec: KernelSpec, X: np.ndarray) -> KernelSpec:
    """Fix the negative-distance shift from training inputs when left unset."""

    if spec.family != "negative_distance" or spec.shift is not None:
        return spec
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return replace(spec, shift=shift_for_radius(data_radius(X), X.shape[1]))


def _as_inputs(X: np.ndarray) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or not np.all(np.isfinite(arr)):
        raise ValueError("kernel inputs must be a finite (n, d) array")
    return arr


def gram(spec: KernelSpec, X: np.ndarray, X2: np.ndarray | None = None) -> np.ndarray:
    A = _as_inputs(X)
    B = A if X2 is None else _as_inputs(X2)
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"input dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if spec.family == "exponential":
        return np.exp(-spec.alpha * cdist(A, B))
    if spec.family == "polynomial":
        return (1.0 + spec.alpha * (A @ B.T)) ** spec.degree
    if spec.shift is None:
        raise ValueError("negative-distance kernel needs a resolved shift; call resolve_shift first")
    return spec.shift - cdist(A, B)


def kernel_diagonal(spec: KernelSpec, X: np.ndarray) -> np.ndarray:
    A = _as_inputs(X)
    if spec.family == "exponential":
        return np.ones(A.shape[0])
    if spec.family == "polynomial":
        return (1.0 + spec.alpha * np.einsum("ij,ij->i", A, A)) ** spec.degree
    if spec.shift is None:
        raise ValueError("negative-distance kernel needs a resolved shift; call resolve_shift first")
    return np.full(A.shape[0], spec.shift)
