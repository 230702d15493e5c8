"""Incomplete Cholesky feature maps with an optional unpenalized intercept."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
from scipy.linalg import solve_triangular

from kernels.functions import KernelSpec, _as_inputs, gram, kernel_diagonal, resolve_shift

LOGGER = logging.getLogger("kernels.features")

DEFAULT_ICD_TOL = 1e-3
PIVOT_FLOOR = 1e-12
NEGATIVE_RESIDUAL_TOL = 1e-8


class KernelError(ArithmeticError):
    """The effective kernel matrix is not positive semidefinite."""


@dataclass(frozen=True, eq=False)
class FeatureMap:
    spec: KernelSpec
    pivots: np.ndarray
    pivot_inputs: np.ndarray
    factor: np.ndarray
    intercept: bool = True
    tol: float = DEFAULT_ICD_TOL

    @property
    def rank(self) -> int:
        return int(self.pivots.size)

    @property
    def dim(self) -> int:
        return self.rank + int(self.intercept)

    @property
    def penalty_mask(self) -> np.ndarray:
        """True for coordinates under the ridge penalty; the intercept is never penalized."""

        return np.concatenate([np.ones(self.rank, dtype=bool), np.zeros(int(self.intercept), dtype=bool)])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kernel": self.spec.to_dict(),
            "pivots": self.pivots.tolist(),
            "pivot_inputs": self.pivot_inputs.tolist(),
            "factor": self.factor.tolist(),
            "intercept": self.intercept,
            "tol": self.tol,
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "FeatureMap":
        pivot_inputs = np.asarray(payload["pivot_inputs"], dtype=float)
        rank = len(payload["pivots"])
        return cls(
            spec=KernelSpec.from_dict(payload["kernel"]),
            pivots=np.asarray(payload["pivots"], dtype=int),
            pivot_inputs=pivot_inputs.reshape(rank, -1) if rank else pivot_inputs.reshape(0, 0),
            factor=np.asarray(payload["factor"], dtype=float).reshape(rank, rank),
            intercept=bool(payload.get("intercept", True)),
            tol=float(payload.get("tol", DEFAULT_ICD_TOL)),
        )


def incomplete_cholesky(
    spec: KernelSpec,
    X: np.ndarray,
    tol: float = DEFAULT_ICD_TOL,
    max_rank: int | None = None,
    intercept: bool = True,
) -> FeatureMap:
    """Greedy pivoted Cholesky until the residual trace drops below tol * tr(K)."""

    if not 0.0 < tol < 1.0:
        raise ValueError("incomplete Cholesky tolerance must lie in (0, 1)")
    X = _as_inputs(X)
    spec = resolve_shift(spec, X)
    n = X.shape[0]
    limit = n if max_rank is None else min(int(max_rank), n)

    diag = kernel_diagonal(spec, X)
    if np.any(diag < -NEGATIVE_RESIDUAL_TOL):
        raise KernelError(f"kernel diagonal has negative entries (min {diag.min():.3e})")
    residual = np.maximum(diag, 0.0)
    trace = float(residual.sum())

    G = np.zeros((n, limit))
    pivots: list[int] = []
    while len(pivots) < limit and trace > 0:
        if residual.sum() <= tol * trace:
            break
        j = int(np.argmax(residual))
        if residual[j] <= PIVOT_FLOOR:
            break
        i = len(pivots)
        column = gram(spec, X, X[j : j + 1])[:, 0]
        G[:, i] = (column - G[:, :i] @ G[j, :i]) / np.sqrt(residual[j])
        residual = residual - G[:, i] ** 2
        residual[j] = 0.0
        if residual.min() < -NEGATIVE_RESIDUAL_TOL * max(1.0, float(diag.max())):
            raise KernelError(
                f"negative residual diagonal {residual.min():.3e} after pivot {j}; "
                f"kernel '{spec.family}' is not positive semidefinite on these inputs"
            )
        residual = np.maximum(residual, 0.0)
        pivots.append(j)

    rank = len(pivots)
    idx = np.asarray(pivots, dtype=int)
    LOGGER.info("Incomplete Cholesky kept %d of %d points (residual trace %.3e of %.3e)", rank, n, residual.sum(), trace)
    return FeatureMap(
        spec=spec,
        pivots=idx,
        pivot_inputs=X[idx].copy(),
        factor=G[idx, :rank].copy(),
        intercept=intercept,
        tol=tol,
    )


def embed(feature_map: FeatureMap, X: np.ndarray) -> np.ndarray:
    """Features L^{-1} k(x, x_I) per row, plus a trailing constant column when intercept is set."""

    X = _as_inputs(X)
    n = X.shape[0]
    if feature_map.rank:
        K = gram(feature_map.spec, X, feature_map.pivot_inputs)
        phi = solve_triangular(feature_map.factor, K.T, lower=True).T
    else:
        phi = np.zeros((n, 0))
    if feature_map.intercept:
        phi = np.hstack([phi, np.ones((n, 1))])
    return phi
