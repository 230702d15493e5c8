"""Dense and conjugate-gradient solvers for the ridge-type systems used in training."""

from __future__ import annotations

import logging
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve
from scipy.sparse.linalg import LinearOperator, aslinearoperator, cg

LOGGER = logging.getLogger("solvers.linalg")

CG_RTOL = 1e-12

Operator = np.ndarray | LinearOperator | Callable[[np.ndarray], np.ndarray]


class NumericalError(ArithmeticError):
    """Training hit a singular system, a non-finite iterate or a broken descent."""


def _as_operator(A: Operator, n: int) -> LinearOperator:
    if isinstance(A, LinearOperator):
        return A
    if isinstance(A, np.ndarray):
        return aslinearoperator(A)
    return LinearOperator((n, n), matvec=A, dtype=float)


def conjugate_gradient(
    A: Operator,
    b: np.ndarray,
    preconditioner: Operator | None = None,
    rtol: float = CG_RTOL,
    maxiter: int | None = None,
    x0: np.ndarray | None = None,
) -> np.ndarray:
    """Solve A x = b for symmetric positive definite A given as matrix or matvec."""

    b = np.asarray(b, dtype=float)
    n = b.size
    M = None if preconditioner is None else _as_operator(preconditioner, n)
    x, info = cg(_as_operator(A, n), b, x0=x0, rtol=rtol, atol=0.0, maxiter=maxiter or 10 * n, M=M)
    if info < 0:
        raise NumericalError(f"conjugate gradient breakdown (info={info})")
    if info > 0:
        LOGGER.warning("Conjugate gradient stopped after %d iterations above rtol=%.1e", info, rtol)
    if not np.all(np.isfinite(x)):
        raise NumericalError("conjugate gradient produced non-finite values")
    return x


def solve_spd(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        x = solve(A, b, assume_a="pos")
    except LinAlgError as exc:
        raise NumericalError(f"singular training system: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise NumericalError("training system produced non-finite values")
    return x


def solve_label_systems(
    features: np.ndarray,
    curvature: np.ndarray,
    linear: np.ndarray,
    reg: float,
    penalty_mask: np.ndarray,
    method: str = "direct",
) -> np.ndarray:
    """Minimize, per label j, (1/n) sum_i [1/2 c_ij g_ij^2 + l_ij g_ij] + reg/2 ||theta_j||^2.

    Returns the (D, k) weight matrix with g = features @ W.
    """

    n, D = features.shape
    k = curvature.shape[1]
    penalty = reg * penalty_mask.astype(float)
    W = np.zeros((D, k))
    for j in range(k):
        A = (features.T * curvature[:, j]) @ features / max(n, 1) + np.diag(penalty)
        b = -(features.T @ linear[:, j]) / max(n, 1)
        if method == "direct":
            W[:, j] = solve_spd(A, b)
        elif method == "cg":
            W[:, j] = conjugate_gradient(A, b)
        else:
            raise ValueError(f"Unsupported linear solver '{method}'")
    return W


def block_preconditioner(blocks: list[np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    """Inverse of a block-diagonal matrix, applied through per-block Cholesky factors."""

    factors = []
    for block in blocks:
        try:
            factors.append(cho_factor(block))
        except LinAlgError as exc:
            raise NumericalError(f"preconditioner block is not positive definite: {exc}") from exc
    sizes = [block.shape[0] for block in blocks]
    offsets = np.concatenate([[0], np.cumsum(sizes)])

    def _apply(r: np.ndarray) -> np.ndarray:
        out = np.empty_like(r)
        for factor, lo, hi in zip(factors, offsets[:-1], offsets[1:]):
            out[lo:hi] = cho_solve(factor, r[lo:hi])
        return out

    return _apply
