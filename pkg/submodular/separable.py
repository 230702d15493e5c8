"""Separable quadratic minimization of Lovász extensions, including PAVA."""

from __future__ import annotations

import logging
from typing import Tuple

import numpy as np
from scipy.optimize import linprog
from sklearn.isotonic import isotonic_regression

from submodular.size_functions import ConcaveCardinality, Modular, SetCover, SizeFunction

LOGGER = logging.getLogger("submodular.separable")


def pava(targets: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted least-squares projection of targets onto the non-increasing cone."""

    y = np.asarray(targets, dtype=float)
    w = np.asarray(weights, dtype=float)
    if y.shape != w.shape or y.ndim != 1:
        raise ValueError("targets and weights must be 1-D arrays of equal length")
    if np.any(w <= 0):
        raise ValueError("pava weights must be strictly positive")
    if y.size == 0:
        return y.copy()
    return np.asarray(isotonic_regression(y, sample_weight=w, increasing=False), dtype=float)


def _validated(q: np.ndarray, a: np.ndarray | None, k: int) -> Tuple[np.ndarray, np.ndarray]:
    q = np.asarray(q, dtype=float).ravel()
    if q.size != k:
        raise ValueError(f"q must have length k={k}")
    if not np.all(np.isfinite(q)) or np.any(q <= 0):
        raise ValueError("q must be strictly positive")
    a = np.zeros(k) if a is None else np.asarray(a, dtype=float).ravel()
    if a.size != k or not np.all(np.isfinite(a)):
        raise ValueError(f"a must be a finite vector of length k={k}")
    return q, a


def _concave_pava(phi: np.ndarray, q: np.ndarray) -> np.ndarray:
    order = np.argsort(-q, kind="stable")
    targets = -np.diff(phi) / q[order]
    f = np.empty_like(q)
    f[order] = pava(targets, q[order])
    return f


def _concave_decomposition(phi: np.ndarray, q: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Divide and conquer on the best constant; restriction and contraction stay cardinality-based."""

    k = q.size
    level = (q @ a - phi[k]) / q.sum()
    if k == 1:
        return np.array([level])
    slopes = q * (level - a)
    order = np.argsort(slopes, kind="stable")
    values = phi + np.concatenate([[0.0], np.cumsum(slopes[order])])
    j = int(np.argmin(values))
    tol = 1e-12 * (1.0 + abs(phi[k]) + float(np.abs(slopes).sum()))
    if values[j] >= -tol or j in (0, k):
        return np.full(k, level)
    head, tail = order[:j], order[j:]
    f = np.empty(k)
    f[head] = _concave_decomposition(phi[: j + 1], q[head], a[head])
    f[tail] = _concave_decomposition(phi[j:] - phi[j], q[tail], a[tail])
    return f


def _cover_set_oracle(incidence: np.ndarray, weights: np.ndarray, slopes: np.ndarray) -> np.ndarray:
    """Minimize the cover value plus slopes over subsets with an LP (totally unimodular)."""

    n_terms, n_elem = incidence.shape
    rows, cols = np.nonzero(incidence)
    A_ub = np.zeros((rows.size, n_elem + n_terms))
    A_ub[np.arange(rows.size), cols] = 1.0
    A_ub[np.arange(rows.size), n_elem + rows] = -1.0
    result = linprog(
        c=np.concatenate([slopes, weights]),
        A_ub=A_ub if rows.size else None,
        b_ub=np.zeros(rows.size) if rows.size else None,
        bounds=[(0.0, 1.0)] * (n_elem + n_terms),
        method="highs-ds",
    )
    if result.status != 0:
        raise ArithmeticError(f"set-cover LP oracle failed: {result.message}")
    return result.x[:n_elem] > 0.5


def _cover_decomposition(incidence: np.ndarray, weights: np.ndarray, q: np.ndarray, a: np.ndarray) -> np.ndarray:
    k = q.size
    live = incidence.any(axis=1)
    incidence, weights = incidence[live], weights[live]
    if incidence.shape[0] == 0:
        return a.copy()
    total = float(weights.sum())
    level = (q @ a - total) / q.sum()
    if k == 1:
        return np.array([level])
    slopes = q * (level - a)
    chosen = _cover_set_oracle(incidence, weights, slopes)
    touched = incidence[:, chosen].any(axis=1)
    value = float(weights[touched].sum() + slopes[chosen].sum())
    tol = 1e-10 * (1.0 + total + float(np.abs(slopes).sum()))
    if value >= -tol or chosen.all() or not chosen.any():
        return np.full(k, level)
    head, tail = np.flatnonzero(chosen), np.flatnonzero(~chosen)
    f = np.empty(k)
    f[head] = _cover_decomposition(incidence[:, head], weights, q[head], a[head])
    f[tail] = _cover_decomposition(incidence[~touched][:, tail], weights[~touched], q[tail], a[tail])
    return f


def separable_min(
    V: SizeFunction,
    q: np.ndarray,
    a: np.ndarray | None = None,
    method: str = "auto",
) -> np.ndarray:
    """Minimize v(f) + 1/2 sum_i q_i (f_i - a_i)^2 over f.

    Modular size functions have a closed form. Concave cardinality functions
    use PAVA on the q-sorted targets when a = 0 and the exact decomposition
    otherwise. Set covers default to the exact decomposition with an LP set
    oracle (``method="auto"`` or ``"exact"``); the smoothed IRLS solver is
    used only when ``method="irls"`` and is accurate to the smoothing level.
    """

    q, a = _validated(q, a, V.k)
    if isinstance(V, Modular):
        return a - V.weights / q
    if isinstance(V, ConcaveCardinality):
        if not V.is_concave:
            raise ValueError("separable_min requires a concave phi")
        if not np.any(a):
            return _concave_pava(V.phi, q)
        return _concave_decomposition(V.phi, q, a)
    if isinstance(V, SetCover):
        if method == "irls":
            from solvers.irls import irls_separable_min

            return irls_separable_min(V, q, a)
        if method not in ("auto", "exact"):
            raise ValueError(f"Unsupported separable_min method '{method}'")
        return _cover_decomposition(V.incidence.copy(), V.weights.copy(), q, a)
    raise ValueError(f"Unsupported size function variant '{type(V).__name__}'")
