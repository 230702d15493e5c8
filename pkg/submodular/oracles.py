"""Brute-force oracles over all 2^k subsets (k <= 12) and exact layer-cake integrals."""

from __future__ import annotations

import itertools
from typing import Tuple

import numpy as np

from submodular.size_functions import SizeFunction, lovasz

MAX_BRUTE_FORCE_SIZE = 12


def _check_size(k: int) -> None:
    if k > MAX_BRUTE_FORCE_SIZE:
        raise ValueError(f"brute-force oracle refuses k={k} > {MAX_BRUTE_FORCE_SIZE}")


def subset_masks(k: int) -> np.ndarray:
    """Boolean (2^k, k) matrix; row b is the subset encoded by bitmask b."""

    _check_size(k)
    codes = np.arange(1 << k)
    return ((codes[:, None] >> np.arange(k)[None, :]) & 1).astype(bool)


def subset_values(V: SizeFunction) -> np.ndarray:
    return V.evaluate_masks(subset_masks(V.k))


def check_submodular(V: SizeFunction, tol: float = 1e-12) -> bool:
    """True iff V(empty)=0, V is non-decreasing and V satisfies the submodular inequality."""

    return table_is_submodular(subset_values(V), V.k, monotone=True, tol=tol)


def table_is_submodular(values: np.ndarray, k: int, monotone: bool = True, tol: float = 1e-12) -> bool:
    """Same test on a table of 2^k values indexed by bitmask."""

    _check_size(k)
    values = np.asarray(values, dtype=float)
    if values.shape != (1 << k,):
        raise ValueError(f"value table must have 2^{k} entries")
    scale = tol * (1.0 + float(np.abs(values).max()))
    if abs(values[0]) > scale:
        return False

    codes = np.arange(1 << k)
    for i in range(k if monotone else 0):
        without_i = codes[(codes >> i) & 1 == 0]
        if np.any(values[without_i | (1 << i)] < values[without_i] - scale):
            return False

    # local form: V(A+i) + V(A+j) >= V(A+i+j) + V(A) for i != j outside A
    for i, j in itertools.combinations(range(k), 2):
        base = codes[((codes >> i) & 1 == 0) & ((codes >> j) & 1 == 0)]
        lhs = values[base | (1 << i)] + values[base | (1 << j)]
        rhs = values[base | (1 << i) | (1 << j)] + values[base]
        if np.any(lhs < rhs - scale):
            return False
    return True


def minimize_set_problem(V: SizeFunction, slopes: np.ndarray) -> Tuple[float, np.ndarray]:
    """Exhaustive min over B of V(B) + sum_{i in B} slopes_i; smallest minimizer wins ties."""

    masks = subset_masks(V.k)
    totals = V.evaluate_masks(masks) + masks.astype(float) @ np.asarray(slopes, dtype=float)
    best = int(np.argmin(totals))
    return float(totals[best]), masks[best]


def lovasz_quadrature(V: SizeFunction, f: np.ndarray, n_sub: int = 4) -> float:
    """Two-sided layer-cake integral of V({f >= t}), split at the breakpoints of f and 0."""

    f = np.asarray(f, dtype=float)
    total = V.total
    knots = np.unique(np.concatenate([f, [0.0]]))
    result = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        nodes = lo + (np.arange(n_sub) + 0.5) * (hi - lo) / n_sub
        masks = f[None, :] >= nodes[:, None]
        integrand = V.evaluate_masks(masks) - np.where(nodes < 0.0, total, 0.0)
        result += float(integrand.mean()) * (hi - lo)
    return result


def integrated_level_loss(V: SizeFunction, q: np.ndarray, h: np.ndarray, n_sub: int = 4) -> float:
    """Integral over lambda in [0, max|h|] of V({h >= -lam}) - V(Y) + lam * Q({h >= -lam}^c), h <= 0."""

    h = np.asarray(h, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(h > 0):
        raise ValueError("integrated_level_loss expects non-positive scores")
    total = V.total
    knots = np.unique(np.concatenate([[0.0], -h]))
    result = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        nodes = lo + (np.arange(n_sub) + 0.5) * (hi - lo) / n_sub
        masks = h[None, :] >= -nodes[:, None]
        integrand = V.evaluate_masks(masks) - total + nodes * ((~masks).astype(float) @ q)
        result += float(integrand.mean()) * (hi - lo)
    return result


def calibration_gap_integral(
    V: SizeFunction,
    q: np.ndarray,
    a: np.ndarray,
    f: np.ndarray,
    f_star: np.ndarray,
    n_sub: int = 8,
) -> float:
    """Integral over lambda of the set-problem gap of the level set {f >= lam}.

    The set problem at lam is min_B V(B) + sum_{i in B} q_i (lam - a_i), solved
    by enumeration. The integrand is piecewise linear between the values of f
    and f_star, so midpoint nodes between those breakpoints are exact.
    """

    f = np.asarray(f, dtype=float)
    q = np.asarray(q, dtype=float)
    a = np.asarray(a, dtype=float)
    masks = subset_masks(V.k)
    values = V.evaluate_masks(masks)
    weights = masks.astype(float)
    knots = np.unique(np.concatenate([f, np.asarray(f_star, dtype=float)]))
    result = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        nodes = lo + (np.arange(n_sub) + 0.5) * (hi - lo) / n_sub
        for lam in nodes:
            slopes = q * (lam - a)
            best = float(np.min(values + weights @ slopes))
            level = f >= lam
            current = float(V.evaluate_masks(level[None, :])[0] + slopes[level].sum())
            result += (current - best) * (hi - lo) / n_sub
    return result


def separable_objective(V: SizeFunction, q: np.ndarray, a: np.ndarray, f: np.ndarray) -> float:
    f = np.asarray(f, dtype=float)
    return float(lovasz(V, f)) + 0.5 * float(np.sum(np.asarray(q) * (f - np.asarray(a)) ** 2))


def separable_min_bruteforce(V: SizeFunction, q: np.ndarray, a: np.ndarray | None = None) -> np.ndarray:
    """Decomposition algorithm with exhaustive set minimization on restrictions and contractions."""

    k = V.k
    q = np.asarray(q, dtype=float)
    a = np.zeros(k) if a is None else np.asarray(a, dtype=float)
    table = subset_values(V)
    f = np.empty(k)

    def _solve(elements: np.ndarray, base: int) -> None:
        bits = (1 << elements).sum() if elements.size else 0
        gain = table[base | int(bits)] - table[base]
        qe, ae = q[elements], a[elements]
        level = (qe @ ae - gain) / qe.sum()
        slopes = qe * (level - ae)
        local = subset_masks(elements.size)
        codes = (local.astype(np.int64) * (1 << elements)[None, :]).sum(axis=1)
        totals = table[base | codes] - table[base] + local.astype(float) @ slopes
        best = int(np.argmin(totals))
        tol = 1e-12 * (1.0 + abs(gain) + float(np.abs(slopes).sum()))
        chosen = local[best]
        if totals[best] >= -tol or chosen.all() or not chosen.any():
            f[elements] = level
            return
        head, tail = elements[chosen], elements[~chosen]
        _solve(head, base)
        _solve(tail, base | int((1 << head).sum()))

    _solve(np.arange(k), 0)
    return f


def pava_bruteforce(targets: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Exhaustive search over contiguous block partitions with non-increasing block means."""

    y = np.asarray(targets, dtype=float)
    w = np.asarray(weights, dtype=float)
    k = y.size
    best_cost, best_fit = np.inf, y.copy()
    for cuts in itertools.product([False, True], repeat=max(k - 1, 0)):
        starts = [0] + [i + 1 for i, cut in enumerate(cuts) if cut]
        bounds = list(zip(starts, starts[1:] + [k]))
        means = [float(w[s:e] @ y[s:e] / w[s:e].sum()) for s, e in bounds]
        if any(m2 > m1 + 1e-15 for m1, m2 in zip(means, means[1:])):
            continue
        fit = np.concatenate([np.full(e - s, m) for (s, e), m in zip(bounds, means)])
        cost = float(w @ (fit - y) ** 2)
        if cost < best_cost:
            best_cost, best_fit = cost, fit
    return best_fit
