"""Iteratively reweighted least squares for sums of "r largest" and max terms.

Every shipped size function has a Lovász extension of the form

    v(g) = linear . g + sum_tau c_tau * S_{r_tau}(g[N_tau])

where S_r is the sum of the r largest entries. Each S_r is written as
min_t r t + sum (g_j - t)_+, the absolute values inside are smoothed with an
eta >= eps floor, and the resulting quadratic in (g, t) is minimized jointly,
with t eliminated per observation and term. Alternating this with the closed
form updates of (t, eta) never increases the smoothed objective.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from kernels.features import FeatureMap, embed
from solvers.linalg import NumericalError, block_preconditioner, conjugate_gradient, solve_label_systems, solve_spd
from solvers.modular import check_training_data, label_curvature
from solvers.predictor import LinearPredictor
from submodular.size_functions import ConcaveCardinality, Modular, SetCover, SizeFunction, decreasing_order

LOGGER = logging.getLogger("solvers.irls")

DEFAULT_ETA_FLOOR = 1e-6
DEFAULT_MAX_ITER = 500
DEFAULT_TOL = 1e-10
MONOTONE_TOL = 1e-6
BISECTION_STEPS = 100
BISECTION_TOL = 1e-12
DENSE_SYSTEM_LIMIT = 2500
WARM_START_SMOOTHING = 1e-2


@dataclass(frozen=True, eq=False)
class MaxTermDecomposition:
    """v(g) = linear . g + sum_tau weights[tau] * (sum of the ranks[tau] largest g over members[tau])."""

    k: int
    linear: np.ndarray
    weights: np.ndarray
    ranks: np.ndarray
    members: np.ndarray
    valid: np.ndarray

    @property
    def n_terms(self) -> int:
        return int(self.weights.size)

    @property
    def sizes(self) -> np.ndarray:
        return self.valid.sum(axis=1)

    @property
    def total(self) -> float:
        return float(self.linear.sum() + self.weights @ self.ranks)

    def scatter(self) -> np.ndarray:
        """One-hot (T, L, k) map from padded member slots to ground-set elements."""

        onehot = self.members[:, :, None] == np.arange(self.k)[None, None, :]
        return onehot & self.valid[:, :, None]

    def gather(self, G: np.ndarray) -> np.ndarray:
        return G[:, self.members]

    def value(self, G: np.ndarray) -> np.ndarray:
        """Exact (unsmoothed) extension value of each score row."""

        G = np.atleast_2d(G)
        out = G @ self.linear
        if self.n_terms == 0:
            return out
        gathered = np.where(self.valid[None], self.gather(G), -np.inf)
        ordered = -np.sort(-gathered, axis=-1)
        ordered = np.where(np.isfinite(ordered), ordered, 0.0)
        top = np.take_along_axis(np.cumsum(ordered, axis=-1), (self.ranks - 1)[None, :, None], axis=-1)[..., 0]
        return out + top @ self.weights

    def top_members(self, g: np.ndarray, tau: int) -> np.ndarray:
        """Elements achieving the r largest scores of term tau (ties by ascending index)."""

        hood = self.members[tau, self.valid[tau]]
        return hood[decreasing_order(g[hood])[: int(self.ranks[tau])]]

    @classmethod
    def from_size_function(cls, V: SizeFunction) -> "MaxTermDecomposition":
        k = V.k
        if isinstance(V, Modular):
            return cls._build(k, V.weights.copy(), [], [], [])
        if isinstance(V, ConcaveCardinality):
            if not V.is_concave:
                raise ValueError("concave cardinality decomposition needs a concave phi")
            delta = V.increments
            coeffs = delta[:-1] - delta[1:]
            ranks = [r for r in range(1, k) if coeffs[r - 1] > 0]
            return cls._build(
                k,
                np.full(k, delta[-1]),
                [float(coeffs[r - 1]) for r in ranks],
                ranks,
                [tuple(range(k))] * len(ranks),
            )
        if isinstance(V, SetCover):
            linear = np.zeros(k)
            weights: List[float] = []
            hoods: List[tuple] = []
            for hood, w in zip(V.neighborhoods, V.weights):
                if w <= 0:
                    continue
                if len(hood) == 1:
                    linear[hood[0]] += w
                else:
                    weights.append(float(w))
                    hoods.append(hood)
            return cls._build(k, linear, weights, [1] * len(hoods), hoods)
        raise ValueError(f"Unsupported size function variant '{type(V).__name__}'")

    @classmethod
    def _build(cls, k: int, linear: np.ndarray, weights: list, ranks: list, hoods: list) -> "MaxTermDecomposition":
        width = max([len(h) for h in hoods], default=1)
        members = np.zeros((len(hoods), width), dtype=int)
        valid = np.zeros((len(hoods), width), dtype=bool)
        for tau, hood in enumerate(hoods):
            members[tau, : len(hood)] = hood
            valid[tau, : len(hood)] = True
        return cls(
            k=k,
            linear=np.asarray(linear, dtype=float),
            weights=np.asarray(weights, dtype=float),
            ranks=np.asarray(ranks, dtype=int),
            members=members,
            valid=valid,
        )


@dataclass(frozen=True, eq=False)
class LaplacianPenalty:
    """strength * sum_{i<j} w_ij (g_i - g_j)^2 over the outputs of one observation."""

    weights: np.ndarray
    strength: float = 1.0

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("Laplacian weights must be a square matrix")
        if not np.allclose(w, w.T) or np.any(w < 0):
            raise ValueError("Laplacian weights must be symmetric and non-negative")
        if self.strength < 0:
            raise ValueError("Laplacian strength must be >= 0")
        object.__setattr__(self, "weights", w)

    @classmethod
    def chain(cls, k: int, width: float = 1.0, strength: float = 1.0) -> "LaplacianPenalty":
        """Neighbouring ordered cells coupled with weight 1/width."""

        w = np.zeros((k, k))
        idx = np.arange(k - 1)
        w[idx, idx + 1] = w[idx + 1, idx] = 1.0 / width
        return cls(w, strength)

    @property
    def laplacian(self) -> np.ndarray:
        return np.diag(self.weights.sum(axis=1)) - self.weights

    def value(self, G: np.ndarray) -> np.ndarray:
        return self.strength * np.einsum("nj,jl,nl->n", G, self.laplacian, G)


@dataclass
class IRLSState:
    thresholds: np.ndarray
    eta: np.ndarray
    objective_trace: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    def summary(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "objective_trace": [float(v) for v in self.objective_trace],
        }


def _psi(u: np.ndarray, eps: float) -> np.ndarray:
    a = np.abs(u)
    return np.where(a >= eps, 0.5 * a, u * u / (4.0 * eps) + eps / 4.0)


def _psi_prime(u: np.ndarray, eps: float) -> np.ndarray:
    return np.clip(u / (2.0 * eps), -0.5, 0.5)


def optimal_thresholds(gathered: np.ndarray, ranks: np.ndarray, valid: np.ndarray, eps: float) -> np.ndarray:
    """Bisection for t minimizing (r - |N|/2) t + sum psi(g - t); the derivative is non-decreasing in t."""

    slope = ranks - 0.5 * valid.sum(axis=1)
    lo = np.where(valid[None], gathered, np.inf).min(axis=-1) - eps
    hi = np.where(valid[None], gathered, -np.inf).max(axis=-1) + eps
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        deriv = slope[None, :] - np.where(valid[None], _psi_prime(gathered - mid[..., None], eps), 0.0).sum(axis=-1)
        right = deriv > 0
        hi = np.where(right, mid, hi)
        lo = np.where(right, lo, mid)
        if np.all(hi - lo <= BISECTION_TOL * (1.0 + np.abs(lo) + np.abs(hi))):
            break
    return 0.5 * (lo + hi)


def _term_values(gathered: np.ndarray, t: np.ndarray, ranks: np.ndarray, valid: np.ndarray, eps: float) -> np.ndarray:
    slope = ranks - 0.5 * valid.sum(axis=1)
    inner = np.where(valid[None], 0.5 * gathered + _psi(gathered - t[..., None], eps), 0.0).sum(axis=-1)
    return inner + slope[None, :] * t


def smoothed_sum_largest(g: np.ndarray, r: int, eps: float = DEFAULT_ETA_FLOOR) -> float:
    """Smoothed sum of the r largest entries; exceeds the exact sum by at most len(g) * eps / 4."""

    values = np.asarray(g, dtype=float).ravel()
    if not 1 <= r <= values.size:
        raise ValueError(f"r must lie in 1..{values.size}")
    gathered = values[None, None, :]
    ranks = np.array([r])
    valid = np.ones((1, values.size), dtype=bool)
    t = optimal_thresholds(gathered, ranks, valid, eps)
    return float(_term_values(gathered, t, ranks, valid, eps)[0, 0])


def _quadratic_model(
    decomp: MaxTermDecomposition,
    gathered: np.ndarray,
    t: np.ndarray,
    eps: float,
    scatter: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hessian (n, k, k) and linear part (n, k) of the term majorizer with t eliminated."""

    n = gathered.shape[0]
    k = decomp.k
    eta = np.maximum(np.abs(gathered - t[..., None]), eps)
    rho = np.where(decomp.valid[None], 1.0 / eta, 0.0)
    total = rho.sum(axis=-1)
    c = decomp.weights[None, :]
    b = (2 * decomp.ranks - decomp.sizes)[None, :]

    H = np.zeros((n, k, k))
    diag = np.einsum("ntl,tlk->nk", c[..., None] * rho, scatter, optimize=True) / 2.0
    U = np.einsum("ntl,tlk->ntk", rho, scatter, optimize=True)
    H -= np.einsum("nt,ntj,ntl->njl", c / (2.0 * total), U, U, optimize=True)
    H[:, np.arange(k), np.arange(k)] += diag

    slot = np.where(decomp.valid[None], 0.5 + rho * (b / (2.0 * total))[..., None], 0.0)
    linear = np.einsum("ntl,tlk->nk", c[..., None] * slot, scatter, optimize=True)
    return H, linear, eta


@dataclass(frozen=True, eq=False)
class _Problem:
    """(1/n) sum_i [v_eps(g_i) + 1/2 g_i' D_i g_i + b_i . g_i + 1/2 g_i' C g_i] + reg/2 ||W_mask||^2 with g = Phi W."""

    features: np.ndarray
    curvature: np.ndarray
    offset: np.ndarray
    coupling: np.ndarray
    decomp: MaxTermDecomposition
    reg: float
    penalty_mask: np.ndarray
    eps: float

    def scores(self, W: np.ndarray) -> np.ndarray:
        return self.features @ W

    def thresholds(self, G: np.ndarray) -> np.ndarray:
        if self.decomp.n_terms == 0:
            return np.zeros((G.shape[0], 0))
        return optimal_thresholds(self.decomp.gather(G), self.decomp.ranks, self.decomp.valid, self.eps)

    def objective(self, W: np.ndarray, G: np.ndarray, t: np.ndarray) -> float:
        rows = G @ self.decomp.linear + 0.5 * np.sum(self.curvature * G**2, axis=1) + np.sum(self.offset * G, axis=1)
        rows += 0.5 * np.einsum("nj,jl,nl->n", G, self.coupling, G)
        if self.decomp.n_terms:
            terms = _term_values(self.decomp.gather(G), t, self.decomp.ranks, self.decomp.valid, self.eps)
            rows += terms @ self.decomp.weights
        penalty = 0.5 * self.reg * float(np.sum(W[self.penalty_mask] ** 2))
        return float(rows.mean()) + penalty


def _solve_coupled(problem: _Problem, H: np.ndarray, linear: np.ndarray, method: str, x0: np.ndarray) -> np.ndarray:
    Phi = problem.features
    n, D = Phi.shape
    k = H.shape[1]
    pen = problem.reg * problem.penalty_mask.astype(float)
    rhs = (-(Phi.T @ linear) / n).T.ravel()

    if method == "auto":
        method = "direct" if k * D <= DENSE_SYSTEM_LIMIT else "cg"
    if method == "direct":
        Z2 = (Phi[:, :, None] * Phi[:, None, :]).reshape(n, D * D)
        A = (Z2.T @ H.reshape(n, k * k) / n).reshape(D, D, k, k).transpose(2, 0, 3, 1).reshape(k * D, k * D)
        A[np.diag_indices_from(A)] += np.tile(pen, k)
        return solve_spd(A, rhs).reshape(k, D).T
    if method != "cg":
        raise ValueError(f"Unsupported linear solver '{method}'")

    def _matvec(v: np.ndarray) -> np.ndarray:
        Wv = v.reshape(k, D).T
        HG = np.einsum("njl,nl->nj", H, Phi @ Wv)
        return ((Phi.T @ HG) / n + pen[:, None] * Wv).T.ravel()

    blocks = [(Phi.T * H[:, j, j]) @ Phi / n + np.diag(pen) + 1e-12 * np.eye(D) for j in range(k)]
    solution = conjugate_gradient(_matvec, rhs, preconditioner=block_preconditioner(blocks), rtol=DEFAULT_TOL, x0=x0.T.ravel())
    return solution.reshape(k, D).T


def _warm_start(problem: _Problem, measure: np.ndarray) -> np.ndarray:
    floor = max(float(measure.mean()), 1e-12)
    curvature = problem.curvature + WARM_START_SMOOTHING * np.maximum(measure, floor)[None, :]
    linear = problem.offset + measure[None, :]
    return solve_label_systems(problem.features, curvature, linear, problem.reg, problem.penalty_mask)


def run_irls(
    problem: _Problem,
    measure: np.ndarray,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    method: str = "auto",
) -> tuple[np.ndarray, IRLSState]:
    """Alternate (t, eta) updates with the joint least-squares step until the objective stalls."""

    if problem.eps <= 0:
        raise ValueError("eta floor eps must be > 0")
    n = problem.features.shape[0]
    k = problem.decomp.k
    scatter = problem.decomp.scatter()
    W = _warm_start(problem, measure)
    G = problem.scores(W)
    t = problem.thresholds(G)
    J = problem.objective(W, G, t)
    state = IRLSState(thresholds=t, eta=np.zeros((n, 0, 0)), objective_trace=[J])

    for it in range(1, max_iter + 1):
        if problem.decomp.n_terms:
            H, lin, eta = _quadratic_model(problem.decomp, problem.decomp.gather(G), t, problem.eps, scatter)
        else:
            H, lin, eta = np.zeros((n, k, k)), np.zeros((n, k)), np.zeros((n, 0, 0))
        H[:, np.arange(k), np.arange(k)] += problem.curvature
        H += problem.coupling[None]
        lin += problem.decomp.linear[None, :] + problem.offset

        W_new = _solve_coupled(problem, H, lin, method, W)
        if not np.all(np.isfinite(W_new)):
            raise NumericalError(f"IRLS produced non-finite weights at iteration {it}")
        G_new = problem.scores(W_new)
        t_new = problem.thresholds(G_new)
        J_new = problem.objective(W_new, G_new, t_new)

        increase = J_new - J
        if increase > MONOTONE_TOL * (1.0 + abs(J)):
            raise NumericalError(f"IRLS objective increased from {J:.12e} to {J_new:.12e} at iteration {it}")
        if increase > tol * (1.0 + abs(J)):
            LOGGER.warning("IRLS objective rose by %.3e at iteration %d (within tolerance)", increase, it)

        W, G, t = W_new, G_new, t_new
        state.objective_trace.append(J_new)
        state.iterations = it
        state.eta = eta
        LOGGER.debug("IRLS iteration %d objective %.12e", it, J_new)
        if J - J_new < tol * (1.0 + abs(J)):
            state.converged = True
            J = J_new
            break
        J = J_new

    state.thresholds = t
    LOGGER.info(
        "IRLS %s after %d iterations, objective %.10e",
        "converged" if state.converged else "stopped",
        state.iterations,
        J,
    )
    return W, state


def _fit(
    X: np.ndarray,
    y: np.ndarray,
    V: SizeFunction,
    feature_map: FeatureMap,
    reg: float,
    smoothing: float,
    eps: float,
    laplacian: LaplacianPenalty | None,
    max_iter: int,
    tol: float,
    method: str,
) -> LinearPredictor:
    if reg < 0 or smoothing < 0:
        raise ValueError("reg and smoothing must be >= 0")
    inputs, labels = check_training_data(X, y, V.k)
    measure = V.dominated_measure().weights
    coupling = np.zeros((V.k, V.k))
    if laplacian is not None:
        if laplacian.weights.shape != (V.k, V.k):
            raise ValueError(f"Laplacian weights must be ({V.k}, {V.k})")
        coupling = 2.0 * laplacian.strength * laplacian.laplacian
    features = embed(feature_map, inputs)
    problem = _Problem(
        features=features,
        curvature=label_curvature(labels, V.k, smoothing, measure),
        offset=np.zeros((labels.size, V.k)),
        coupling=coupling,
        decomp=MaxTermDecomposition.from_size_function(V),
        reg=reg,
        penalty_mask=feature_map.penalty_mask,
        eps=eps,
    )
    W, state = run_irls(problem, measure, max_iter=max_iter, tol=tol, method=method)
    metadata = {"irls": state.summary(), "eta_floor": eps}
    if laplacian is not None:
        metadata["laplacian_strength"] = laplacian.strength
    return LinearPredictor.from_weights(
        W,
        feature_map,
        regularization=reg,
        loss="choquet",
        size_function=V,
        smoothing=smoothing,
        metadata=metadata,
    )


def train_concave_irls(
    X: np.ndarray,
    y: np.ndarray,
    V: ConcaveCardinality,
    feature_map: FeatureMap,
    reg: float,
    smoothing: float = 0.0,
    eps: float = DEFAULT_ETA_FLOOR,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    method: str = "auto",
) -> LinearPredictor:
    if not isinstance(V, ConcaveCardinality):
        raise ValueError("train_concave_irls needs a concave cardinality size function")
    if not V.is_concave:
        raise ValueError("phi must be concave")
    return _fit(X, y, V, feature_map, reg, smoothing, eps, None, max_iter, tol, method)


def train_cover_irls(
    X: np.ndarray,
    y: np.ndarray,
    V: SetCover,
    feature_map: FeatureMap,
    reg: float,
    smoothing: float = 0.0,
    laplacian: LaplacianPenalty | None = None,
    eps: float = DEFAULT_ETA_FLOOR,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    method: str = "auto",
) -> LinearPredictor:
    if not isinstance(V, SetCover):
        raise ValueError("train_cover_irls needs a set-cover size function")
    return _fit(X, y, V, feature_map, reg, smoothing, eps, laplacian, max_iter, tol, method)


def irls_separable_min(
    V: SizeFunction,
    q: np.ndarray,
    a: np.ndarray,
    eps: float = 1e-8,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Smoothed minimizer of v(f) + 1/2 sum q_i (f_i - a_i)^2 on a single score vector."""

    q = np.asarray(q, dtype=float)
    a = np.asarray(a, dtype=float)
    problem = _Problem(
        features=np.ones((1, 1)),
        curvature=q[None, :],
        offset=(-q * a)[None, :],
        coupling=np.zeros((V.k, V.k)),
        decomp=MaxTermDecomposition.from_size_function(V),
        reg=0.0,
        penalty_mask=np.zeros(1, dtype=bool),
        eps=eps,
    )
    W, _ = run_irls(problem, V.dominated_measure().weights, max_iter=max_iter, tol=tol, method="direct")
    return W[0]
