"""Linear-in-features score predictors and their versioned JSON model files."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict

import numpy as np

from kernels.features import FeatureMap, embed
from submodular.size_functions import GroundSet, SizeFunction, size_function_from_dict

MODEL_FORMAT_VERSION = 1
PREDICTOR_KINDS = ("scores", "interval")


@dataclass(frozen=True, eq=False)
class LinearPredictor:
    """g(x, j) = theta_j . phi(x) + beta_j, one output per ground-set element.

    Interval predictors carry two outputs (lower and upper quantile) that are
    turned into cell scores by ``predictor_scores``.
    """

    theta: np.ndarray
    beta: np.ndarray
    feature_map: FeatureMap
    regularization: float
    loss: str = "choquet"
    kind: str = "scores"
    ground_set: GroundSet | None = None
    size_function: SizeFunction | None = None
    training_size_function: SizeFunction | None = None
    smoothing: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in PREDICTOR_KINDS:
            raise ValueError(f"Unsupported predictor kind '{self.kind}'")
        beta = np.asarray(self.beta, dtype=float).ravel()
        theta = np.asarray(self.theta, dtype=float)
        if theta.size != self.feature_map.rank * beta.size:
            raise ValueError(f"theta has {theta.size} entries; expected rank {self.feature_map.rank} x {beta.size} outputs")
        theta = theta.reshape(self.feature_map.rank, beta.size)
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(beta))):
            raise ValueError("predictor parameters must be finite")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "beta", beta)

    @property
    def n_outputs(self) -> int:
        return int(self.beta.size)

    @classmethod
    def from_weights(cls, weights: np.ndarray, feature_map: FeatureMap, **kwargs: Any) -> "LinearPredictor":
        """Split a (dim, outputs) solver matrix into theta and the intercept row."""

        W = np.asarray(weights, dtype=float)
        theta = W[: feature_map.rank]
        beta = W[feature_map.rank] if feature_map.intercept else np.zeros(W.shape[1])
        return cls(theta=theta, beta=beta, feature_map=feature_map, **kwargs)

    @property
    def weights(self) -> np.ndarray:
        if self.feature_map.intercept:
            return np.vstack([self.theta, self.beta[None, :]])
        return self.theta

    def decision(self, X: np.ndarray) -> np.ndarray:
        return embed(self.feature_map, X) @ self.weights + (0.0 if self.feature_map.intercept else self.beta)


def zero_predictor(feature_map: FeatureMap, k: int, **kwargs: Any) -> LinearPredictor:
    return LinearPredictor(theta=np.zeros((feature_map.rank, k)), beta=np.zeros(k), feature_map=feature_map, regularization=0.0, **kwargs)


def interval_cell_scores(bounds: np.ndarray, ground_set: GroundSet) -> np.ndarray:
    """Minus the distance from each cell centre to the predicted interval (0 inside)."""

    if ground_set.cells is None:
        raise ValueError("interval predictors need a ground set with cell metadata")
    lo = np.minimum(bounds[:, 0], bounds[:, 1])[:, None]
    hi = np.maximum(bounds[:, 0], bounds[:, 1])[:, None]
    centers = ground_set.cells.centers[None, :]
    return -np.maximum(np.maximum(lo - centers, centers - hi), 0.0)


def predictor_scores(predictor: LinearPredictor, X: np.ndarray) -> np.ndarray:
    """Score matrix (n, k) whose row level sets are the predicted sets."""

    raw = predictor.decision(X)
    if predictor.kind == "interval":
        return interval_cell_scores(raw, predictor.ground_set)
    if predictor.training_size_function is not None and predictor.size_function is not None:
        from solvers.post_cluster import post_cluster_rows

        return post_cluster_rows(
            raw,
            predictor.size_function,
            predictor.training_size_function,
            smoothing=predictor.smoothing,
        )
    return raw


def predictor_to_dict(predictor: LinearPredictor) -> Dict[str, Any]:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": predictor.kind,
        "loss": predictor.loss,
        "regularization": predictor.regularization,
        "smoothing": predictor.smoothing,
        "feature_map": predictor.feature_map.to_dict(),
        "theta": predictor.theta.tolist(),
        "beta": predictor.beta.tolist(),
        "ground_set": None if predictor.ground_set is None else predictor.ground_set.to_dict(),
        "size_function": None if predictor.size_function is None else predictor.size_function.to_dict(),
        "training_size_function": (
            None if predictor.training_size_function is None else predictor.training_size_function.to_dict()
        ),
        "metadata": predictor.metadata,
    }


def predictor_from_dict(payload: Dict[str, Any]) -> LinearPredictor:
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"Unsupported model format_version {version!r}; expected {MODEL_FORMAT_VERSION}")
    feature_map = FeatureMap.from_dict(payload["feature_map"])
    size_fn = payload.get("size_function")
    training_fn = payload.get("training_size_function")
    ground = payload.get("ground_set")
    return LinearPredictor(
        theta=np.asarray(payload["theta"], dtype=float),
        beta=np.asarray(payload["beta"], dtype=float),
        feature_map=feature_map,
        regularization=float(payload["regularization"]),
        loss=str(payload.get("loss", "choquet")),
        kind=str(payload.get("kind", "scores")),
        ground_set=None if ground is None else GroundSet.from_dict(ground),
        size_function=None if size_fn is None else size_function_from_dict(size_fn),
        training_size_function=None if training_fn is None else size_function_from_dict(training_fn),
        smoothing=float(payload.get("smoothing", 0.0)),
        metadata=dict(payload.get("metadata", {})),
    )


def write_text_atomic(path: Path, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""

    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def save_model(path: str | Path, predictor: LinearPredictor) -> Path:
    target = Path(path)
    write_text_atomic(target, json.dumps(predictor_to_dict(predictor), indent=2, sort_keys=True))
    return target


def load_model(path: str | Path) -> LinearPredictor:
    source = Path(path)
    if not source.exists():
        raise FileNotFoundError(f"Model file not found: {source}")
    return predictor_from_dict(json.loads(source.read_text(encoding="utf-8")))


def with_metadata(predictor: LinearPredictor, **entries: Any) -> LinearPredictor:
    return replace(predictor, metadata={**predictor.metadata, **entries})
