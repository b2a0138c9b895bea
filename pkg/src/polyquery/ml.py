"""Clustering and classification over relations.

Estimators consume numeric columns of a Relation as a dense float matrix
and return relations (source rows plus prediction columns), so results
flow straight back into the relational pipeline. A registry maps algorithm
names to estimator factories taking positional string parameters; the
parameter orders are KMeans(k, max_iter, tol, seed) and
LogisticRegression(lr, epochs, seed).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MLError
from .model import Column, ColumnType, Relation, Row, Schema

_NUMERIC = (ColumnType.INT64, ColumnType.FLOAT64)


@dataclass
class FeatureMatrix:
    values: np.ndarray  # n x d float64
    source_rows: list[Row]
    source_schema: Schema

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def d(self) -> int:
        return int(self.values.shape[1])


def relation_to_matrix(
    r: Relation,
    feature_cols: list[str],
    label_col: str | None = None,
) -> tuple[FeatureMatrix, np.ndarray | None]:
    """Extract numeric features (and an optional 0/1 label vector)."""
    if not feature_cols:
        raise MLError("at least one feature column is required")
    rows = r.all_rows()
    if not rows:
        raise MLError("cannot build features from an empty relation")
    names = r.schema.names()
    types = r.schema.types()
    feat_idx = []
    for name in feature_cols:
        if name not in names:
            raise MLError(f"unknown feature column {name!r}")
        i = names.index(name)
        if types[i] not in _NUMERIC:
            raise MLError(f"feature column {name!r} must be numeric, got {types[i].value}")
        feat_idx.append(i)
    label_idx = None
    if label_col is not None:
        if label_col not in names:
            raise MLError(f"unknown label column {label_col!r}")
        label_idx = names.index(label_col)
        if types[label_idx] not in (ColumnType.BOOL, ColumnType.INT64):
            raise MLError(f"label column {label_col!r} must be Bool or Int64 0/1")

    matrix = np.empty((len(rows), len(feat_idx)), dtype=np.float64)
    labels = np.empty(len(rows), dtype=np.float64) if label_idx is not None else None
    for row_no, row in enumerate(rows):
        for j, i in enumerate(feat_idx):
            v = row[i]
            if v is None:
                raise MLError(f"row {row_no} has NULL in feature column {feature_cols[j]!r}")
            matrix[row_no, j] = float(v)
        if label_idx is not None:
            v = row[label_idx]
            if v is None:
                raise MLError(f"row {row_no} has NULL in label column {label_col!r}")
            value = float(bool(v)) if isinstance(v, bool) else float(v)
            if value not in (0.0, 1.0):
                raise MLError(f"row {row_no}: label must be 0 or 1, got {v!r}")
            labels[row_no] = value
    fm = FeatureMatrix(values=matrix, source_rows=rows, source_schema=r.schema)
    return fm, labels


# k-means

@dataclass
class KMeansModel:
    k: int
    centroids: np.ndarray  # k x d
    inertia: float
    iterations_run: int
    inertia_history: list[float] = field(default_factory=list)


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = points[first]
    closest = np.sum((points - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        total = float(closest.sum())
        if total <= 0.0:
            choice = int(rng.integers(n))
        else:
            choice = int(rng.choice(n, p=closest / total))
        centroids[i] = points[choice]
        dist = np.sum((points - centroids[i]) ** 2, axis=1)
        closest = np.minimum(closest, dist)
    return centroids


def kmeans_train(
    m: FeatureMatrix,
    k: int,
    max_iter: int = 100,
    tol: float = 1e-4,
    seed: int = 0,
) -> KMeansModel:
    """Lloyd's algorithm with k-means++ seeding; deterministic per seed.

    Stops when the largest centroid movement drops to tol, or after
    max_iter sweeps. Empty clusters re-seed to the point currently farthest
    from its assigned centroid. iterations_run counts sweeps that moved a
    centroid by more than tol.
    """
    points = m.values
    n = points.shape[0]
    if k < 1:
        raise MLError("k must be >= 1")
    if k > n:
        raise MLError(f"k={k} exceeds the number of points ({n})")
    if max_iter < 1:
        raise MLError("max_iter must be >= 1")
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(points, k, rng)

    history: list[float] = []
    moves = 0
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        dists = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        labels = np.argmin(dists, axis=1)
        history.append(float(dists[np.arange(n), labels].sum()))

        new_centroids = centroids.copy()
        point_dist = dists[np.arange(n), labels]
        for j in range(k):
            members = labels == j
            if members.any():
                new_centroids[j] = points[members].mean(axis=0)
            else:
                farthest = int(np.argmax(point_dist))
                new_centroids[j] = points[farthest]
                point_dist = point_dist.copy()
                point_dist[farthest] = -1.0
        shift = float(np.sqrt(np.sum((new_centroids - centroids) ** 2, axis=1)).max())
        centroids = new_centroids
        if shift <= tol:
            break
        moves += 1

    dists = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
    labels = np.argmin(dists, axis=1)
    inertia = float(dists[np.arange(n), labels].sum())
    if not np.isfinite(centroids).all():
        raise MLError("k-means produced non-finite centroids")
    return KMeansModel(
        k=k,
        centroids=centroids,
        inertia=inertia,
        iterations_run=moves,
        inertia_history=history,
    )


CLUSTER_COLUMN = "cluster"


def kmeans_predict(model: KMeansModel, m: FeatureMatrix) -> Relation:
    """Source rows plus an Int64 `cluster` column (ties to the lowest index)."""
    if m.d != model.centroids.shape[1]:
        raise MLError(
            f"feature dimension {m.d} does not match model dimension {model.centroids.shape[1]}"
        )
    if CLUSTER_COLUMN in m.source_schema.names():
        raise MLError(f"input already has a column named {CLUSTER_COLUMN!r}")
    dists = np.sum((m.values[:, None, :] - model.centroids[None, :, :]) ** 2, axis=2)
    labels = np.argmin(dists, axis=1)
    schema = Schema(m.source_schema.columns + (Column(CLUSTER_COLUMN, ColumnType.INT64),))
    rows = [row + (int(label),) for row, label in zip(m.source_rows, labels)]
    return Relation.from_rows(schema, rows)


# logistic regression

@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    training_loss: float
    loss_history: list[float] = field(default_factory=list)


LOGIT_CLAMP = 30.0


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -LOGIT_CLAMP, LOGIT_CLAMP)))


def logreg_loss_grad(
    weights: np.ndarray,
    bias: float,
    m: FeatureMatrix,
    labels: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy and its gradient (weights then bias)."""
    if labels.shape[0] != m.n:
        raise MLError("label count does not match row count")
    z = m.values @ weights + bias
    p = _sigmoid(z)
    eps = np.finfo(np.float64).tiny
    loss = float(-np.mean(labels * np.log(p + eps) + (1.0 - labels) * np.log(1.0 - p + eps)))
    residual = p - labels
    grad_w = m.values.T @ residual / m.n
    grad_b = float(residual.mean())
    return loss, np.append(grad_w, grad_b)


def logreg_train(
    m: FeatureMatrix,
    labels: np.ndarray,
    lr: float = 0.1,
    epochs: int = 200,
    seed: int = 0,
) -> LogRegModel:
    """Full-batch gradient descent from zero initialization.

    Deterministic: the seed parameter exists for interface uniformity but
    zero-init full-batch descent never consumes randomness.
    """
    if lr <= 0:
        raise MLError("learning rate must be positive")
    if epochs < 0:
        raise MLError("epochs must be >= 0")
    weights = np.zeros(m.d, dtype=np.float64)
    bias = 0.0
    history: list[float] = []
    loss, grad = logreg_loss_grad(weights, bias, m, labels)
    for _ in range(epochs):
        history.append(loss)
        with np.errstate(over="ignore", invalid="ignore"):
            weights = weights - lr * grad[:-1]
            bias = float(bias - lr * grad[-1])
            finite = bool(np.isfinite(weights).all() and np.isfinite(bias))
            loss, grad = (float("nan"), grad) if not finite else logreg_loss_grad(weights, bias, m, labels)
        if not np.isfinite(loss):
            raise MLError("training diverged (non-finite loss or weights); lower the learning rate")
    history.append(loss)
    return LogRegModel(weights=weights, bias=bias, training_loss=loss, loss_history=history)


PROBABILITY_COLUMN = "probability"
LABEL_COLUMN = "label"


def logreg_predict(model: LogRegModel, m: FeatureMatrix) -> Relation:
    """Source rows plus Float64 `probability` and Int64 `label` (p >= 0.5)."""
    if m.d != model.weights.shape[0]:
        raise MLError(
            f"feature dimension {m.d} does not match model dimension {model.weights.shape[0]}"
        )
    for name in (PROBABILITY_COLUMN, LABEL_COLUMN):
        if name in m.source_schema.names():
            raise MLError(f"input already has a column named {name!r}")
    p = _sigmoid(m.values @ model.weights + model.bias)
    schema = Schema(
        m.source_schema.columns
        + (
            Column(PROBABILITY_COLUMN, ColumnType.FLOAT64),
            Column(LABEL_COLUMN, ColumnType.INT64),
        )
    )
    rows = [
        row + (float(prob), int(prob >= 0.5))
        for row, prob in zip(m.source_rows, p)
    ]
    return Relation.from_rows(schema, rows)


# Estimator registry: algorithm name -> estimator factory.

class Estimator:
    """Interface used by the pipeline orchestrator."""

    def run(self, relation: Relation, feature_cols: list[str], label_col: str | None):
        raise NotImplementedError

    def summary(self) -> dict:
        raise NotImplementedError


class KMeansEstimator(Estimator):
    def __init__(self, k: int, max_iter: int = 100, tol: float = 1e-4, seed: int = 0):
        self.k = k
        self.max_iter = max_iter
        self.tol = tol
        self.seed = seed
        self.model: KMeansModel | None = None

    def run(self, relation: Relation, feature_cols: list[str], label_col: str | None) -> Relation:
        matrix, _ = relation_to_matrix(relation, feature_cols)
        self.model = kmeans_train(matrix, self.k, self.max_iter, self.tol, self.seed)
        return kmeans_predict(self.model, matrix)

    def summary(self) -> dict:
        if self.model is None:
            return {}
        return {
            "algorithm": "KMeans",
            "k": self.model.k,
            "centroids": [[float(x) for x in row] for row in self.model.centroids],
            "inertia": self.model.inertia,
            "iterations_run": self.model.iterations_run,
            "hyperparameters": {
                "max_iter": self.max_iter,
                "tol": self.tol,
                "seed": self.seed,
            },
        }


class LogRegEstimator(Estimator):
    def __init__(self, lr: float = 0.1, epochs: int = 200, seed: int = 0):
        self.lr = lr
        self.epochs = epochs
        self.seed = seed
        self.model: LogRegModel | None = None

    def run(self, relation: Relation, feature_cols: list[str], label_col: str | None) -> Relation:
        if label_col is None:
            raise MLError("LogisticRegression requires a label column")
        matrix, labels = relation_to_matrix(relation, feature_cols, label_col)
        self.model = logreg_train(matrix, labels, self.lr, self.epochs, self.seed)
        return logreg_predict(self.model, matrix)

    def summary(self) -> dict:
        if self.model is None:
            return {}
        return {
            "algorithm": "LogisticRegression",
            "weights": [float(w) for w in self.model.weights],
            "bias": float(self.model.bias),
            "training_loss": self.model.training_loss,
            "hyperparameters": {
                "lr": self.lr,
                "epochs": self.epochs,
                "seed": self.seed,
            },
        }


def _parse_int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise MLError(f"{what} must be an integer, got {text!r}") from None


def _parse_float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise MLError(f"{what} must be a number, got {text!r}") from None


def _kmeans_factory(params: list[str]) -> KMeansEstimator:
    if not params:
        raise MLError("KMeans requires at least the k parameter")
    if len(params) > 4:
        raise MLError("KMeans takes at most 4 parameters: k, max_iter, tol, seed")
    k = _parse_int(params[0], "k")
    max_iter = _parse_int(params[1], "max_iter") if len(params) > 1 else 100
    tol = _parse_float(params[2], "tol") if len(params) > 2 else 1e-4
    seed = _parse_int(params[3], "seed") if len(params) > 3 else 0
    return KMeansEstimator(k, max_iter, tol, seed)


def _logreg_factory(params: list[str]) -> LogRegEstimator:
    if len(params) > 3:
        raise MLError("LogisticRegression takes at most 3 parameters: lr, epochs, seed")
    lr = _parse_float(params[0], "lr") if params else 0.1
    epochs = _parse_int(params[1], "epochs") if len(params) > 1 else 200
    seed = _parse_int(params[2], "seed") if len(params) > 2 else 0
    return LogRegEstimator(lr, epochs, seed)


ESTIMATOR_REGISTRY = {
    "KMeans": _kmeans_factory,
    "LogisticRegression": _logreg_factory,
}


def make_estimator(name: str, params: list[str]) -> Estimator:
    factory = ESTIMATOR_REGISTRY.get(name)
    if factory is None:
        known = ", ".join(sorted(ESTIMATOR_REGISTRY))
        raise MLError(f"unknown algorithm {name!r}; available: {known}")
    return factory(params)
