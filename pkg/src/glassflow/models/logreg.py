"""Binary logistic regression trained by full-batch gradient descent.

Features are z-scored internally and the standardization statistics live in
the model, so prediction is self-contained. The positive class is the second
schema label; the loss is mean cross-entropy plus an L2 term on the weights
(bias unpenalized), so it is non-increasing per epoch at sane learning rates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyDatasetError, NotBinaryError, SchemaMismatchError
from ..payloads import ClassScores, FeatureSchema, FeatureVector
from .data import Dataset


@dataclass(frozen=True)
class Training:
    learning_rate: float
    epochs: int
    l2: float


@dataclass(frozen=True)
class LogRegModel:
    schema: FeatureSchema
    weights: tuple[float, ...]  # per standardized feature
    bias: float
    means: tuple[float, ...]
    stds: tuple[float, ...]
    training: Training
    seed: int
    loss_history: tuple[float, ...] = ()  # loss before training, then after each epoch

    @property
    def classes(self) -> tuple[str, str]:
        return self.schema.class_labels  # type: ignore[return-value]

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.schema.feature_names):
            raise SchemaMismatchError(
                f"expected {len(self.schema.feature_names)} features, got {X.shape[1]}")
        z = (X - np.asarray(self.means)) / np.asarray(self.stds)
        p_pos = _sigmoid(z @ np.asarray(self.weights) + self.bias)
        return np.column_stack([1.0 - p_pos, p_pos])

    def predict_proba(self, x: FeatureVector) -> ClassScores:
        if x.names != self.schema.feature_names:
            raise SchemaMismatchError("instance does not match model schema")
        probs = self.predict_batch(x.as_array().reshape(1, -1))[0]
        return ClassScores.from_array(self.schema.class_labels, probs)

    def refit(self, data: Dataset) -> "LogRegModel":
        return fit_logreg(data, self.training.learning_rate, self.training.epochs,
                          self.training.l2, self.seed)

    def to_doc(self) -> dict:
        return {
            "type": "logreg",
            "weights": list(self.weights),
            "bias": self.bias,
            "means": list(self.means),
            "stds": list(self.stds),
            "training": {"learning_rate": self.training.learning_rate,
                         "epochs": self.training.epochs, "l2": self.training.l2},
            "seed": self.seed,
            "schema": {
                "schema_id": self.schema.schema_id,
                "feature_names": list(self.schema.feature_names),
                "class_labels": list(self.schema.class_labels),
            },
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "LogRegModel":
        schema = FeatureSchema(doc["schema"]["schema_id"],
                               tuple(doc["schema"]["feature_names"]),
                               tuple(doc["schema"]["class_labels"]))
        t = doc["training"]
        return cls(schema=schema, weights=tuple(doc["weights"]), bias=doc["bias"],
                   means=tuple(doc["means"]), stds=tuple(doc["stds"]),
                   training=Training(t["learning_rate"], t["epochs"], t["l2"]),
                   seed=doc["seed"])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _loss(p: np.ndarray, y: np.ndarray, w: np.ndarray, l2: float) -> float:
    eps = 1e-12
    ce = -np.mean(y * np.log(p + eps) + (1.0 - y) * np.log(1.0 - p + eps))
    return float(ce + l2 * (w @ w) / (2.0 * len(y)))


def fit_logreg(data: Dataset, learning_rate: float = 0.05, epochs: int = 300,
               l2: float = 1.0, seed: int = 0) -> LogRegModel:
    if len(data) == 0:
        raise EmptyDatasetError("cannot fit logistic regression on an empty dataset")
    if len(data.schema.class_labels) != 2:
        raise NotBinaryError(
            f"logistic regression is binary; schema has {len(data.schema.class_labels)} classes")

    X = data.matrix()
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds[stds == 0.0] = 1.0
    Z = (X - means) / stds
    y = (data.label_indices() == 1).astype(float)  # positive = second schema label
    n, d = Z.shape

    w = np.zeros(d)
    b = 0.0
    history = [_loss(_sigmoid(Z @ w + b), y, w, l2)]
    for _ in range(epochs):
        p = _sigmoid(Z @ w + b)
        grad_w = (Z.T @ (p - y) + l2 * w) / n
        grad_b = float(np.mean(p - y))
        w -= learning_rate * grad_w
        b -= learning_rate * grad_b
        history.append(_loss(_sigmoid(Z @ w + b), y, w, l2))

    return LogRegModel(schema=data.schema, weights=tuple(w), bias=b,
                       means=tuple(means), stds=tuple(stds),
                       training=Training(learning_rate, epochs, l2), seed=seed,
                       loss_history=tuple(history))
