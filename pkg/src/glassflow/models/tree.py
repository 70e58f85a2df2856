"""CART decision tree with Gini impurity, grown greedily from scratch.

Split search is exhaustive over all features and the midpoints of sorted
unique values; ties resolve to the lowest feature index, then the lowest
threshold, so training is fully deterministic. Zero-gain splits are allowed
(parity problems like XOR need them); recursion stops on purity, the depth
cap, or the min-samples floor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import EmptyDatasetError, SchemaMismatchError
from ..payloads import ClassScores, FeatureSchema, FeatureVector
from .data import Dataset

LEAF = -1


@dataclass(frozen=True)
class TreeNode:
    """Internal node (feature_index >= 0) or leaf (feature_index == LEAF)."""

    feature_index: int
    threshold: float = 0.0
    left: int = LEAF
    right: int = LEAF
    distribution: tuple[float, ...] = ()

    def is_leaf(self) -> bool:
        return self.feature_index == LEAF

    def to_doc(self) -> dict:
        if self.is_leaf():
            return {"leaf": True, "distribution": list(self.distribution)}
        return {"leaf": False, "feature_index": self.feature_index,
                "threshold": self.threshold, "left": self.left, "right": self.right}

    @classmethod
    def from_doc(cls, doc: dict) -> "TreeNode":
        if doc.get("leaf"):
            return cls(LEAF, distribution=tuple(doc["distribution"]))
        return cls(doc["feature_index"], doc["threshold"], doc["left"], doc["right"])


@dataclass(frozen=True)
class TreeModel:
    schema: FeatureSchema
    nodes: tuple[TreeNode, ...]
    max_depth: int
    min_samples_leaf: int
    seed: int
    degenerate: bool = False  # fit saw a single class; single-leaf tree

    @cached_property
    def _arrays(self):
        feat = np.array([n.feature_index for n in self.nodes], dtype=np.int64)
        thr = np.array([n.threshold for n in self.nodes], dtype=float)
        left = np.array([n.left for n in self.nodes], dtype=np.int64)
        right = np.array([n.right for n in self.nodes], dtype=np.int64)
        k = len(self.schema.class_labels)
        dist = np.zeros((len(self.nodes), k))
        for i, n in enumerate(self.nodes):
            if n.is_leaf():
                dist[i] = n.distribution
        return feat, thr, left, right, dist

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        """Class probabilities for each row of X (rows in schema feature order)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.schema.feature_names):
            raise SchemaMismatchError(
                f"expected {len(self.schema.feature_names)} features, got {X.shape[1]}")
        feat, thr, left, right, dist = self._arrays
        idx = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            active = feat[idx] != LEAF
            if not active.any():
                break
            ai = idx[active]
            go_left = X[active, feat[ai]] <= thr[ai]
            idx[active] = np.where(go_left, left[ai], right[ai])
        return dist[idx]

    def predict_proba(self, x: FeatureVector) -> ClassScores:
        if x.names != self.schema.feature_names:
            raise SchemaMismatchError("instance does not match model schema")
        probs = self.predict_batch(x.as_array().reshape(1, -1))[0]
        return ClassScores.from_array(self.schema.class_labels, probs)

    def depth(self) -> int:
        def walk(i: int) -> int:
            node = self.nodes[i]
            if node.is_leaf():
                return 0
            return 1 + max(walk(node.left), walk(node.right))
        return walk(0)

    def refit(self, data: Dataset) -> "TreeModel":
        return fit_tree(data, self.max_depth, self.min_samples_leaf, self.seed)

    def to_doc(self) -> dict:
        return {
            "type": "tree",
            "nodes": [n.to_doc() for n in self.nodes],
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "seed": self.seed,
            "degenerate": self.degenerate,
            "schema": {
                "schema_id": self.schema.schema_id,
                "feature_names": list(self.schema.feature_names),
                "class_labels": list(self.schema.class_labels),
            },
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "TreeModel":
        schema = FeatureSchema(doc["schema"]["schema_id"],
                               tuple(doc["schema"]["feature_names"]),
                               tuple(doc["schema"]["class_labels"]))
        return cls(schema=schema,
                   nodes=tuple(TreeNode.from_doc(n) for n in doc["nodes"]),
                   max_depth=doc["max_depth"],
                   min_samples_leaf=doc["min_samples_leaf"],
                   seed=doc["seed"],
                   degenerate=doc.get("degenerate", False))


def _gini_from_counts(counts: np.ndarray, total) -> np.ndarray:
    # counts: (..., k); total broadcastable
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / np.expand_dims(total, -1)
    return 1.0 - np.nansum(p * p, axis=-1)


def _best_split(X: np.ndarray, y: np.ndarray, n_classes: int,
                min_samples_leaf: int) -> tuple[int, float, float] | None:
    """Lowest weighted-Gini split as (feature, threshold, impurity), or None."""
    n = len(y)
    onehot = np.eye(n_classes)[y]
    best: tuple[int, float, float] | None = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        cum = np.cumsum(onehot[order], axis=0)
        # candidate boundaries: between consecutive distinct values
        change = np.nonzero(xs[:-1] < xs[1:])[0]
        if change.size == 0:
            continue
        n_left = change + 1
        n_right = n - n_left
        ok = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
        if not ok.any():
            continue
        pos = change[ok]
        left_counts = cum[pos]
        right_counts = cum[-1] - left_counts
        nl = (pos + 1).astype(float)
        nr = n - nl
        weighted = (nl * _gini_from_counts(left_counts, nl)
                    + nr * _gini_from_counts(right_counts, nr)) / n
        i = int(np.argmin(weighted))  # first minimum = lowest threshold
        impurity = float(weighted[i])
        threshold = float((xs[pos[i]] + xs[pos[i] + 1]) / 2.0)
        if best is None or impurity < best[2]:
            best = (f, threshold, impurity)
    return best


def fit_tree(data: Dataset, max_depth: int, min_samples_leaf: int = 1,
             seed: int = 0) -> TreeModel:
    if len(data) == 0:
        raise EmptyDatasetError("cannot fit a tree on an empty dataset")
    X = data.matrix()
    y = data.label_indices()
    k = len(data.schema.class_labels)
    degenerate = len(np.unique(y)) < 2

    nodes: list[TreeNode] = []

    def leaf(indices: np.ndarray) -> int:
        counts = np.bincount(y[indices], minlength=k).astype(float)
        dist = (counts + 1.0) / (counts.sum() + k)  # Laplace alpha=1
        nodes.append(TreeNode(LEAF, distribution=tuple(dist)))
        return len(nodes) - 1

    def grow(indices: np.ndarray, depth: int) -> int:
        labels_here = y[indices]
        if (depth >= max_depth or len(indices) < 2 * min_samples_leaf
                or np.all(labels_here == labels_here[0])):
            return leaf(indices)
        found = _best_split(X[indices], labels_here, k, min_samples_leaf)
        if found is None:
            return leaf(indices)
        f, threshold, _ = found
        mask = X[indices, f] <= threshold
        slot = len(nodes)
        nodes.append(TreeNode(f, threshold))  # placeholder, children patched below
        left = grow(indices[mask], depth + 1)
        right = grow(indices[~mask], depth + 1)
        nodes[slot] = TreeNode(f, threshold, left, right)
        return slot

    grow(np.arange(len(data)), 0)
    return TreeModel(schema=data.schema, nodes=tuple(nodes), max_depth=max_depth,
                     min_samples_leaf=min_samples_leaf, seed=seed, degenerate=degenerate)
