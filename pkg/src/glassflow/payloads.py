"""Payloads that travel along pipeline edges.

The closed set of payload kinds is FeatureVector -> ClassScores -> Decision;
every block declares which kind it consumes and produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import SchemaMismatchError, UnknownFeatureError

_PROB_SUM_TOL = 1e-9


class PayloadKind(str, Enum):
    FEATURE_VECTOR = "FeatureVector"
    CLASS_SCORES = "ClassScores"
    DECISION = "Decision"


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature names plus the class label set of one problem."""

    schema_id: str
    feature_names: tuple[str, ...]
    class_labels: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.feature_names)) != len(self.feature_names):
            raise SchemaMismatchError("duplicate feature names in schema")
        if len(set(self.class_labels)) != len(self.class_labels):
            raise SchemaMismatchError("duplicate class labels in schema")

    def project(self, names: Sequence[str]) -> "FeatureSchema":
        missing = [n for n in names if n not in self.feature_names]
        if missing:
            raise UnknownFeatureError(f"features not in schema: {missing}")
        return FeatureSchema(
            schema_id=f"{self.schema_id}#{'+'.join(names)}",
            feature_names=tuple(names),
            class_labels=self.class_labels,
        )


@dataclass(frozen=True)
class FeatureVector:
    """One instance: ordered (name, value) pairs tied to a schema id."""

    names: tuple[str, ...]
    values: tuple[float, ...]
    schema_id: str = ""

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise SchemaMismatchError("feature names and values differ in length")
        if len(set(self.names)) != len(self.names):
            raise SchemaMismatchError("duplicate feature names")
        for name, v in zip(self.names, self.values):
            if not math.isfinite(v):
                raise SchemaMismatchError(f"non-finite value for feature '{name}'")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, float]], schema_id: str = "") -> "FeatureVector":
        names, values = zip(*pairs) if pairs else ((), ())
        return cls(tuple(names), tuple(float(v) for v in values), schema_id)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, float], order: Sequence[str],
                     schema_id: str = "") -> "FeatureVector":
        try:
            values = tuple(float(mapping[n]) for n in order)
        except KeyError as exc:
            raise UnknownFeatureError(f"missing feature {exc.args[0]!r}") from None
        return cls(tuple(order), values, schema_id)

    def value_of(self, name: str) -> float:
        try:
            return self.values[self.names.index(name)]
        except ValueError:
            raise UnknownFeatureError(f"unknown feature '{name}'") from None

    def with_overrides(self, overrides: Mapping[str, float]) -> "FeatureVector":
        unknown = [n for n in overrides if n not in self.names]
        if unknown:
            raise UnknownFeatureError(f"unknown features in overrides: {unknown}")
        values = tuple(float(overrides.get(n, v)) for n, v in zip(self.names, self.values))
        return FeatureVector(self.names, values, self.schema_id)

    def project(self, names: Sequence[str], schema_id: str = "") -> "FeatureVector":
        values = tuple(self.value_of(n) for n in names)
        return FeatureVector(tuple(names), values, schema_id or f"{self.schema_id}#{'+'.join(names)}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def to_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))


@dataclass(frozen=True)
class ClassScores:
    """Probability per class label, in schema label order."""

    labels: tuple[str, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        if len(self.labels) < 2:
            raise SchemaMismatchError("class scores need at least 2 classes")
        if len(set(self.labels)) != len(self.labels):
            raise SchemaMismatchError("duplicate class labels")
        if len(self.labels) != len(self.probabilities):
            raise SchemaMismatchError("labels and probabilities differ in length")
        for p in self.probabilities:
            if not math.isfinite(p) or p < -_PROB_SUM_TOL or p > 1 + _PROB_SUM_TOL:
                raise SchemaMismatchError(f"probability {p} outside [0, 1]")
        if abs(sum(self.probabilities) - 1.0) > _PROB_SUM_TOL:
            raise SchemaMismatchError(
                f"probabilities sum to {sum(self.probabilities)}, expected 1")

    @classmethod
    def from_array(cls, labels: Sequence[str], probs: Sequence[float]) -> "ClassScores":
        return cls(tuple(labels), tuple(float(p) for p in probs))

    def probability_of(self, label: str) -> float:
        try:
            return self.probabilities[self.labels.index(label)]
        except ValueError:
            raise UnknownFeatureError(f"unknown class label '{label}'") from None

    def argmax_label(self) -> str:
        # ties resolved toward the first label in schema order
        best = max(range(len(self.labels)), key=lambda i: (self.probabilities[i], -i))
        return self.labels[best]

    def to_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.probabilities))


@dataclass(frozen=True)
class Decision:
    """Final (or proposed) labelled outcome of a run."""

    label: str
    score: float
    source_block: str

    def __post_init__(self):
        if not math.isfinite(self.score) or not 0.0 <= self.score <= 1.0:
            raise SchemaMismatchError(f"decision score {self.score} outside [0, 1]")

    def to_dict(self) -> dict:
        return {"label": self.label, "score": self.score, "source_block": self.source_block}


Payload = FeatureVector | ClassScores | Decision


def kind_of(payload: Payload) -> PayloadKind:
    if isinstance(payload, FeatureVector):
        return PayloadKind.FEATURE_VECTOR
    if isinstance(payload, ClassScores):
        return PayloadKind.CLASS_SCORES
    if isinstance(payload, Decision):
        return PayloadKind.DECISION
    raise TypeError(f"not a payload: {type(payload)!r}")


def snapshot(payload: Payload | None) -> dict | None:
    """JSON-able view of a payload for trace events."""
    if payload is None:
        return None
    if isinstance(payload, FeatureVector):
        return {"kind": "FeatureVector", "values": payload.to_dict()}
    if isinstance(payload, ClassScores):
        return {"kind": "ClassScores", "scores": payload.to_dict()}
    if isinstance(payload, Decision):
        return {"kind": "Decision", **payload.to_dict()}
    raise TypeError(f"not a payload: {type(payload)!r}")


def decision_from_scores(scores: ClassScores, source_block: str) -> Decision:
    label = scores.argmax_label()
    return Decision(label=label, score=scores.probability_of(label), source_block=source_block)
