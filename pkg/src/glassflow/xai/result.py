"""Shared types for the attribution solvers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from ..errors import EmptyBackgroundError, SchemaMismatchError, UnknownLabelError
from ..payloads import FeatureVector


@dataclass(frozen=True)
class PredictSurface:
    """An opaque batch predict function plus the naming needed around it.

    ``fn`` maps a float matrix of shape (n, d) to class probabilities of
    shape (n, k); rows follow ``feature_names``, columns ``class_labels``.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    feature_names: tuple[str, ...]
    class_labels: tuple[str, ...]

    def class_index(self, label: str) -> int:
        try:
            return self.class_labels.index(label)
        except ValueError:
            raise UnknownLabelError(
                f"unknown target class {label!r}; expected one of {list(self.class_labels)}"
            ) from None

    def predict_one(self, values: Sequence[float]) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(values, dtype=float)[None, :]), dtype=float)[0]


@dataclass(frozen=True)
class BackgroundSet:
    """Reference rows the value function averages over."""

    rows: tuple[FeatureVector, ...]

    def __post_init__(self):
        if not self.rows:
            raise EmptyBackgroundError("background set needs at least one row")
        names = self.rows[0].names
        for row in self.rows[1:]:
            if row.names != names:
                raise SchemaMismatchError("background rows disagree on feature names")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.rows[0].names

    def __len__(self) -> int:
        return len(self.rows)

    def matrix(self) -> np.ndarray:
        return np.array([r.values for r in self.rows], dtype=float)

    def means(self) -> np.ndarray:
        return self.matrix().mean(axis=0)

    def stds(self, fallback: float = 1.0) -> np.ndarray:
        s = self.matrix().std(axis=0)
        s[s == 0.0] = fallback
        return s

    def project(self, names: Sequence[str]) -> "BackgroundSet":
        return BackgroundSet(tuple(r.project(names) for r in self.rows))

    def to_doc(self) -> dict:
        return {
            "size": len(self.rows),
            "feature_names": list(self.feature_names),
            "summary": {n: m for n, m in zip(self.feature_names, self.means())},
        }


@dataclass(frozen=True)
class Explanation:
    method: str  # ExactShapley | KernelSHAP | LIME
    target_class: str
    feature_names: tuple[str, ...]
    phi: tuple[float, ...]
    base_value: float
    sample_count: int
    seed: int
    fidelity: Mapping[str, float] | None = None

    def __post_init__(self):
        if len(self.phi) != len(self.feature_names):
            raise ValueError("phi must carry one value per feature")

    def to_doc(self) -> dict:
        return {
            "method": self.method,
            "target_class": self.target_class,
            "base_value": self.base_value,
            "phi": [{"feature": n, "value": v}
                    for n, v in zip(self.feature_names, self.phi)],
            "fidelity": dict(self.fidelity) if self.fidelity is not None else None,
            "sample_count": self.sample_count,
            "seed": self.seed,
        }
