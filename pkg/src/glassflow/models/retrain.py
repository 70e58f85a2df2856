"""Re-label-and-retrain feedback loop.

Operators flip labels on individual rows; the owning model is refit with the
same hyperparameters and seed on the patched dataset. The caller (registry)
keeps the pre-retrain snapshot so a fail-safe reset can restore it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Sequence

from ..errors import IndexOutOfRangeError, UnknownLabelError
from .data import Dataset
from .logreg import LogRegModel
from .tree import TreeModel

Model = TreeModel | LogRegModel


@dataclass(frozen=True)
class RelabelRecord:
    row_index: int
    old_label: str
    new_label: str
    author: str
    timestamp: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def to_doc(self) -> dict:
        return {"row_index": self.row_index, "old_label": self.old_label,
                "new_label": self.new_label, "author": self.author,
                "timestamp": self.timestamp.isoformat()}


def apply_relabels(data: Dataset, relabels: Sequence[RelabelRecord]) -> Dataset:
    labels = list(data.labels)
    classes = set(data.schema.class_labels)
    for rec in relabels:
        if not 0 <= rec.row_index < len(labels):
            raise IndexOutOfRangeError(
                f"row_index {rec.row_index} outside [0, {len(labels)})")
        if rec.new_label not in classes:
            raise UnknownLabelError(f"label '{rec.new_label}' not in class set")
        labels[rec.row_index] = rec.new_label
    suffix = f" +{len(relabels)} relabels" if relabels else ""
    return data.with_labels(labels, provenance=data.provenance + suffix)


def retrain_with_relabels(model: Model, data: Dataset,
                          relabels: Sequence[RelabelRecord]) -> tuple[Model, Dataset]:
    """Refit ``model`` on ``data`` with the relabels applied.

    Same hyperparameters and seed, so an empty relabel list reproduces the
    original parameters exactly.
    """
    patched = apply_relabels(data, relabels)
    return model.refit(patched), patched
