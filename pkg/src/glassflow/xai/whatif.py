"""What-if evaluation: rescore an instance with some features overridden."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..errors import NonFiniteValueError, UnknownFeatureError
from ..payloads import ClassScores, FeatureVector
from .result import PredictSurface


@dataclass(frozen=True)
class WhatIfResult:
    scores: ClassScores
    vector: FeatureVector  # the exact composite the prediction used

    def to_doc(self) -> dict:
        return {"scores": self.scores.to_dict(),
                "vector": dict(zip(self.vector.names, self.vector.values))}


def what_if(surface: PredictSurface, base: FeatureVector,
            overrides: Mapping[str, float]) -> WhatIfResult:
    for name, value in overrides.items():
        if name not in surface.feature_names:
            raise UnknownFeatureError(f"unknown feature {name!r}")
        if not np.isfinite(value):
            raise NonFiniteValueError(f"override for {name!r} must be finite")
    composite = base.with_overrides(overrides)
    probs = surface.predict_one(composite.as_array())
    return WhatIfResult(ClassScores(surface.class_labels, tuple(float(p) for p in probs)),
                        composite)
