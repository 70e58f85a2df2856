"""Attribution solvers over opaque predict functions."""

from .lime import default_kernel_width, lime_explain
from .result import BackgroundSet, Explanation, PredictSurface
from .ridge import solve_weighted_ridge
from .shapley import EXACT_MAX_FEATURES, exact_shapley, kernel_shap, shapley_kernel_weight
from .whatif import WhatIfResult, what_if

__all__ = [
    "BackgroundSet",
    "EXACT_MAX_FEATURES",
    "Explanation",
    "PredictSurface",
    "WhatIfResult",
    "default_kernel_width",
    "exact_shapley",
    "kernel_shap",
    "lime_explain",
    "shapley_kernel_weight",
    "solve_weighted_ridge",
    "what_if",
]
