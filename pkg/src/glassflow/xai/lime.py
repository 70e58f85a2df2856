"""Local surrogate explanations on numeric tabular features.

Perturbations are Gaussian around the instance with per-feature background
spread; the surrogate is a weighted ridge fit in standardized coordinates,
so coefficients read as "effect per background standard deviation".
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DegenerateKernelError, OutOfRangeError
from ..payloads import FeatureVector
from .result import BackgroundSet, Explanation, PredictSurface
from .ridge import solve_weighted_ridge
from .shapley import _check_inputs, _weighted_r_squared

DEFAULT_RIDGE_LAMBDA = 1e-3
WEIGHT_FLOOR = 1e-12


def default_kernel_width(d: int) -> float:
    return 0.75 * math.sqrt(d)


def lime_explain(surface: PredictSurface, x: FeatureVector, bg: BackgroundSet,
                 target_class: str, n_samples: int = 1000,
                 kernel_width: float | None = None,
                 ridge_lambda: float = DEFAULT_RIDGE_LAMBDA,
                 seed: int = 0) -> Explanation:
    _check_inputs(surface, x, bg)
    d = len(x.names)
    if n_samples < 2 * d:
        raise OutOfRangeError(f"n_samples must be at least 2d = {2 * d}")
    if kernel_width is None:
        kernel_width = default_kernel_width(d)
    if kernel_width <= 0:
        raise OutOfRangeError("kernel_width must be positive")

    target = surface.class_index(target_class)
    x_row = x.as_array()
    sigma = bg.stds(fallback=1.0)

    rng = np.random.default_rng(seed)
    perturbed = rng.normal(loc=x_row, scale=sigma, size=(n_samples - 1, d))
    samples = np.vstack([x_row[None, :], perturbed])  # the instance anchors row 0

    y = np.asarray(surface.fn(samples), dtype=float)[:, target]
    standardized = (samples - x_row) / sigma
    dist_sq = np.sum(standardized ** 2, axis=1)
    weights = np.exp(-dist_sq / kernel_width ** 2)
    if np.all(weights < WEIGHT_FLOOR):
        raise DegenerateKernelError("every perturbation weight collapsed below 1e-12")

    design = np.column_stack([np.ones(n_samples), standardized])
    coef = solve_weighted_ridge(design, y, weights, ridge_lambda)
    r2 = _weighted_r_squared(y, design @ coef, weights)

    return Explanation(
        method="LIME",
        target_class=target_class,
        feature_names=x.names,
        phi=tuple(float(v) for v in coef[1:]),
        base_value=float(coef[0]),
        sample_count=int(n_samples),
        seed=int(seed),
        fidelity={"r_squared": r2},
    )
