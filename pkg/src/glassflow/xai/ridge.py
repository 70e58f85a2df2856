"""Weighted ridge via normal equations, shared by the surrogate explainers.

Column 0 of the design matrix is treated as the intercept and is never
penalized. The normal-equation system is factorized with Cholesky; if the
factorization fails or the solution does not actually satisfy the system,
the penalty is boosted once (lambda * 10) before giving up.
"""

from __future__ import annotations

import numpy as np

from ..errors import OutOfRangeError, SingularSystemError

RESIDUAL_TOL = 1e-8


def solve_weighted_ridge(design: np.ndarray, targets: np.ndarray,
                         weights: np.ndarray, lam: float) -> np.ndarray:
    """Minimize sum_i w_i (y_i - a.z_i)^2 + lam * ||a[1:]||^2."""
    A = np.asarray(design, dtype=float)
    y = np.asarray(targets, dtype=float)
    w = np.asarray(weights, dtype=float)
    if A.ndim != 2:
        raise OutOfRangeError("design matrix must be 2-d")
    n, p = A.shape
    if y.shape != (n,) or w.shape != (n,):
        raise OutOfRangeError("targets and weights must match the design row count")
    if n < p:
        raise OutOfRangeError(f"need at least as many rows as columns ({n} < {p})")
    if np.any(w < 0) or not np.any(w > 0):
        raise OutOfRangeError("weights must be nonnegative and not all zero")
    if lam < 0:
        raise OutOfRangeError("lambda must be nonnegative")

    gram = A.T @ (w[:, None] * A)
    rhs = A.T @ (w * y)
    penalty = np.ones(p)
    penalty[0] = 0.0  # intercept

    for lam_k in (lam, lam * 10.0):
        m = gram + np.diag(lam_k * penalty)
        try:
            lower = np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            continue
        coef = np.linalg.solve(lower.T, np.linalg.solve(lower, rhs))
        if np.max(np.abs(m @ coef - rhs)) < RESIDUAL_TOL:
            return coef
    raise SingularSystemError(
        "normal equations are singular even after boosting the ridge penalty")
