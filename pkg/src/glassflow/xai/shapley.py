"""Shapley attributions: exact enumeration and the kernel-weighted regression.

The value function is interventional: v(S) averages f over the background
rows with the coalition's features pinned to the instance.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import OutOfRangeError, SingularSystemError, TooManyFeaturesError
from ..payloads import FeatureVector
from .result import BackgroundSet, Explanation, PredictSurface
from .ridge import solve_weighted_ridge

EXACT_MAX_FEATURES = 14
_CHUNK_ROWS = 200_000


def shapley_kernel_weight(d: int, s: int) -> float:
    """Kernel weight for a coalition of size s out of d features."""
    if not 0 < s < d:
        raise OutOfRangeError(f"coalition size must satisfy 0 < s < d, got s={s}, d={d}")
    return (d - 1) / (math.comb(d, s) * s * (d - s))


def _check_inputs(surface: PredictSurface, x: FeatureVector, bg: BackgroundSet):
    if x.names != surface.feature_names or bg.feature_names != surface.feature_names:
        raise OutOfRangeError("instance, background, and predict surface disagree on features")


def _coalition_values(surface: PredictSurface, x_row: np.ndarray, bg_mat: np.ndarray,
                      masks: np.ndarray, target: int) -> np.ndarray:
    """Mean prediction over the background for each coalition mask (bool rows)."""
    n_bg = bg_mat.shape[0]
    values = np.empty(masks.shape[0])
    step = max(1, _CHUNK_ROWS // n_bg)
    for start in range(0, masks.shape[0], step):
        chunk = masks[start:start + step]
        composite = np.where(chunk[:, None, :], x_row[None, None, :], bg_mat[None, :, :])
        probs = np.asarray(surface.fn(composite.reshape(-1, bg_mat.shape[1])), dtype=float)
        values[start:start + step] = probs[:, target].reshape(len(chunk), n_bg).mean(axis=1)
    return values


def exact_shapley(surface: PredictSurface, x: FeatureVector, bg: BackgroundSet,
                  target_class: str) -> Explanation:
    _check_inputs(surface, x, bg)
    d = len(x.names)
    if d > EXACT_MAX_FEATURES:
        raise TooManyFeaturesError(
            f"exact enumeration is capped at {EXACT_MAX_FEATURES} features, got {d}")
    target = surface.class_index(target_class)
    x_row = x.as_array()
    bg_mat = bg.matrix()

    codes = np.arange(1 << d, dtype=np.int64)
    masks = (codes[:, None] >> np.arange(d)) & 1  # (2^d, d) membership
    values = _coalition_values(surface, x_row, bg_mat, masks.astype(bool), target)

    # weight by coalition size: s! (d-s-1)! / d!
    size_weight = np.array([math.factorial(s) * math.factorial(d - s - 1) / math.factorial(d)
                            for s in range(d)])
    sizes = masks.sum(axis=1)
    phi = np.zeros(d)
    for i in range(d):
        without = codes[masks[:, i] == 0]
        gain = values[without | (1 << i)] - values[without]
        phi[i] = np.sum(size_weight[sizes[without]] * gain)

    return Explanation(
        method="ExactShapley",
        target_class=target_class,
        feature_names=x.names,
        phi=tuple(float(v) for v in phi),
        base_value=float(values[0]),
        sample_count=int(len(codes)),
        seed=0,
    )


def _sample_masks(rng: np.random.Generator, d: int, n: int) -> np.ndarray:
    sizes = np.arange(1, d)
    p = (d - 1) / (sizes * (d - sizes))  # kernel mass per size (binomial count folded in)
    p = p / p.sum()
    drawn = rng.choice(sizes, size=n, p=p)
    masks = np.zeros((n, d), dtype=bool)
    for row, s in enumerate(drawn):
        masks[row, rng.permutation(d)[:s]] = True
    return masks


def _weighted_r_squared(y: np.ndarray, pred: np.ndarray, w: np.ndarray) -> float:
    mean = np.average(y, weights=w)
    ss_tot = np.sum(w * (y - mean) ** 2)
    if ss_tot < 1e-18:
        return 1.0  # zero-variance target: the surrogate is trivially faithful
    ss_res = np.sum(w * (y - pred) ** 2)
    return float(min(1.0, max(0.0, 1.0 - ss_res / ss_tot)))


def kernel_shap(surface: PredictSurface, x: FeatureVector, bg: BackgroundSet,
                target_class: str, n_samples: int | str | None = None,
                seed: int = 0) -> Explanation:
    """Shapley values via the kernel-weighted linear regression.

    The two exact constraints (phi_0 = v(empty), sum phi = f(x) - v(empty))
    are eliminated rather than approximated with large weights: the last
    feature's coefficient is substituted out and recovered afterwards.
    """
    _check_inputs(surface, x, bg)
    d = len(x.names)
    if d < 2:
        raise OutOfRangeError("kernel_shap needs at least 2 features")
    if n_samples is None:
        n_samples = min(1 << d, 2048)
    exhaustive = n_samples == "exhaustive"
    if exhaustive and d > EXACT_MAX_FEATURES:
        raise TooManyFeaturesError(
            f"exhaustive enumeration is capped at {EXACT_MAX_FEATURES} features, got {d}")
    if not exhaustive:
        if not isinstance(n_samples, int) or isinstance(n_samples, bool):
            raise OutOfRangeError(f"n_samples must be an integer or 'exhaustive', got {n_samples!r}")
        if n_samples < d + 2:
            raise OutOfRangeError(f"n_samples must be at least d+2 = {d + 2}")
        if d <= EXACT_MAX_FEATURES and n_samples >= (1 << d) - 2:
            exhaustive = True  # sampling budget covers every proper coalition

    target = surface.class_index(target_class)
    x_row = x.as_array()
    bg_mat = bg.matrix()
    v_empty = float(np.asarray(surface.fn(bg_mat), dtype=float)[:, target].mean())
    f_x = float(surface.predict_one(x_row)[target])
    delta = f_x - v_empty

    def build(masks: np.ndarray) -> tuple[np.ndarray, float, int]:
        values = _coalition_values(surface, x_row, bg_mat, masks, target)
        sizes = masks.sum(axis=1)
        weights = np.array([shapley_kernel_weight(d, int(s)) for s in sizes])
        z = masks.astype(float)
        # eliminate phi_{d-1}: regress v - v_empty - z_last*delta on z_i - z_last;
        # no intercept column, the v(empty) constraint already fixed it
        design = z[:, :-1] - z[:, -1:]
        y = values - v_empty - z[:, -1] * delta
        head = solve_weighted_ridge(design, y, weights, 0.0)
        phi = np.append(head, delta - head.sum())
        pred = z @ phi + v_empty
        r2 = _weighted_r_squared(values, pred, weights)
        return phi, r2, len(masks)

    if exhaustive:
        codes = np.arange(1 << d, dtype=np.int64)
        masks = ((codes[:, None] >> np.arange(d)) & 1).astype(bool)
        proper = masks[(masks.sum(axis=1) > 0) & (masks.sum(axis=1) < d)]
        phi, r2, count = build(proper)
        used_seed = seed
    else:
        last_error = None
        for attempt_seed in (seed, seed + 1):
            rng = np.random.default_rng(attempt_seed)
            try:
                phi, r2, count = build(_sample_masks(rng, d, n_samples))
                used_seed = attempt_seed
                last_error = None
                break
            except SingularSystemError as exc:
                last_error = exc
        if last_error is not None:
            raise SingularSystemError(
                "coalition sample was degenerate twice in a row") from last_error

    return Explanation(
        method="KernelSHAP",
        target_class=target_class,
        feature_names=x.names,
        phi=tuple(float(v) for v in phi),
        base_value=v_empty,
        sample_count=int(count),
        seed=int(used_seed),
        fidelity={"r_squared": r2},
    )
