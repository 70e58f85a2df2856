"""Attribution solver tests with hand-computed oracles.

Every numeric expectation here is derived independently of the solvers:
closed-form Shapley values for linear models, tiny coalition tables worked
by hand, and least-squares fits small enough to check with a calculator.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glassflow.errors import (
    EmptyBackgroundError,
    NonFiniteValueError,
    OutOfRangeError,
    SchemaMismatchError,
    SingularSystemError,
    TooManyFeaturesError,
    UnknownFeatureError,
    UnknownLabelError,
)
from glassflow.payloads import FeatureVector
from glassflow.xai import (
    BackgroundSet,
    Explanation,
    PredictSurface,
    default_kernel_width,
    exact_shapley,
    kernel_shap,
    lime_explain,
    shapley_kernel_weight,
    solve_weighted_ridge,
    what_if,
)


def linear_surface(beta, intercept=0.0, names=None):
    """Two-column surface whose first class is an affine score."""
    beta = np.asarray(beta, dtype=float)
    names = tuple(names or (f"f{i}" for i in range(len(beta))))

    def fn(mat):
        score = mat @ beta + intercept
        return np.column_stack([score, 1.0 - score])

    return PredictSurface(fn=fn, feature_names=names, class_labels=("pos", "neg"))


def product_surface():
    def fn(mat):
        score = mat[:, 0] * mat[:, 1]
        return np.column_stack([score, 1.0 - score])

    return PredictSurface(fn=fn, feature_names=("a", "b"), class_labels=("pos", "neg"))


def bg_of(names, rows):
    return BackgroundSet(tuple(FeatureVector(tuple(names), tuple(map(float, r)))
                               for r in rows))


# ---------------------------------------------------------------- kernel weight

def test_kernel_weight_matches_hand_values():
    assert shapley_kernel_weight(3, 1) == pytest.approx(1 / 3)
    assert shapley_kernel_weight(3, 2) == pytest.approx(1 / 3)
    assert shapley_kernel_weight(4, 2) == pytest.approx(0.125)
    assert shapley_kernel_weight(2, 1) == pytest.approx(0.5)


def test_kernel_weight_rejects_empty_and_full_coalitions():
    for s in (0, 3, -1, 4):
        with pytest.raises(OutOfRangeError):
            shapley_kernel_weight(3, s)


def test_kernel_weight_is_symmetric_in_coalition_size():
    for d in range(2, 10):
        for s in range(1, d):
            assert shapley_kernel_weight(d, s) == pytest.approx(
                shapley_kernel_weight(d, d - s))


# ---------------------------------------------------------------- exact Shapley

def test_exact_shapley_single_active_feature():
    # f = x0 with zero background: all credit lands on feature 0.
    surface = linear_surface([1.0, 0.0], names=("a", "b"))
    bg = bg_of(("a", "b"), [(0.0, 0.0)])
    x = FeatureVector(("a", "b"), (5.0, 7.0))
    expl = exact_shapley(surface, x, bg, "pos")
    assert expl.phi == pytest.approx((5.0, 0.0), abs=1e-12)
    assert expl.base_value == pytest.approx(0.0, abs=1e-12)
    assert expl.method == "ExactShapley"
    assert expl.sample_count == 4


def test_exact_shapley_product_splits_credit_evenly():
    # f = x0*x1, x = (1,1), zero background: v only pays out on the full
    # coalition, so each feature earns half of f(x) = 1.
    surface = product_surface()
    bg = bg_of(("a", "b"), [(0.0, 0.0)])
    x = FeatureVector(("a", "b"), (1.0, 1.0))
    expl = exact_shapley(surface, x, bg, "pos")
    assert expl.phi == pytest.approx((0.5, 0.5), abs=1e-12)
    assert expl.base_value == pytest.approx(0.0, abs=1e-12)


def test_exact_shapley_nonzero_background_hand_case():
    # f = x0, background rows (0,0) and (2,0): v(empty) = 1, so feature 0
    # earns f(x) - 1 = 5 and feature 1 earns nothing.
    surface = linear_surface([1.0, 0.0], names=("a", "b"))
    bg = bg_of(("a", "b"), [(0.0, 0.0), (2.0, 0.0)])
    x = FeatureVector(("a", "b"), (6.0, 3.0))
    expl = exact_shapley(surface, x, bg, "pos")
    assert expl.base_value == pytest.approx(1.0, abs=1e-12)
    assert expl.phi == pytest.approx((5.0, 0.0), abs=1e-12)


def test_exact_shapley_linear_closed_form():
    # For an affine model the interventional Shapley value is
    # beta_j * (x_j - background_mean_j), independent of the other features.
    rng = np.random.default_rng(7)
    beta = (1.5, -2.0, 0.25, 3.0)
    names = ("a", "b", "c", "d")
    surface = linear_surface(beta, intercept=0.4, names=names)
    rows = rng.normal(size=(12, 4))
    bg = bg_of(names, rows)
    x = FeatureVector(names, tuple(rng.normal(size=4)))
    expl = exact_shapley(surface, x, bg, "pos")
    expected = [b * (xv - mu) for b, xv, mu in
                zip(beta, x.values, rows.mean(axis=0))]
    assert expl.phi == pytest.approx(expected, abs=1e-9)
    assert expl.base_value == pytest.approx(
        float(rows.mean(axis=0) @ np.asarray(beta) + 0.4), abs=1e-9)


def test_exact_shapley_dummy_feature_gets_zero():
    surface = linear_surface([2.0, 0.0, 0.0], names=("a", "b", "c"))
    rng = np.random.default_rng(3)
    bg = bg_of(("a", "b", "c"), rng.normal(size=(8, 3)))
    x = FeatureVector(("a", "b", "c"), (1.0, 9.0, -4.0))
    expl = exact_shapley(surface, x, bg, "pos")
    assert abs(expl.phi[1]) < 1e-9
    assert abs(expl.phi[2]) < 1e-9


def test_exact_shapley_symmetric_features_get_equal_credit():
    # f = x0 + x1 with a background that treats both columns identically and
    # an instance where they coincide: the axioms force phi_0 == phi_1.
    surface = linear_surface([1.0, 1.0, 0.5], names=("a", "b", "c"))
    bg = bg_of(("a", "b", "c"), [(0.0, 0.0, 1.0), (2.0, 2.0, -1.0)])
    x = FeatureVector(("a", "b", "c"), (3.0, 3.0, 2.0))
    expl = exact_shapley(surface, x, bg, "pos")
    assert expl.phi[0] == pytest.approx(expl.phi[1], abs=1e-9)


def test_exact_shapley_efficiency_on_nonlinear_surface():
    def fn(mat):
        score = np.tanh(mat[:, 0] * mat[:, 1] - 0.5 * mat[:, 2] ** 2)
        return np.column_stack([score, 1.0 - score])

    names = ("a", "b", "c")
    surface = PredictSurface(fn=fn, feature_names=names, class_labels=("pos", "neg"))
    rng = np.random.default_rng(11)
    bg = bg_of(names, rng.normal(size=(9, 3)))
    x = FeatureVector(names, (0.7, -1.2, 0.3))
    expl = exact_shapley(surface, x, bg, "pos")
    f_x = float(surface.predict_one(x.values)[0])
    assert expl.base_value + sum(expl.phi) == pytest.approx(f_x, abs=1e-9)


def test_exact_shapley_rejects_mismatched_schemas_and_high_dimension():
    surface = linear_surface([1.0, 1.0], names=("a", "b"))
    bg = bg_of(("a", "b"), [(0.0, 0.0)])
    with pytest.raises(OutOfRangeError):
        exact_shapley(surface, FeatureVector(("a", "z"), (1.0, 2.0)), bg, "pos")
    with pytest.raises(UnknownLabelError):
        exact_shapley(surface, FeatureVector(("a", "b"), (1.0, 2.0)), bg, "nope")
    names = tuple(f"f{i}" for i in range(15))
    wide = linear_surface([0.0] * 15, names=names)
    wide_bg = bg_of(names, [tuple(0.0 for _ in names)])
    with pytest.raises(TooManyFeaturesError):
        exact_shapley(wide, FeatureVector(names, tuple(1.0 for _ in names)),
                      wide_bg, "pos")


@settings(max_examples=25, deadline=None)
@given(
    beta=st.lists(st.floats(-3, 3), min_size=2, max_size=5),
    seed=st.integers(0, 10_000),
)
def test_exact_shapley_linear_property(beta, seed):
    # Closed-form oracle on random affine models and random backgrounds.
    d = len(beta)
    names = tuple(f"f{i}" for i in range(d))
    surface = linear_surface(beta, intercept=-0.3, names=names)
    rng = np.random.default_rng(seed)
    rows = rng.normal(size=(5, d))
    x = FeatureVector(names, tuple(rng.normal(size=d)))
    expl = exact_shapley(surface, x, bg_of(names, rows), "pos")
    expected = [b * (xv - mu) for b, xv, mu in zip(beta, x.values, rows.mean(axis=0))]
    assert expl.phi == pytest.approx(expected, abs=1e-8)


# ------------------------------------------------------------------ KernelSHAP

def test_kernel_shap_exhaustive_matches_exact_on_nonlinear_surface():
    def fn(mat):
        score = mat[:, 0] * mat[:, 1] + 0.5 * mat[:, 2]
        return np.column_stack([score, 1.0 - score])

    names = ("a", "b", "c")
    surface = PredictSurface(fn=fn, feature_names=names, class_labels=("pos", "neg"))
    rng = np.random.default_rng(2)
    bg = bg_of(names, rng.normal(size=(10, 3)))
    x = FeatureVector(names, (1.3, -0.4, 2.2))
    exact = exact_shapley(surface, x, bg, "pos")
    kernel = kernel_shap(surface, x, bg, "pos", n_samples="exhaustive")
    assert kernel.phi == pytest.approx(exact.phi, abs=1e-9)
    assert kernel.base_value == pytest.approx(exact.base_value, abs=1e-12)
    assert kernel.method == "KernelSHAP"
    assert kernel.sample_count == (1 << 3) - 2  # proper coalitions only
    # The additive surrogate cannot fit a multiplicative game exactly, so
    # fidelity is informative here rather than 1.0.
    assert 0.0 <= kernel.fidelity["r_squared"] <= 1.0


def test_kernel_shap_large_budget_promotes_to_exhaustive():
    surface = linear_surface([1.0, -1.0, 2.0], names=("a", "b", "c"))
    bg = bg_of(("a", "b", "c"), [(0.0, 0.0, 0.0), (1.0, 1.0, 1.0)])
    x = FeatureVector(("a", "b", "c"), (2.0, 0.5, -1.0))
    expl = kernel_shap(surface, x, bg, "pos", n_samples=4096, seed=9)
    assert expl.sample_count == (1 << 3) - 2
    assert expl.seed == 9
    exact = exact_shapley(surface, x, bg, "pos")
    assert expl.phi == pytest.approx(exact.phi, abs=1e-9)
    # A linear game is exactly additive, so the surrogate fit is perfect.
    assert expl.fidelity["r_squared"] == pytest.approx(1.0, abs=1e-9)


def test_kernel_shap_sampled_is_deterministic_per_seed():
    surface = product_surface()
    rng = np.random.default_rng(4)
    bg = bg_of(("a", "b"), rng.normal(size=(6, 2)))
    x = FeatureVector(("a", "b"), (0.9, 1.1))
    one = kernel_shap(surface, x, bg, "pos", n_samples=None, seed=5)
    two = kernel_shap(surface, x, bg, "pos", n_samples=None, seed=5)
    assert one.phi == two.phi
    assert one.seed == two.seed == 5


def test_kernel_shap_sampled_satisfies_both_constraints():
    # Sampling noise never violates efficiency: both constraints are
    # eliminated algebraically, not approximated.
    def fn(mat):
        score = np.sin(mat[:, 0]) + mat[:, 1] * mat[:, 2]
        return np.column_stack([score, 1.0 - score])

    names = ("a", "b", "c")
    surface = PredictSurface(fn=fn, feature_names=names, class_labels=("pos", "neg"))
    rng = np.random.default_rng(6)
    bg = bg_of(names, rng.normal(size=(7, 3)))
    x = FeatureVector(names, (0.2, 1.4, -0.8))
    expl = kernel_shap(surface, x, bg, "pos", n_samples=5, seed=1)
    f_x = float(surface.predict_one(x.values)[0])
    assert expl.base_value + sum(expl.phi) == pytest.approx(f_x, abs=1e-9)


def test_kernel_shap_argument_validation():
    surface = product_surface()
    bg = bg_of(("a", "b"), [(0.0, 0.0)])
    x = FeatureVector(("a", "b"), (1.0, 1.0))
    with pytest.raises(OutOfRangeError):
        kernel_shap(surface, x, bg, "pos", n_samples=3)  # below d + 2
    with pytest.raises(OutOfRangeError):
        kernel_shap(surface, x, bg, "pos", n_samples=2.5)
    with pytest.raises(OutOfRangeError):
        kernel_shap(surface, x, bg, "pos", n_samples=True)
    narrow = PredictSurface(fn=lambda m: np.column_stack([m[:, 0], 1 - m[:, 0]]),
                            feature_names=("only",), class_labels=("pos", "neg"))
    with pytest.raises(OutOfRangeError):
        kernel_shap(narrow, FeatureVector(("only",), (1.0,)),
                    bg_of(("only",), [(0.0,)]), "pos")
    names = tuple(f"f{i}" for i in range(15))
    wide = linear_surface([0.0] * 15, names=names)
    with pytest.raises(TooManyFeaturesError):
        kernel_shap(wide, FeatureVector(names, tuple(1.0 for _ in names)),
                    bg_of(names, [tuple(0.0 for _ in names)]), "pos",
                    n_samples="exhaustive")


# ----------------------------------------------------------------- ridge solver

def test_ridge_recovers_exact_line_with_zero_penalty():
    z = np.array([0.0, 1.0, 2.0, 3.0])
    design = np.column_stack([np.ones(4), z])
    y = 2.0 + 3.0 * z
    coef = solve_weighted_ridge(design, y, np.ones(4), 0.0)
    assert coef == pytest.approx([2.0, 3.0], abs=1e-9)


def test_ridge_zero_weight_rows_are_ignored():
    design = np.column_stack([np.ones(4), np.array([0.0, 1.0, 0.0, 1.0])])
    y = np.array([0.0, 1.0, 10.0, 20.0])
    w = np.array([1.0, 1.0, 0.0, 0.0])
    coef = solve_weighted_ridge(design, y, w, 0.0)
    assert coef == pytest.approx([0.0, 1.0], abs=1e-9)


def test_ridge_penalty_shrinks_slope_but_not_intercept():
    z = np.array([-1.0, 1.0])
    design = np.column_stack([np.ones(2), z])
    y = 2.0 + 3.0 * z
    coef = solve_weighted_ridge(design, y, np.ones(2), 1e6)
    assert abs(coef[1]) < 1e-4
    assert coef[0] == pytest.approx(2.0, abs=1e-6)


def test_ridge_input_validation():
    design = np.column_stack([np.ones(3), np.arange(3.0)])
    y = np.zeros(3)
    w = np.ones(3)
    with pytest.raises(OutOfRangeError):
        solve_weighted_ridge(np.ones(3), y, w, 0.0)  # 1-d design
    with pytest.raises(OutOfRangeError):
        solve_weighted_ridge(design[:1], y[:1], w[:1], 0.0)  # n < p
    with pytest.raises(OutOfRangeError):
        solve_weighted_ridge(design, y[:2], w, 0.0)
    with pytest.raises(OutOfRangeError):
        solve_weighted_ridge(design, y, np.array([1.0, -0.5, 1.0]), 0.0)
    with pytest.raises(OutOfRangeError):
        solve_weighted_ridge(design, y, np.zeros(3), 0.0)
    with pytest.raises(OutOfRangeError):
        solve_weighted_ridge(design, y, w, -1e-9)


def test_ridge_singular_system_raises_after_retry():
    # The second column duplicates the intercept, so the normal equations
    # stay singular no matter how often a zero penalty is boosted.
    design = np.ones((3, 2))
    with pytest.raises(SingularSystemError):
        solve_weighted_ridge(design, np.array([1.0, 2.0, 3.0]), np.ones(3), 0.0)


def test_ridge_positive_penalty_rescues_collinear_design():
    design = np.ones((3, 2))
    coef = solve_weighted_ridge(design, np.array([1.0, 2.0, 3.0]), np.ones(3), 1e-3)
    assert np.all(np.isfinite(coef))
    # The penalized normal equations hold exactly for the returned solution.
    gram = design.T @ design + np.diag([0.0, 1e-3])
    rhs = design.T @ np.array([1.0, 2.0, 3.0])
    assert np.max(np.abs(gram @ coef - rhs)) < 1e-8


# ----------------------------------------------------------------------- LIME

def test_lime_recovers_linear_model_in_std_units():
    # On an exactly linear model the surrogate coefficient for feature j is
    # beta_j * sigma_j where sigma_j is the background standard deviation.
    names = ("a", "b")
    beta = (2.0, -1.0)
    surface = linear_surface(beta, intercept=0.3, names=names)
    rng = np.random.default_rng(0)
    rows = np.column_stack([rng.normal(0, 2.0, 50), rng.normal(5, 0.5, 50)])
    bg = bg_of(names, rows)
    sigma = rows.std(axis=0)
    x = FeatureVector(names, (1.0, 4.0))
    expl = lime_explain(surface, x, bg, "pos", n_samples=2000, seed=3)
    expected = [b * s for b, s in zip(beta, sigma)]
    for got, want in zip(expl.phi, expected):
        assert got == pytest.approx(want, rel=0.01)
    f_x = float(surface.predict_one(x.values)[0])
    assert expl.base_value == pytest.approx(f_x, abs=0.01)
    assert expl.fidelity["r_squared"] > 0.999
    assert expl.method == "LIME"


def test_lime_anchors_the_instance_as_first_sample():
    seen = []

    def fn(mat):
        seen.append(np.array(mat))
        return np.column_stack([mat[:, 0], 1 - mat[:, 0]])

    surface = PredictSurface(fn=fn, feature_names=("a", "b"),
                             class_labels=("pos", "neg"))
    bg = bg_of(("a", "b"), [(0.0, 0.0), (1.0, 2.0), (2.0, 4.0)])
    x = FeatureVector(("a", "b"), (7.0, -3.0))
    lime_explain(surface, x, bg, "pos", n_samples=16, seed=1)
    assert seen[0][0] == pytest.approx([7.0, -3.0])


def test_lime_is_deterministic_per_seed():
    surface = product_surface()
    bg = bg_of(("a", "b"), [(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)])
    x = FeatureVector(("a", "b"), (1.0, 2.0))
    one = lime_explain(surface, x, bg, "pos", n_samples=64, seed=8)
    two = lime_explain(surface, x, bg, "pos", n_samples=64, seed=8)
    other = lime_explain(surface, x, bg, "pos", n_samples=64, seed=9)
    assert one.phi == two.phi
    assert one.phi != other.phi


def test_lime_tiny_kernel_width_collapses_to_the_anchor():
    # With a vanishing kernel only the anchored instance keeps weight, so the
    # fit degenerates to intercept = f(x) with near-zero slopes.
    surface = linear_surface([2.0, -1.0], names=("a", "b"))
    bg = bg_of(("a", "b"), [(0.0, 0.0), (2.0, 2.0), (4.0, 4.0)])
    x = FeatureVector(("a", "b"), (1.0, 1.0))
    expl = lime_explain(surface, x, bg, "pos", n_samples=32,
                        kernel_width=1e-6, seed=0)
    f_x = float(surface.predict_one(x.values)[0])
    assert expl.base_value == pytest.approx(f_x, abs=1e-6)
    assert max(abs(p) for p in expl.phi) < 1e-6


def test_lime_argument_validation():
    surface = product_surface()
    bg = bg_of(("a", "b"), [(0.0, 0.0)])
    x = FeatureVector(("a", "b"), (1.0, 1.0))
    with pytest.raises(OutOfRangeError):
        lime_explain(surface, x, bg, "pos", n_samples=3)  # below 2d
    with pytest.raises(OutOfRangeError):
        lime_explain(surface, x, bg, "pos", kernel_width=0.0)
    with pytest.raises(OutOfRangeError):
        lime_explain(surface, x, bg, "pos", kernel_width=-1.0)


def test_default_kernel_width_scales_with_dimension():
    assert default_kernel_width(4) == pytest.approx(1.5)
    assert default_kernel_width(1) == pytest.approx(0.75)


# --------------------------------------------------------------------- what-if

def test_what_if_applies_overrides_and_scores_the_composite():
    # Coefficients chosen so every composite stays a valid probability.
    surface = linear_surface([0.1, 0.5], names=("a", "b"))
    base = FeatureVector(("a", "b"), (1.0, 1.0))
    result = what_if(surface, base, {"b": 0.5})
    assert result.vector.values == (1.0, 0.5)
    assert result.scores.probabilities[0] == pytest.approx(0.1 + 0.5 * 0.5)
    assert base.values == (1.0, 1.0)  # base vector untouched
    doc = result.to_doc()
    assert doc["vector"] == {"a": 1.0, "b": 0.5}
    assert set(doc["scores"]) == {"pos", "neg"}


def test_what_if_rejects_unknown_and_nonfinite_overrides():
    surface = linear_surface([1.0, 1.0], names=("a", "b"))
    base = FeatureVector(("a", "b"), (1.0, 2.0))
    with pytest.raises(UnknownFeatureError):
        what_if(surface, base, {"zz": 1.0})
    with pytest.raises(NonFiniteValueError):
        what_if(surface, base, {"a": float("nan")})
    with pytest.raises(NonFiniteValueError):
        what_if(surface, base, {"a": float("inf")})


# ------------------------------------------------------------- shared XAI types

def test_background_set_validation_and_stats():
    with pytest.raises(EmptyBackgroundError):
        BackgroundSet(())
    with pytest.raises(SchemaMismatchError):
        BackgroundSet((FeatureVector(("a",), (1.0,)),
                       FeatureVector(("b",), (1.0,))))
    bg = bg_of(("a", "b"), [(0.0, 5.0), (2.0, 5.0), (4.0, 5.0)])
    assert len(bg) == 3
    assert bg.means() == pytest.approx([2.0, 5.0])
    stds = bg.stds(fallback=1.5)
    assert stds[0] == pytest.approx(np.std([0.0, 2.0, 4.0]))
    assert stds[1] == pytest.approx(1.5)  # constant column falls back
    projected = bg.project(("b",))
    assert projected.feature_names == ("b",)
    doc = bg.to_doc()
    assert doc["size"] == 3
    assert doc["summary"]["a"] == pytest.approx(2.0)


def test_predict_surface_helpers():
    surface = linear_surface([1.0, 2.0], names=("a", "b"))
    assert surface.class_index("neg") == 1
    with pytest.raises(UnknownLabelError):
        surface.class_index("mystery")
    row = surface.predict_one([1.0, 1.0])
    assert row == pytest.approx([3.0, -2.0])


def test_explanation_doc_pairs_features_with_phi():
    expl = Explanation(method="LIME", target_class="pos",
                       feature_names=("a", "b"), phi=(0.25, -0.5),
                       base_value=0.1, sample_count=10, seed=4,
                       fidelity={"r_squared": 0.9})
    doc = expl.to_doc()
    assert doc["phi"] == [{"feature": "a", "value": 0.25},
                          {"feature": "b", "value": -0.5}]
    assert doc["fidelity"] == {"r_squared": 0.9}
    with pytest.raises(ValueError):
        Explanation(method="LIME", target_class="pos", feature_names=("a",),
                    phi=(0.1, 0.2), base_value=0.0, sample_count=1, seed=0)
