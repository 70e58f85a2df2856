import numpy as np
import pytest

from glassflow.errors import SchemaMismatchError, UnknownFeatureError
from glassflow.payloads import (
    ClassScores,
    Decision,
    FeatureSchema,
    FeatureVector,
    PayloadKind,
    decision_from_scores,
    kind_of,
    snapshot,
)


def test_schema_rejects_duplicate_names():
    with pytest.raises(SchemaMismatchError):
        FeatureSchema("s", ("a", "a"), ("x", "y"))
    with pytest.raises(SchemaMismatchError):
        FeatureSchema("s", ("a", "b"), ("x", "x"))


def test_schema_project_subset_and_unknown():
    schema = FeatureSchema("s", ("a", "b", "c"), ("x", "y"))
    sub = schema.project(["c", "a"])
    assert sub.feature_names == ("c", "a")
    assert sub.class_labels == ("x", "y")
    with pytest.raises(UnknownFeatureError):
        schema.project(["a", "nope"])


def test_feature_vector_from_mapping_keeps_order():
    fv = FeatureVector.from_mapping({"b": 2, "a": 1}, order=("a", "b"))
    assert fv.names == ("a", "b")
    assert fv.values == (1.0, 2.0)
    with pytest.raises(UnknownFeatureError):
        FeatureVector.from_mapping({"a": 1}, order=("a", "b"))


def test_feature_vector_rejects_non_finite():
    with pytest.raises(SchemaMismatchError):
        FeatureVector(("a",), (float("nan"),))
    with pytest.raises(SchemaMismatchError):
        FeatureVector(("a", "b"), (1.0,))


def test_with_overrides_replaces_only_named():
    fv = FeatureVector(("a", "b"), (1.0, 2.0))
    out = fv.with_overrides({"b": 9})
    assert out.values == (1.0, 9.0)
    assert fv.values == (1.0, 2.0)  # original untouched
    with pytest.raises(UnknownFeatureError):
        fv.with_overrides({"zz": 0})


def test_project_and_as_array():
    fv = FeatureVector(("a", "b", "c"), (1.0, 2.0, 3.0), "s")
    assert fv.project(["c", "a"]).values == (3.0, 1.0)
    arr = fv.as_array()
    assert arr.dtype == float and arr.tolist() == [1.0, 2.0, 3.0]
    with pytest.raises(UnknownFeatureError):
        fv.value_of("zz")


def test_class_scores_validation():
    with pytest.raises(SchemaMismatchError):
        ClassScores(("only",), (1.0,))
    with pytest.raises(SchemaMismatchError):
        ClassScores(("a", "b"), (0.7, 0.7))
    with pytest.raises(SchemaMismatchError):
        ClassScores(("a", "b"), (1.5, -0.5))
    ok = ClassScores.from_array(["a", "b"], np.array([0.25, 0.75]))
    assert ok.probability_of("b") == 0.75


def test_argmax_tie_breaks_to_first_label():
    scores = ClassScores(("a", "b"), (0.5, 0.5))
    assert scores.argmax_label() == "a"
    assert ClassScores(("b", "a"), (0.5, 0.5)).argmax_label() == "b"


def test_decision_score_bounds():
    with pytest.raises(SchemaMismatchError):
        Decision("x", 1.2, "blk")
    d = Decision("x", 1.0, "blk")
    assert d.to_dict() == {"label": "x", "score": 1.0, "source_block": "blk"}


def test_decision_from_scores_uses_argmax():
    scores = ClassScores(("a", "b"), (0.2, 0.8))
    d = decision_from_scores(scores, "agg")
    assert (d.label, d.score, d.source_block) == ("b", 0.8, "agg")


def test_kind_of_and_snapshot_cover_all_payloads():
    fv = FeatureVector(("a", "b"), (1.0, 2.0))
    cs = ClassScores(("x", "y"), (0.5, 0.5))
    d = Decision("x", 0.5, "m")
    assert kind_of(fv) == PayloadKind.FEATURE_VECTOR
    assert kind_of(cs) == PayloadKind.CLASS_SCORES
    assert kind_of(d) == PayloadKind.DECISION
    assert snapshot(fv) == {"kind": "FeatureVector", "values": {"a": 1.0, "b": 2.0}}
    assert snapshot(cs) == {"kind": "ClassScores", "scores": {"x": 0.5, "y": 0.5}}
    assert snapshot(d)["kind"] == "Decision"
    assert snapshot(None) is None
    with pytest.raises(TypeError):
        kind_of("not a payload")
