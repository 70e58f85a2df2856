import pytest
from hypothesis import given
from hypothesis import strategies as st

from glassflow.errors import RuleDocumentError, UnknownFeatureError
from glassflow.expressions import (
    ALWAYS_TRUE,
    check_fields,
    parse_expression,
)
from glassflow.payloads import Decision, FeatureVector


def fv(**kw):
    return FeatureVector(tuple(kw), tuple(float(v) for v in kw.values()))


def test_atom_ops_match_python_semantics():
    x = fv(age=50.0)
    cases = [
        ({"field": "age", "op": "lt", "value": 60}, True),
        ({"field": "age", "op": "le", "value": 50}, True),
        ({"field": "age", "op": "eq", "value": 50.0}, True),
        ({"field": "age", "op": "ge", "value": 51}, False),
        ({"field": "age", "op": "gt", "value": 50}, False),
        ({"field": "age", "op": "in_range", "value": [0, 120]}, True),
        ({"field": "age", "op": "in_range", "value": [51, 120]}, False),
        ({"field": "age", "op": "in_set", "value": [49, 50, 51]}, True),
    ]
    for doc, expected in cases:
        assert parse_expression(doc).evaluate(x) is expected, doc


def test_all_of_any_nesting():
    doc = {"all": [
        {"field": "a", "op": "gt", "value": 0},
        {"any": [
            {"field": "b", "op": "lt", "value": 0},
            {"field": "c", "op": "eq", "value": 1.0},
        ]},
    ]}
    expr = parse_expression(doc)
    assert expr.evaluate(fv(a=1, b=5, c=1))
    assert not expr.evaluate(fv(a=1, b=5, c=0))
    assert not expr.evaluate(fv(a=0, b=-1, c=1))


def test_bare_atom_and_bare_list_are_all_shorthand():
    atom = {"field": "a", "op": "gt", "value": 0}
    assert parse_expression(atom).evaluate(fv(a=1))
    both = parse_expression([atom, {"field": "b", "op": "lt", "value": 0}])
    assert both.evaluate(fv(a=1, b=-1))
    assert not both.evaluate(fv(a=1, b=1))


def test_none_parses_to_always_true():
    assert parse_expression(None) is ALWAYS_TRUE
    assert ALWAYS_TRUE.evaluate(fv(a=1))


def test_parse_rejects_malformed_docs():
    bad = [
        {"field": "a", "op": "nope", "value": 1},
        {"field": "a", "op": "in_range", "value": [2, 1]},
        {"field": "a", "op": "in_range", "value": [1]},
        {"field": "a", "op": "in_set", "value": []},
        {"field": "a", "op": "lt", "value": "text"},
        {"field": "", "op": "lt", "value": 1},
        {"field": "a", "op": "lt", "value": 1, "extra": 2},
        {"op": "lt", "value": 1},
        {"all": [], "also": 1},
        {"any": []},
        {"all": [{"any": [{"any": [{"field": "a", "op": "lt", "value": 1}]}]}]},
        "just a string",
    ]
    for doc in bad:
        with pytest.raises(RuleDocumentError):
            parse_expression(doc)


def test_decision_fields_need_a_decision_in_scope():
    expr = parse_expression({"field": "decision.label", "op": "eq", "value": "x"})
    d = Decision("x", 0.9, "m")
    assert expr.evaluate(fv(a=1), d)
    with pytest.raises(UnknownFeatureError):
        expr.evaluate(fv(a=1), None)
    score_expr = parse_expression({"field": "decision.score", "op": "ge", "value": 0.5})
    assert score_expr.evaluate(fv(a=1), d)


def test_check_fields_against_schema():
    expr = parse_expression({"field": "age", "op": "gt", "value": 1})
    check_fields(expr, ["age", "bp"])
    with pytest.raises(UnknownFeatureError):
        check_fields(expr, ["bp"])
    dec = parse_expression({"field": "decision.score", "op": "lt", "value": 1})
    check_fields(dec, [], allow_decision=True)
    with pytest.raises(UnknownFeatureError):
        check_fields(dec, ["age"], allow_decision=False)


def test_expression_doc_round_trip():
    doc = {"all": [
        {"field": "a", "op": "in_range", "value": [0.0, 1.0]},
        {"any": [{"field": "b", "op": "gt", "value": 2.0},
                 {"field": "c", "op": "in_set", "value": ["u", "v"]}]},
    ]}
    expr = parse_expression(doc)
    assert parse_expression(expr.to_doc()) == expr


@given(value=st.floats(-1e6, 1e6), threshold=st.floats(-1e6, 1e6),
       op=st.sampled_from(["lt", "le", "ge", "gt"]))
def test_comparison_atoms_agree_with_operators(value, threshold, op):
    import operator
    expr = parse_expression({"field": "v", "op": op, "value": threshold})
    ref = {"lt": operator.lt, "le": operator.le,
           "ge": operator.ge, "gt": operator.gt}[op]
    assert expr.evaluate(fv(v=value)) == ref(value, threshold)
