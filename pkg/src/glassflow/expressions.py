"""Declarative comparison expressions used by control blocks.

An expression is a conjunction of terms; each term is either an atomic
comparison or a single-level OR group of atoms. There is no nesting beyond
that and no code execution: the control plane stays data-only.

JSON form::

    {"all": [
        {"field": "age", "op": "in_range", "value": [0, 120]},
        {"any": [
            {"field": "decision.label", "op": "eq", "value": "disease"},
            {"field": "oldpeak", "op": "gt", "value": 4.0}
        ]}
    ]}

A bare atom or a bare list of terms is accepted as shorthand for ``all``.
Atoms may reference input features by name or the proposed decision via the
``decision.label`` / ``decision.score`` fields where the caller allows it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import RuleDocumentError, UnknownFeatureError
from .payloads import Decision, FeatureVector

OPS = ("lt", "le", "eq", "ge", "gt", "in_range", "in_set")

DECISION_FIELDS = ("decision.label", "decision.score")


@dataclass(frozen=True)
class Atom:
    field: str
    op: str
    value: object  # scalar, [low, high] for in_range, list for in_set

    def to_doc(self) -> dict:
        return {"field": self.field, "op": self.op, "value": self.value}


@dataclass(frozen=True)
class Expression:
    """AND of terms; each term is an OR-group of one or more atoms."""

    groups: tuple[tuple[Atom, ...], ...]

    def evaluate(self, x: FeatureVector, decision: Decision | None = None) -> bool:
        return all(any(_eval_atom(a, x, decision) for a in group) for group in self.groups)

    def referenced_fields(self) -> set[str]:
        return {a.field for group in self.groups for a in group}

    def to_doc(self) -> dict:
        terms = []
        for group in self.groups:
            if len(group) == 1:
                terms.append(group[0].to_doc())
            else:
                terms.append({"any": [a.to_doc() for a in group]})
        return {"all": terms}


ALWAYS_TRUE = Expression(groups=())


def _eval_atom(atom: Atom, x: FeatureVector, decision: Decision | None) -> bool:
    if atom.field == "decision.label":
        if decision is None:
            raise UnknownFeatureError("expression references decision.label but no decision is in scope")
        actual: object = decision.label
    elif atom.field == "decision.score":
        if decision is None:
            raise UnknownFeatureError("expression references decision.score but no decision is in scope")
        actual = decision.score
    else:
        actual = x.value_of(atom.field)

    op, expected = atom.op, atom.value
    if op == "eq":
        return actual == expected
    if op == "in_set":
        return actual in expected
    if op == "in_range":
        low, high = expected
        return low <= actual <= high
    if op == "lt":
        return actual < expected
    if op == "le":
        return actual <= expected
    if op == "ge":
        return actual >= expected
    if op == "gt":
        return actual > expected
    raise RuleDocumentError(f"unknown op '{op}'")  # unreachable after parse


def _parse_atom(doc: dict) -> Atom:
    if not isinstance(doc, dict):
        raise RuleDocumentError(f"atom must be an object, got {type(doc).__name__}")
    unknown = set(doc) - {"field", "op", "value"}
    if unknown:
        raise RuleDocumentError(f"unknown atom keys: {sorted(unknown)}")
    try:
        field, op, value = doc["field"], doc["op"], doc["value"]
    except KeyError as exc:
        raise RuleDocumentError(f"atom missing key {exc.args[0]!r}") from None
    if not isinstance(field, str) or not field:
        raise RuleDocumentError("atom field must be a nonempty string")
    if op not in OPS:
        raise RuleDocumentError(f"unknown op '{op}', expected one of {OPS}")
    if op == "in_range":
        if (not isinstance(value, (list, tuple)) or len(value) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
            raise RuleDocumentError("in_range value must be [low, high]")
        if value[0] > value[1]:
            raise RuleDocumentError(f"in_range bounds out of order: {value}")
        value = [float(value[0]), float(value[1])]
    elif op == "in_set":
        if not isinstance(value, (list, tuple)) or not value:
            raise RuleDocumentError("in_set value must be a nonempty list")
        value = list(value)
    elif op in ("lt", "le", "ge", "gt"):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise RuleDocumentError(f"op '{op}' needs a numeric value")
        value = float(value)
    return Atom(field=field, op=op, value=value)


def parse_expression(doc) -> Expression:
    """Parse and validate an expression document. Raises RuleDocumentError."""
    if doc is None:
        return ALWAYS_TRUE
    if isinstance(doc, dict) and "all" in doc:
        if set(doc) != {"all"}:
            raise RuleDocumentError("'all' cannot be combined with other keys")
        terms = doc["all"]
    elif isinstance(doc, (list, tuple)):
        terms = doc
    else:
        terms = [doc]
    if not isinstance(terms, (list, tuple)):
        raise RuleDocumentError("'all' must hold a list of terms")

    groups: list[tuple[Atom, ...]] = []
    for term in terms:
        if isinstance(term, dict) and "any" in term:
            if set(term) != {"any"}:
                raise RuleDocumentError("'any' cannot be combined with other keys")
            atoms = term["any"]
            if not isinstance(atoms, (list, tuple)) or not atoms:
                raise RuleDocumentError("'any' must hold a nonempty list of atoms")
            if any(isinstance(a, dict) and ("any" in a or "all" in a) for a in atoms):
                raise RuleDocumentError("OR groups cannot nest")
            groups.append(tuple(_parse_atom(a) for a in atoms))
        else:
            groups.append((_parse_atom(term),))
    return Expression(groups=tuple(groups))


def check_fields(expr: Expression, feature_names: Sequence[str],
                 allow_decision: bool = False) -> None:
    """Validate that every referenced field resolves against the schema."""
    for f in expr.referenced_fields():
        if f in DECISION_FIELDS:
            if not allow_decision:
                raise UnknownFeatureError(f"field '{f}' not allowed here")
            continue
        if f not in feature_names:
            raise UnknownFeatureError(f"unknown feature '{f}'")
