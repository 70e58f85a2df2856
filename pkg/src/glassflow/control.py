"""Control mechanisms: input filtering, output override, score biasing,
emergency stop, boundary fail-safe, and the fan-out/fan-in semantics.

Everything here is a pure evaluation over explicit rule documents; the engine
owns when these run and what happens to the run, and the registry owns the
mutable rule state. Rules are data (see expressions module), never code.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ClassSetMismatchError,
    EmptyBranchesError,
    MissingFeatureError,
    OverlappingPartitionsError,
    RuleDocumentError,
)
from .expressions import Expression, check_fields, parse_expression
from .payloads import ClassScores, Decision, FeatureVector


# --- input filtering ----------------------------------------------------------

@dataclass(frozen=True)
class FilterRule:
    """A rule states the ALLOWED region; inputs outside it are rejected."""

    id: str
    predicate: Expression
    reject_message: str

    def to_doc(self) -> dict:
        return {"id": self.id, "predicate": self.predicate.to_doc(),
                "reject_message": self.reject_message}

    @classmethod
    def from_doc(cls, doc: dict, feature_names: Sequence[str] = ()) -> "FilterRule":
        if not doc.get("id"):
            raise RuleDocumentError("filter rule needs a nonempty id")
        expr = parse_expression(doc.get("predicate"))
        if feature_names:
            check_fields(expr, feature_names, allow_decision=False)
        return cls(id=doc["id"], predicate=expr,
                   reject_message=doc.get("reject_message", f"rule {doc['id']} violated"))


@dataclass(frozen=True)
class Rejection:
    rule_id: str
    reason: str


def nongoal_filter(rules: Sequence[FilterRule], x: FeatureVector) -> Rejection | None:
    """First violated rule's rejection, or None when every rule admits x."""
    for rule in rules:
        if not rule.predicate.evaluate(x):
            return Rejection(rule_id=rule.id, reason=rule.reject_message)
    return None


# --- output override ------------------------------------------------------------

@dataclass(frozen=True)
class GuardRule:
    id: str
    priority: int
    condition: Expression
    replacement_label: str
    replacement_score: float
    rationale: str

    def to_doc(self) -> dict:
        return {"id": self.id, "priority": self.priority,
                "condition": self.condition.to_doc(),
                "replacement": {"label": self.replacement_label,
                                "score": self.replacement_score},
                "rationale": self.rationale}

    @classmethod
    def from_doc(cls, doc: dict, feature_names: Sequence[str] = (),
                 class_labels: Sequence[str] = ()) -> "GuardRule":
        if not doc.get("id"):
            raise RuleDocumentError("guard rule needs a nonempty id")
        if not isinstance(doc.get("priority"), int):
            raise RuleDocumentError("guard rule needs an integer priority")
        repl = doc.get("replacement") or {}
        label, score = repl.get("label"), repl.get("score", 1.0)
        if not label:
            raise RuleDocumentError("guard rule needs replacement.label")
        if class_labels and label not in class_labels:
            raise RuleDocumentError(f"replacement label '{label}' not in class set")
        if not isinstance(score, (int, float)) or not 0.0 <= float(score) <= 1.0:
            raise RuleDocumentError("replacement.score must be in [0, 1]")
        expr = parse_expression(doc.get("condition"))
        if feature_names:
            check_fields(expr, feature_names, allow_decision=True)
        return cls(id=doc["id"], priority=doc["priority"], condition=expr,
                   replacement_label=label, replacement_score=float(score),
                   rationale=doc.get("rationale", ""))


@dataclass(frozen=True)
class OverrideRecord:
    rule_id: str
    old: Decision
    new: Decision
    rationale: str


def rule_guard(rules: Sequence[GuardRule], x: FeatureVector, proposed: Decision,
               guard_block_id: str = "guard") -> tuple[Decision, OverrideRecord | None]:
    """First matching rule (lowest priority number) replaces the decision."""
    for rule in sorted(rules, key=lambda r: r.priority):
        if rule.condition.evaluate(x, proposed):
            replaced = Decision(label=rule.replacement_label,
                                score=rule.replacement_score,
                                source_block=guard_block_id)
            return replaced, OverrideRecord(rule.id, proposed, replaced, rule.rationale)
    return proposed, None


# --- score biasing ----------------------------------------------------------------

@dataclass(frozen=True)
class BiasConfig:
    offsets: Mapping[str, float]  # per-class additive offsets in log-probability space
    active: bool
    rationale: str = ""

    def to_doc(self) -> dict:
        return {"offsets": dict(self.offsets), "active": self.active,
                "rationale": self.rationale}

    @classmethod
    def from_doc(cls, doc: dict, class_labels: Sequence[str] = ()) -> "BiasConfig":
        offsets = doc.get("offsets", {})
        if not isinstance(offsets, Mapping):
            raise RuleDocumentError("offsets must be an object of label -> number")
        for label, v in offsets.items():
            if class_labels and label not in class_labels:
                raise RuleDocumentError(f"offset label '{label}' not in class set")
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise RuleDocumentError(f"offset for '{label}' must be finite")
        return cls(offsets={k: float(v) for k, v in offsets.items()},
                   active=bool(doc.get("active", True)),
                   rationale=doc.get("rationale", ""))

    @classmethod
    def inactive(cls) -> "BiasConfig":
        return cls(offsets={}, active=False)


def bias_inject(cfg: BiasConfig, scores: ClassScores) -> ClassScores:
    """softmax(log p + offsets); identity when inactive or offsets are zero."""
    if not cfg.active:
        return scores
    unknown = set(cfg.offsets) - set(scores.labels)
    if unknown:
        raise ClassSetMismatchError(f"offset labels not in scores: {sorted(unknown)}")
    p = np.asarray(scores.probabilities, dtype=float)
    off = np.array([cfg.offsets.get(lab, 0.0) for lab in scores.labels])
    with np.errstate(divide="ignore"):  # p == 0 stays 0 through the softmax
        logits = np.log(p) + off
    logits -= logits.max()
    ex = np.exp(logits)
    return ClassScores.from_array(scores.labels, ex / ex.sum())


# --- emergency stop ----------------------------------------------------------------

@dataclass(frozen=True)
class ShutdownState:
    active: bool
    reason: str = ""
    author: str = ""


class ShutdownFlag:
    """Global kill switch. Reads are lock-free snapshots; writes serialize."""

    def __init__(self):
        self._state = ShutdownState(active=False)
        self._lock = threading.Lock()

    @property
    def state(self) -> ShutdownState:
        return self._state

    @property
    def active(self) -> bool:
        return self._state.active

    def trigger(self, reason: str, author: str) -> dict:
        with self._lock:
            already = self._state.active
            if not already:
                self._state = ShutdownState(active=True, reason=reason, author=author)
            return {"active": True, "changed": not already,
                    "reason": self._state.reason, "author": self._state.author}

    def clear(self, author: str) -> dict:
        with self._lock:
            was_active = self._state.active
            if was_active:
                self._state = ShutdownState(active=False, author=author)
            return {"active": False, "changed": was_active, "author": author}


# --- boundary fail-safe ---------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryPredicate:
    """Fires on (input, final decision) pairs that breach an operational boundary."""

    expression: Expression

    def to_doc(self) -> dict:
        return {"expression": self.expression.to_doc(), "action": "reset_and_halt"}

    @classmethod
    def from_doc(cls, doc: dict, feature_names: Sequence[str] = ()) -> "BoundaryPredicate":
        expr = parse_expression(doc.get("expression"))
        if feature_names:
            check_fields(expr, feature_names, allow_decision=True)
        return cls(expression=expr)

    @classmethod
    def never(cls) -> "BoundaryPredicate":
        # empty OR group can never hold; an empty conjunction would always fire
        return cls(expression=parse_expression(
            {"all": [{"field": "decision.score", "op": "lt", "value": 0.0}]}))


def logic_bomb_check(pred: BoundaryPredicate, x: FeatureVector, final: Decision) -> bool:
    """True = fired (the run must be halted and mutable state reset)."""
    return pred.expression.evaluate(x, final)


# --- aggregation -----------------------------------------------------------------------

@dataclass(frozen=True)
class AggregationStrategy:
    kind: str  # majority_vote | mean_probability | weighted_mean
    weights: Mapping[str, float] = field(default_factory=dict)  # branch id -> weight

    def to_doc(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.kind == "weighted_mean":
            doc["weights"] = dict(self.weights)
        return doc

    @classmethod
    def from_doc(cls, doc: dict) -> "AggregationStrategy":
        kind = doc.get("kind")
        if kind not in ("majority_vote", "mean_probability", "weighted_mean"):
            raise RuleDocumentError(f"unknown aggregation kind: {kind!r}")
        weights = doc.get("weights", {})
        if kind == "weighted_mean":
            if not weights:
                raise RuleDocumentError("weighted_mean needs per-branch weights")
            vals = list(weights.values())
            if any(not isinstance(v, (int, float)) or v < 0 for v in vals):
                raise RuleDocumentError("weights must be nonnegative numbers")
            if sum(vals) <= 0:
                raise RuleDocumentError("weights must sum to a positive value")
        return cls(kind=kind, weights={k: float(v) for k, v in weights.items()})


@dataclass(frozen=True)
class AggregationResult:
    scores: ClassScores
    tie: bool = False  # majority vote had tied labels, broken by schema order
    vote_shares: Mapping[str, float] | None = None
    mean_probabilities: Mapping[str, float] | None = None


def aggregate(strategy: AggregationStrategy, branch_outputs: Sequence[ClassScores],
              branch_ids: Sequence[str] = ()) -> AggregationResult:
    if len(branch_outputs) < 2:
        raise EmptyBranchesError(f"need >= 2 branch outputs, got {len(branch_outputs)}")
    labels = branch_outputs[0].labels
    for b in branch_outputs[1:]:
        if b.labels != labels:
            raise ClassSetMismatchError(
                f"branch class sets differ: {labels} vs {b.labels}")

    probs = np.array([b.probabilities for b in branch_outputs])
    mean = probs.mean(axis=0)

    if strategy.kind == "mean_probability":
        return AggregationResult(scores=ClassScores.from_array(labels, mean))

    if strategy.kind == "weighted_mean":
        if branch_ids:
            missing = [b for b in branch_ids if b not in strategy.weights]
            if missing:
                raise RuleDocumentError(f"weighted_mean missing weights for {missing}")
            w = np.array([strategy.weights[b] for b in branch_ids])
        else:
            w = np.array([strategy.weights[k] for k in strategy.weights])
            if len(w) != len(branch_outputs):
                raise RuleDocumentError(
                    f"{len(w)} weights for {len(branch_outputs)} branches")
        w = w / w.sum()
        return AggregationResult(scores=ClassScores.from_array(labels, w @ probs))

    if strategy.kind == "majority_vote":
        votes = np.zeros(len(labels))
        for b in branch_outputs:
            votes[labels.index(b.argmax_label())] += 1.0
        shares = votes / votes.sum()
        top = shares.max()
        tie = int(np.sum(shares == top)) > 1
        return AggregationResult(
            scores=ClassScores.from_array(labels, shares),
            tie=tie,
            vote_shares={lab: float(s) for lab, s in zip(labels, shares)},
            mean_probabilities={lab: float(m) for lab, m in zip(labels, mean)},
        )

    raise RuleDocumentError(f"unknown aggregation kind: {strategy.kind!r}")


# --- fan-out ---------------------------------------------------------------------------

def split(mode: str, x: FeatureVector, children: Sequence[str],
          partitions: Mapping[str, Sequence[str]] | None = None) -> dict[str, FeatureVector]:
    """Per-child payloads: full copies (broadcast) or projections (column_partition)."""
    if mode == "broadcast":
        return {child: x for child in children}
    if mode == "column_partition":
        partitions = partitions or {}
        missing = [c for c in children if c not in partitions]
        if missing:
            raise MissingFeatureError(f"no partition for children: {missing}")
        seen: dict[str, str] = {}
        for child in children:
            for name in partitions[child]:
                if name in seen:
                    raise OverlappingPartitionsError(
                        f"feature '{name}' assigned to both '{seen[name]}' and '{child}'")
                seen[name] = child
                if name not in x.names:
                    raise MissingFeatureError(f"feature '{name}' not in input")
        return {child: x.project(list(partitions[child])) for child in children}
    raise RuleDocumentError(f"unknown split mode: {mode!r}")
