"""Execution engine: pushes one instance through the validated flow.

Blocks run in topological order; the global kill switch is checked before
every invocation; every step lands in the trace. Fan-out duplicates or
partitions the payload per splitter config, fan-in blocks until all branch
results exist (trivially true under topological order), and the run ends in
exactly one terminal event.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass

from .control import (
    aggregate,
    bias_inject,
    logic_bomb_check,
    nongoal_filter,
    rule_guard,
    split,
)
from .errors import HandlerFailureError, SchemaMismatchError
from .graph import BlockKind, PipelineGraph
from .payloads import (
    ClassScores,
    Decision,
    FeatureVector,
    Payload,
    decision_from_scores,
    snapshot,
)
from .trace import EventKind, TraceEvent

COMPLETED = "completed"
REJECTED = "rejected"
HALTED = "halted"

GLOBAL_SCOPE = "global"


@dataclass(frozen=True)
class RunResult:
    run_id: str
    status: str  # completed | rejected | halted
    decision: Decision | None
    reason: str | None
    block: str | None  # offending block for rejected/halted ("global" for shutdown)
    events: tuple[TraceEvent, ...]
    dry_run: bool = False

    def to_doc(self) -> dict:
        return {
            "run_id": self.run_id,
            "status": self.status,
            "decision": self.decision.to_dict() if self.decision else None,
            "reason": self.reason,
            "block": self.block,
            "dry_run": self.dry_run,
        }


def new_run_id() -> str:
    return secrets.token_hex(16)  # 128 bits


def execute(registry, x: FeatureVector, run_id: str | None = None,
            dry_run: bool = False) -> RunResult:
    """Run one instance through the registry's pipeline.

    ``dry_run`` records the trace (flagged) but disables control side
    effects: a fired boundary predicate still halts the reported run, but
    nothing is reset.
    """
    graph: PipelineGraph = registry.graph
    trace = registry.trace
    rid = run_id or new_run_id()

    expected = registry.entry_feature_names()
    if expected is not None and x.names != tuple(expected):
        raise SchemaMismatchError(
            f"input features {list(x.names)} do not match entry schema {list(expected)}")

    ctl = registry.control.snapshot()
    emitted: list[TraceEvent] = []

    def emit(block_id: str | None, kind: EventKind, payload: dict | None = None):
        emitted.append(trace.append(rid, block_id, kind, payload))

    def finish(status: str, decision=None, reason=None, block=None) -> RunResult:
        return RunResult(run_id=rid, status=status, decision=decision, reason=reason,
                         block=block, events=tuple(emitted), dry_run=dry_run)

    emit(None, EventKind.RUN_STARTED,
         {"input": snapshot(x), "dry_run": dry_run})

    def halted_by_shutdown() -> RunResult:
        state = registry.shutdown.state
        reason = state.reason or "shutdown active"
        emit(None, EventKind.HALTED, {"scope": GLOBAL_SCOPE, "reason": reason})
        return finish(HALTED, reason=reason, block=GLOBAL_SCOPE)

    # payload routed along each edge, filled as blocks produce output
    routed: dict[tuple[str, str], Payload] = {}

    for block_id in graph.topo_order:
        if registry.shutdown.active:
            return halted_by_shutdown()

        spec = graph.spec(block_id)
        sources = graph.inbound(block_id)
        if block_id == graph.entry:
            incoming: Payload | list[Payload] = x
        elif len(sources) == 1:
            incoming = routed[(sources[0], block_id)]
        else:
            incoming = [routed[(src, block_id)] for src in sources]

        if isinstance(incoming, list):
            entered = {"branches": {src: snapshot(p) for src, p in zip(sources, incoming)}}
        else:
            entered = {"payload": snapshot(incoming)}
        emit(block_id, EventKind.BLOCK_ENTERED, entered)

        kind = spec.kind
        output: Payload

        if kind == BlockKind.NONGOAL_FILTER:
            rejection = nongoal_filter(ctl.filters.get(block_id, ()), incoming)
            if rejection is not None:
                emit(block_id, EventKind.INPUT_REJECTED,
                     {"rule_id": rejection.rule_id, "reason": rejection.reason})
                return finish(REJECTED, reason=rejection.reason, block=block_id)
            output = incoming

        elif kind in (BlockKind.MODEL, BlockKind.PREPROCESSOR):
            fn = registry.bindings[block_id].fn
            try:
                output = fn(incoming)
            except Exception as exc:  # noqa: BLE001 - handler code is foreign
                emit(block_id, EventKind.HALTED,
                     {"reason": f"handler failure: {exc}", "scope": block_id})
                raise HandlerFailureError(block_id, str(exc)) from exc

        elif kind == BlockKind.SPLITTER:
            children = graph.outbound(block_id)
            mode = spec.config.get("mode", "broadcast")
            per_child = split(mode, incoming, children,
                              partitions=spec.config.get("partitions"))
            for child in children:
                routed[(block_id, child)] = per_child[child]
            emit(block_id, EventKind.BLOCK_OUTPUT,
                 {"mode": mode,
                  "children": {c: snapshot(p) for c, p in per_child.items()}})
            continue

        elif kind == BlockKind.AGGREGATOR:
            strategy = ctl.strategies[block_id]
            result = aggregate(strategy, incoming, branch_ids=sources)
            agg_payload = {
                "strategy": strategy.to_doc(),
                "branches": list(sources),
                "scores": result.scores.to_dict(),
            }
            if strategy.kind == "majority_vote":
                agg_payload["tie"] = result.tie
                agg_payload["vote_shares"] = result.vote_shares
                agg_payload["mean_probabilities"] = result.mean_probabilities
            emit(block_id, EventKind.AGGREGATED, agg_payload)
            if spec.output_payload.value == "Decision":
                output = decision_from_scores(result.scores, block_id)
            else:
                output = result.scores

        elif kind == BlockKind.BIAS_INJECTOR:
            cfg = ctl.bias[block_id]
            output = bias_inject(cfg, incoming)
            if cfg.active:
                emit(block_id, EventKind.BIAS_APPLIED,
                     {"before": incoming.to_dict(), "after": output.to_dict(),
                      "offsets": dict(cfg.offsets)})

        elif kind == BlockKind.DIVINE_RULE_GUARD:
            rules = ctl.guards.get(block_id, ())
            output, record = rule_guard(rules, x, incoming, block_id)
            if record is not None:
                emit(block_id, EventKind.OUTPUT_OVERRIDDEN,
                     {"rule_id": record.rule_id, "old": record.old.to_dict(),
                      "new": record.new.to_dict(), "rationale": record.rationale})

        elif kind == BlockKind.LOGIC_BOMB:
            pred = ctl.predicates[block_id]
            if logic_bomb_check(pred, x, incoming):
                emit(block_id, EventKind.RESET,
                     {"predicate": pred.to_doc(), "dry_run": dry_run,
                      "restored": [] if dry_run else registry.reset_mutable_state()})
                reason = "boundary predicate fired"
                emit(block_id, EventKind.HALTED, {"scope": block_id, "reason": reason})
                return finish(HALTED, reason=reason, block=block_id)
            output = incoming

        elif kind == BlockKind.SHUTDOWN_TRIGGER:
            output = incoming  # presence exposes the kill switch; payload passes through

        else:  # pragma: no cover - kinds are a closed set
            raise HandlerFailureError(block_id, f"no behavior for kind {kind}")

        emit(block_id, EventKind.BLOCK_OUTPUT, {"payload": snapshot(output)})
        for child in graph.outbound(block_id):
            routed[(block_id, child)] = output

    final = output  # exit block's payload; validation bans FeatureVector exits
    if isinstance(final, ClassScores):
        decision = decision_from_scores(final, graph.exit)
    else:
        decision = final
    emit(None, EventKind.RUN_FINISHED, {"decision": decision.to_dict()})
    return finish(COMPLETED, decision=decision)
