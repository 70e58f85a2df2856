"""Structural building blocks and the pipeline DAG.

Blocks are registered with a behavior binding, wired with typed edges, then
frozen into an immutable validated graph. The JSON topology document is the
declarative equivalent of the builder calls, so graphs can live in config
files and round-trip through export/import.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping

from .errors import (
    AggregatorFaninError,
    CycleDetectedError,
    DuplicateIdError,
    GraphValidationError,
    MissingHandlerError,
    PayloadMismatchError,
    SchemaDocumentError,
    SplitterFanoutError,
    UnknownBlockError,
    UnreachableError,
)
from .payloads import Payload, PayloadKind


class BlockKind(str, Enum):
    PREPROCESSOR = "Preprocessor"
    MODEL = "Model"
    NONGOAL_FILTER = "NonGoalFilter"
    DIVINE_RULE_GUARD = "DivineRuleGuard"
    BIAS_INJECTOR = "BiasInjector"
    SHUTDOWN_TRIGGER = "ShutdownTrigger"
    LOGIC_BOMB = "LogicBomb"
    SPLITTER = "Splitter"
    AGGREGATOR = "Aggregator"


FV = PayloadKind.FEATURE_VECTOR
CS = PayloadKind.CLASS_SCORES
DE = PayloadKind.DECISION

# allowed (input, output) payload tags per kind; None = same-as-input
_KIND_PAYLOADS: dict[BlockKind, tuple[tuple[PayloadKind, ...], tuple[PayloadKind, ...] | None]] = {
    BlockKind.PREPROCESSOR: ((FV,), (FV,)),
    BlockKind.MODEL: ((FV,), (CS,)),
    BlockKind.NONGOAL_FILTER: ((FV,), (FV,)),
    BlockKind.DIVINE_RULE_GUARD: ((DE,), (DE,)),
    BlockKind.BIAS_INJECTOR: ((CS,), (CS,)),
    BlockKind.SHUTDOWN_TRIGGER: ((FV, CS, DE), None),  # pass-through
    BlockKind.LOGIC_BOMB: ((DE,), (DE,)),
    BlockKind.SPLITTER: ((FV,), (FV,)),
    BlockKind.AGGREGATOR: ((CS,), (CS, DE)),
}


@dataclass(frozen=True)
class BlockSpec:
    id: str
    kind: BlockKind
    display_name: str = ""
    description: str = ""
    input_payload: PayloadKind = FV
    output_payload: PayloadKind = FV
    config: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise SchemaDocumentError("block id must be nonempty")
        ins, outs = _KIND_PAYLOADS[self.kind]
        if self.input_payload not in ins:
            raise PayloadMismatchError(
                f"{self.kind.value} block '{self.id}' cannot consume "
                f"{self.input_payload.value}")
        allowed_out = outs if outs is not None else (self.input_payload,)
        if self.output_payload not in allowed_out:
            raise PayloadMismatchError(
                f"{self.kind.value} block '{self.id}' cannot produce "
                f"{self.output_payload.value}")

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "display_name": self.display_name,
            "description": self.description,
            "input_payload": self.input_payload.value,
            "output_payload": self.output_payload.value,
            "config": copy.deepcopy(dict(self.config)),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "BlockSpec":
        if not isinstance(doc, dict):
            raise SchemaDocumentError("block document must be an object")
        try:
            kind = BlockKind(doc["kind"])
        except KeyError:
            raise SchemaDocumentError("block document missing 'kind'") from None
        except ValueError:
            raise SchemaDocumentError(f"unknown block kind: {doc['kind']!r}") from None
        try:
            input_payload = PayloadKind(doc.get("input_payload", FV.value))
            output_payload = PayloadKind(doc.get("output_payload", FV.value))
        except ValueError as exc:
            raise SchemaDocumentError(f"unknown payload tag: {exc}") from None
        if "id" not in doc:
            raise SchemaDocumentError("block document missing 'id'")
        return cls(id=doc["id"], kind=kind,
                   display_name=doc.get("display_name", doc["id"]),
                   description=doc.get("description", ""),
                   input_payload=input_payload, output_payload=output_payload,
                   config=copy.deepcopy(doc.get("config", {})))


@dataclass(frozen=True)
class HandlerBinding:
    """A block's behavior: the transform plus its declared payload kinds."""

    input_kind: PayloadKind
    output_kind: PayloadKind
    fn: Callable[[Payload], Payload]

    def matches(self, spec: BlockSpec) -> bool:
        return (self.input_kind == spec.input_payload
                and self.output_kind == spec.output_payload)


# kinds whose behavior must be supplied by the caller; the rest are driven
# entirely by block config and control state
HANDLER_REQUIRED = (BlockKind.MODEL, BlockKind.PREPROCESSOR)


@dataclass(frozen=True)
class PipelineGraph:
    blocks: tuple[BlockSpec, ...]
    edges: tuple[tuple[str, str], ...]
    entry: str
    exit: str
    topo_order: tuple[str, ...]

    def spec(self, block_id: str) -> BlockSpec:
        for b in self.blocks:
            if b.id == block_id:
                return b
        raise UnknownBlockError(f"no block '{block_id}' in graph")

    def has_block(self, block_id: str) -> bool:
        return any(b.id == block_id for b in self.blocks)

    def inbound(self, block_id: str) -> tuple[str, ...]:
        return tuple(f for f, t in self.edges if t == block_id)

    def outbound(self, block_id: str) -> tuple[str, ...]:
        return tuple(t for f, t in self.edges if f == block_id)

    def blocks_of_kind(self, kind: BlockKind) -> tuple[BlockSpec, ...]:
        return tuple(b for b in self.blocks if b.kind == kind)


class GraphBuilder:
    """Mutable draft: register blocks, connect edges, then validate."""

    def __init__(self):
        self._blocks: dict[str, BlockSpec] = {}
        self._bindings: dict[str, HandlerBinding] = {}
        self._edges: list[tuple[str, str]] = []
        self._entry: str | None = None
        self._exit: str | None = None

    @property
    def bindings(self) -> dict[str, HandlerBinding]:
        return dict(self._bindings)

    def register(self, spec: BlockSpec, handler: HandlerBinding | None = None) -> str:
        if spec.id in self._blocks:
            raise DuplicateIdError(f"block id '{spec.id}' already registered")
        if handler is None and spec.kind in HANDLER_REQUIRED:
            raise MissingHandlerError(
                f"{spec.kind.value} block '{spec.id}' needs a handler binding")
        if handler is not None and not handler.matches(spec):
            raise PayloadMismatchError(
                f"handler for '{spec.id}' consumes {handler.input_kind.value} and "
                f"produces {handler.output_kind.value}; spec declares "
                f"{spec.input_payload.value} -> {spec.output_payload.value}")
        self._blocks[spec.id] = spec
        if handler is not None:
            self._bindings[spec.id] = handler
        return spec.id

    def connect(self, from_id: str, to_id: str) -> tuple[str, str]:
        for bid in (from_id, to_id):
            if bid not in self._blocks:
                raise UnknownBlockError(f"no block '{bid}' registered")
        src, dst = self._blocks[from_id], self._blocks[to_id]
        if src.output_payload != dst.input_payload:
            raise PayloadMismatchError(
                f"edge {from_id} -> {to_id}: {src.output_payload.value} does not "
                f"feed {dst.input_payload.value}")
        edge = (from_id, to_id)
        if edge not in self._edges:
            self._edges.append(edge)
        return edge

    def set_entry(self, block_id: str) -> None:
        if block_id not in self._blocks:
            raise UnknownBlockError(f"no block '{block_id}' registered")
        self._entry = block_id

    def set_exit(self, block_id: str) -> None:
        if block_id not in self._blocks:
            raise UnknownBlockError(f"no block '{block_id}' registered")
        self._exit = block_id

    def validate(self) -> PipelineGraph:
        if not self._blocks:
            raise GraphValidationError("graph has no blocks")
        if self._entry is None or self._exit is None:
            raise GraphValidationError("entry and exit must be designated")

        inbound: dict[str, list[str]] = {b: [] for b in self._blocks}
        outbound: dict[str, list[str]] = {b: [] for b in self._blocks}
        for f, t in self._edges:
            inbound[t].append(f)
            outbound[f].append(t)

        topo = self._topological_order(outbound, inbound)

        if inbound[self._entry]:
            raise GraphValidationError(f"entry '{self._entry}' has inbound edges")
        if outbound[self._exit]:
            raise GraphValidationError(f"exit '{self._exit}' has outbound edges")

        from_entry = self._closure(self._entry, outbound)
        to_exit = self._closure(self._exit, inbound)
        stranded = set(self._blocks) - (from_entry & to_exit)
        if stranded:
            raise UnreachableError(stranded)

        for spec in self._blocks.values():
            n_out, n_in = len(outbound[spec.id]), len(inbound[spec.id])
            if spec.kind == BlockKind.SPLITTER and n_out < 2:
                raise SplitterFanoutError(
                    f"splitter '{spec.id}' has {n_out} outbound edges, needs >= 2")
            if spec.kind == BlockKind.AGGREGATOR and n_in < 2:
                raise AggregatorFaninError(
                    f"aggregator '{spec.id}' has {n_in} inbound edges, needs >= 2")
            if spec.kind != BlockKind.SPLITTER and n_out > 1:
                raise GraphValidationError(
                    f"block '{spec.id}' fans out to {n_out} blocks; only a Splitter may")
            if spec.kind != BlockKind.AGGREGATOR and n_in > 1:
                raise GraphValidationError(
                    f"block '{spec.id}' has {n_in} inbound edges; only an Aggregator may")

        exit_out = self._blocks[self._exit].output_payload
        if exit_out == PayloadKind.FEATURE_VECTOR:
            raise GraphValidationError(
                "exit block must produce ClassScores or Decision to complete a run")

        return PipelineGraph(
            blocks=tuple(self._blocks.values()),
            edges=tuple(self._edges),
            entry=self._entry,
            exit=self._exit,
            topo_order=tuple(topo),
        )

    def _topological_order(self, outbound, inbound) -> list[str]:
        # Kahn's algorithm; ready set kept sorted so order is deterministic
        indegree = {b: len(inbound[b]) for b in self._blocks}
        ready = sorted(b for b, d in indegree.items() if d == 0)
        order: list[str] = []
        while ready:
            node = ready.pop(0)
            order.append(node)
            for nxt in outbound[node]:
                indegree[nxt] -= 1
                if indegree[nxt] == 0:
                    ready.append(nxt)
            ready.sort()
        if len(order) != len(self._blocks):
            raise CycleDetectedError(self._find_cycle(outbound))
        return order

    def _find_cycle(self, outbound) -> list[str]:
        state: dict[str, int] = {}  # 1 = on stack, 2 = done
        stack: list[str] = []

        def visit(node: str) -> list[str] | None:
            state[node] = 1
            stack.append(node)
            for nxt in outbound[node]:
                if state.get(nxt) == 1:
                    return stack[stack.index(nxt):] + [nxt]
                if state.get(nxt) is None:
                    found = visit(nxt)
                    if found:
                        return found
            stack.pop()
            state[node] = 2
            return None

        for b in self._blocks:
            if state.get(b) is None:
                found = visit(b)
                if found:
                    return found
        return []

    @staticmethod
    def _closure(start: str, neighbors: Mapping[str, list[str]]) -> set[str]:
        seen = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in neighbors[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen


def export_topology(graph: PipelineGraph) -> dict:
    """JSON-able topology document; inverse of import_topology."""
    return {
        "blocks": [b.to_doc() for b in graph.blocks],
        "edges": [[f, t] for f, t in graph.edges],
        "entry": graph.entry,
        "exit": graph.exit,
    }


def import_topology(doc: dict,
                    bindings: Mapping[str, HandlerBinding] | None = None) -> PipelineGraph:
    """Build and validate a graph from a topology document.

    ``bindings`` must supply a HandlerBinding for every block whose kind
    requires one (models, preprocessors).
    """
    if not isinstance(doc, dict):
        raise SchemaDocumentError("topology document must be an object")
    for key in ("blocks", "edges", "entry", "exit"):
        if key not in doc:
            raise SchemaDocumentError(f"topology document missing '{key}'")
    if not isinstance(doc["blocks"], list) or not isinstance(doc["edges"], list):
        raise SchemaDocumentError("'blocks' and 'edges' must be arrays")

    bindings = dict(bindings or {})
    builder = GraphBuilder()
    for block_doc in doc["blocks"]:
        spec = BlockSpec.from_doc(block_doc)
        handler = bindings.get(spec.id)
        if handler is None and spec.kind in HANDLER_REQUIRED:
            raise MissingHandlerError(
                f"no handler binding for {spec.kind.value} block '{spec.id}'")
        builder.register(spec, handler)
    for edge in doc["edges"]:
        if not isinstance(edge, (list, tuple)) or len(edge) != 2:
            raise SchemaDocumentError(f"edge must be a 2-element array, got {edge!r}")
        builder.connect(edge[0], edge[1])
    builder.set_entry(doc["entry"])
    builder.set_exit(doc["exit"])
    return builder.validate()
