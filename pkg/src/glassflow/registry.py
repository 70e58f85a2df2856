"""Runtime registry: the validated graph plus every piece of mutable state.

One Registry owns the trace store, the global kill switch, the live control
rules, and the model slots (live model + pristine snapshot per model block).
All control-plane writes go through its methods so each one produces exactly
one audit event, and so a boundary fail-safe can roll everything back in a
single place.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from . import engine
from .control import (
    AggregationStrategy,
    BiasConfig,
    BoundaryPredicate,
    FilterRule,
    GuardRule,
    ShutdownFlag,
)
from .errors import (
    DuplicateIdError,
    EmptyBackgroundError,
    EmptyDatasetError,
    OutOfRangeError,
    RuleDocumentError,
    SchemaDocumentError,
    UnknownBlockError,
    UnknownRuleError,
)
from .graph import (
    CS,
    FV,
    BlockKind,
    HandlerBinding,
    PipelineGraph,
    export_topology,
    import_topology,
)
from .models import (
    Dataset,
    Model,
    RelabelRecord,
    fit_logreg,
    fit_tree,
    retrain_with_relabels,
)
from .payloads import ClassScores, FeatureSchema, FeatureVector, PayloadKind
from .trace import AUDIT_RUN_ID, EventKind, TraceStore
from .xai import BackgroundSet, Explanation, PredictSurface
from .xai import exact_shapley, kernel_shap, lime_explain

PIPELINE_TARGET = "pipeline"


# --- model slots ----------------------------------------------------------------

class ModelSlot:
    """Live model for one block, plus the snapshots a fail-safe restores."""

    def __init__(self, block_id: str, model: Model, train_data: Dataset):
        self.block_id = block_id
        self.initial_model = model
        self.initial_data = train_data
        self._model = model
        self._data = train_data
        self._lock = threading.Lock()

    @property
    def current(self) -> Model:
        return self._model

    @property
    def train_data(self) -> Dataset:
        return self._data

    def retrain(self, relabels: Sequence[RelabelRecord]) -> Model:
        with self._lock:
            self._model, self._data = retrain_with_relabels(self._model, self._data, relabels)
            return self._model

    def reset(self) -> bool:
        with self._lock:
            changed = self._model is not self.initial_model
            self._model = self.initial_model
            self._data = self.initial_data
            return changed


def _slot_handler(slots: Mapping[str, ModelSlot], block_id: str) -> Callable:
    def handle(fv: FeatureVector) -> ClassScores:
        model = slots[block_id].current
        probs = model.predict_batch(fv.as_array()[None, :])[0]
        return ClassScores.from_array(model.schema.class_labels, probs)
    return handle


# --- control state ----------------------------------------------------------------

@dataclass(frozen=True)
class ControlSnapshot:
    filters: Mapping[str, tuple[FilterRule, ...]]
    guards: Mapping[str, tuple[GuardRule, ...]]
    bias: Mapping[str, BiasConfig]
    strategies: Mapping[str, AggregationStrategy]
    predicates: Mapping[str, BoundaryPredicate]


class ControlState:
    """Mutable rule state; every value object inside is immutable."""

    def __init__(self):
        self._lock = threading.RLock()
        self.filters: dict[str, tuple[FilterRule, ...]] = {}
        self.guards: dict[str, tuple[GuardRule, ...]] = {}
        self.bias: dict[str, BiasConfig] = {}
        self.strategies: dict[str, AggregationStrategy] = {}
        self.predicates: dict[str, BoundaryPredicate] = {}

    def snapshot(self) -> ControlSnapshot:
        with self._lock:
            return ControlSnapshot(
                filters=dict(self.filters),
                guards=dict(self.guards),
                bias=dict(self.bias),
                strategies=dict(self.strategies),
                predicates=dict(self.predicates),
            )

    @property
    def lock(self) -> threading.RLock:
        return self._lock


def input_feature_map(graph: PipelineGraph,
                      schema_names: Sequence[str]) -> dict[str, tuple[str, ...] | None]:
    """Feature names flowing INTO each block, while the payload is still a
    feature vector. Column-partition splitters narrow them; a preprocessor
    makes downstream names unknowable (None)."""
    feats: dict[str, tuple[str, ...] | None] = {graph.entry: tuple(schema_names)}
    for block_id in graph.topo_order:
        if block_id not in feats:
            continue
        spec = graph.spec(block_id)
        if spec.output_payload != PayloadKind.FEATURE_VECTOR:
            continue
        current = feats[block_id]
        if spec.kind == BlockKind.SPLITTER and spec.config.get("mode") == "column_partition":
            partitions = spec.config.get("partitions", {})
            for child in graph.outbound(block_id):
                names = partitions.get(child)
                feats[child] = tuple(names) if names else None
        elif spec.kind == BlockKind.PREPROCESSOR:
            for child in graph.outbound(block_id):
                feats[child] = None
        else:
            for child in graph.outbound(block_id):
                feats[child] = current
    return feats


def build_background(dataset: Dataset, size: int = 100, seed: int = 0) -> BackgroundSet:
    """Seeded sample of training rows, kept in dataset order."""
    n = len(dataset)
    if n == 0:
        raise EmptyBackgroundError("cannot sample a background from an empty dataset")
    take = min(size, n)
    rng = np.random.default_rng(seed)
    picked = np.sort(rng.permutation(n)[:take])
    return BackgroundSet(tuple(dataset.rows[i] for i in picked))


# --- the registry ------------------------------------------------------------------

class Registry:
    def __init__(self, graph: PipelineGraph, bindings: Mapping[str, HandlerBinding],
                 *, slots: Mapping[str, ModelSlot] | None = None,
                 dataset: Dataset | None = None,
                 schema: FeatureSchema | None = None,
                 trace_capacity: int = 1024,
                 background_size: int = 100, background_seed: int = 0):
        self.graph = graph
        self.bindings = dict(bindings)
        self.slots = dict(slots or {})
        self.dataset = dataset
        self.schema = schema or (dataset.schema if dataset is not None else None)
        self.trace = TraceStore(trace_capacity)
        self.shutdown = ShutdownFlag()
        self.control = ControlState()
        if self.schema is not None:
            self.input_features = input_feature_map(graph, self.schema.feature_names)
        else:
            self.input_features = {b.id: None for b in graph.blocks}
        self._background = (build_background(dataset, background_size, background_seed)
                            if dataset is not None and len(dataset) else None)
        self._load_control_from_config()

    # -- construction helpers -------------------------------------------------

    def _load_control_from_config(self) -> None:
        labels = self.schema.class_labels if self.schema else ()
        full = self.schema.feature_names if self.schema else ()
        for spec in self.graph.blocks:
            cfg = spec.config
            local = self.input_features.get(spec.id) or ()
            if spec.kind == BlockKind.NONGOAL_FILTER:
                self.control.filters[spec.id] = tuple(
                    FilterRule.from_doc(d, local) for d in cfg.get("rules", []))
            elif spec.kind == BlockKind.DIVINE_RULE_GUARD:
                rules = tuple(GuardRule.from_doc(d, full, labels)
                              for d in cfg.get("rules", []))
                _check_guard_priorities(rules)
                self.control.guards[spec.id] = rules
            elif spec.kind == BlockKind.BIAS_INJECTOR:
                doc = cfg.get("bias")
                self.control.bias[spec.id] = (BiasConfig.from_doc(doc, labels)
                                              if doc else BiasConfig.inactive())
            elif spec.kind == BlockKind.AGGREGATOR:
                doc = cfg.get("strategy") or {"kind": "mean_probability"}
                strategy = AggregationStrategy.from_doc(doc)
                self._check_strategy_weights(spec.id, strategy)
                self.control.strategies[spec.id] = strategy
            elif spec.kind == BlockKind.LOGIC_BOMB:
                doc = cfg.get("predicate")
                self.control.predicates[spec.id] = (
                    BoundaryPredicate.from_doc(doc, full) if doc
                    else BoundaryPredicate.never())

    def _check_strategy_weights(self, block_id: str, strategy: AggregationStrategy) -> None:
        if strategy.kind != "weighted_mean":
            return
        branches = self.graph.inbound(block_id)
        missing = [b for b in branches if b not in strategy.weights]
        if missing:
            raise RuleDocumentError(
                f"weighted_mean on '{block_id}' lacks weights for branches {missing}")

    # -- lookups ----------------------------------------------------------------

    def spec(self, block_id: str):
        return self.graph.spec(block_id)

    def _spec_of_kind(self, block_id: str, *kinds: BlockKind):
        spec = self.graph.spec(block_id)
        if spec.kind not in kinds:
            wanted = " or ".join(k.value for k in kinds)
            raise UnknownBlockError(
                f"block '{block_id}' is a {spec.kind.value}, not a {wanted}")
        return spec

    def entry_feature_names(self) -> tuple[str, ...] | None:
        return self.input_features.get(self.graph.entry)

    def graph_doc(self) -> dict:
        return export_topology(self.graph)

    # -- execution ----------------------------------------------------------------

    def execute(self, x: FeatureVector, run_id: str | None = None,
                dry_run: bool = False) -> engine.RunResult:
        return engine.execute(self, x, run_id=run_id, dry_run=dry_run)

    def instance_vector(self, mapping: Mapping[str, float],
                        names: Sequence[str] | None = None) -> FeatureVector:
        order = tuple(names) if names is not None else self.entry_feature_names()
        if order is None:
            order = tuple(mapping)
        schema_id = self.schema.schema_id if self.schema else ""
        return FeatureVector.from_mapping(mapping, order, schema_id)

    def reset_mutable_state(self) -> list[str]:
        """Fail-safe rollback: bias offsets zeroed, models back to snapshots."""
        restored: list[str] = []
        with self.control.lock:
            for block_id, cfg in list(self.control.bias.items()):
                if any(v != 0.0 for v in cfg.offsets.values()):
                    self.control.bias[block_id] = BiasConfig(
                        offsets={k: 0.0 for k in cfg.offsets},
                        active=cfg.active, rationale=cfg.rationale)
                    restored.append(f"bias:{block_id}")
        for block_id, slot in self.slots.items():
            if slot.reset():
                restored.append(f"model:{block_id}")
        return restored

    # -- audit -----------------------------------------------------------------------

    def _audit(self, action: str, block_id: str | None, author: str, detail: dict):
        self.trace.append(AUDIT_RUN_ID, block_id, EventKind.CONTROL_UPDATED,
                          {"action": action, "author": author, **detail})

    def record_tool_call(self, tool_name: str, arguments: dict, status: int,
                         conversation_id: str) -> None:
        self.trace.append(AUDIT_RUN_ID, None, EventKind.TOOL_INVOKED,
                          {"tool": tool_name, "arguments": arguments,
                           "status": status, "origin": "agent",
                           "conversation_id": conversation_id})

    # -- rules (filters and guards) ----------------------------------------------------

    def _rule_home(self, block_id: str):
        spec = self._spec_of_kind(block_id, BlockKind.NONGOAL_FILTER,
                                  BlockKind.DIVINE_RULE_GUARD)
        if spec.kind == BlockKind.NONGOAL_FILTER:
            return self.control.filters, self._parse_filter_rule
        return self.control.guards, self._parse_guard_rule

    def _parse_filter_rule(self, block_id: str, doc: dict) -> FilterRule:
        return FilterRule.from_doc(doc, self.input_features.get(block_id) or ())

    def _parse_guard_rule(self, block_id: str, doc: dict) -> GuardRule:
        labels = self.schema.class_labels if self.schema else ()
        full = self.schema.feature_names if self.schema else ()
        return GuardRule.from_doc(doc, full, labels)

    def list_rules(self, block_id: str) -> list[dict]:
        home, _ = self._rule_home(block_id)
        return [r.to_doc() for r in home.get(block_id, ())]

    def add_rule(self, block_id: str, doc: dict, author: str) -> dict:
        home, parse = self._rule_home(block_id)
        rule = parse(block_id, doc)
        with self.control.lock:
            rules = home.get(block_id, ())
            if any(r.id == rule.id for r in rules):
                raise DuplicateIdError(f"rule '{rule.id}' already exists on '{block_id}'")
            updated = rules + (rule,)
            if isinstance(rule, GuardRule):
                _check_guard_priorities(updated)
            home[block_id] = updated
        self._audit("add_rule", block_id, author, {"rule": rule.to_doc()})
        return rule.to_doc()

    def put_rule(self, block_id: str, rule_id: str, doc: dict, author: str) -> dict:
        home, parse = self._rule_home(block_id)
        doc = {**doc, "id": rule_id}
        rule = parse(block_id, doc)
        with self.control.lock:
            rules = home.get(block_id, ())
            kept = tuple(r for r in rules if r.id != rule_id)
            created = len(kept) == len(rules)
            updated = kept + (rule,)
            if isinstance(rule, GuardRule):
                _check_guard_priorities(updated)
            home[block_id] = updated
        self._audit("put_rule", block_id, author,
                    {"rule": rule.to_doc(), "created": created})
        return rule.to_doc()

    def delete_rule(self, block_id: str, rule_id: str, author: str) -> dict:
        home, _ = self._rule_home(block_id)
        with self.control.lock:
            rules = home.get(block_id, ())
            kept = tuple(r for r in rules if r.id != rule_id)
            if len(kept) == len(rules):
                raise UnknownRuleError(f"no rule '{rule_id}' on block '{block_id}'")
            home[block_id] = kept
        self._audit("delete_rule", block_id, author, {"rule_id": rule_id})
        return {"deleted": rule_id}

    # -- bias ---------------------------------------------------------------------------

    def get_bias(self, block_id: str) -> dict:
        self._spec_of_kind(block_id, BlockKind.BIAS_INJECTOR)
        return self.control.bias[block_id].to_doc()

    def set_bias(self, block_id: str, doc: dict, author: str) -> dict:
        self._spec_of_kind(block_id, BlockKind.BIAS_INJECTOR)
        labels = self.schema.class_labels if self.schema else ()
        cfg = BiasConfig.from_doc(doc, labels)
        with self.control.lock:
            self.control.bias[block_id] = cfg
        self._audit("set_bias", block_id, author, {"bias": cfg.to_doc()})
        return cfg.to_doc()

    # -- aggregation strategy -------------------------------------------------------------

    def get_strategy(self, block_id: str) -> dict:
        self._spec_of_kind(block_id, BlockKind.AGGREGATOR)
        return self.control.strategies[block_id].to_doc()

    def set_strategy(self, block_id: str, doc: dict, author: str) -> dict:
        self._spec_of_kind(block_id, BlockKind.AGGREGATOR)
        strategy = AggregationStrategy.from_doc(doc)
        self._check_strategy_weights(block_id, strategy)
        with self.control.lock:
            self.control.strategies[block_id] = strategy
        self._audit("set_strategy", block_id, author, {"strategy": strategy.to_doc()})
        return strategy.to_doc()

    # -- boundary predicate -----------------------------------------------------------------

    def get_predicate(self, block_id: str) -> dict:
        self._spec_of_kind(block_id, BlockKind.LOGIC_BOMB)
        return self.control.predicates[block_id].to_doc()

    def set_predicate(self, block_id: str, doc: dict, author: str) -> dict:
        self._spec_of_kind(block_id, BlockKind.LOGIC_BOMB)
        full = self.schema.feature_names if self.schema else ()
        pred = BoundaryPredicate.from_doc(doc, full)
        with self.control.lock:
            self.control.predicates[block_id] = pred
        self._audit("set_predicate", block_id, author, {"predicate": pred.to_doc()})
        return pred.to_doc()

    # -- kill switch ---------------------------------------------------------------------------

    def trigger_shutdown(self, reason: str, author: str) -> dict:
        ack = self.shutdown.trigger(reason, author)
        self._audit("trigger_shutdown", None, author, dict(ack))
        return ack

    def clear_shutdown(self, author: str) -> dict:
        ack = self.shutdown.clear(author)
        self._audit("clear_shutdown", None, author, dict(ack))
        return ack

    # -- models ------------------------------------------------------------------------------------

    def model_slot(self, block_id: str) -> ModelSlot:
        self._spec_of_kind(block_id, BlockKind.MODEL)
        slot = self.slots.get(block_id)
        if slot is None:
            raise UnknownBlockError(
                f"model block '{block_id}' has a custom handler, not a managed slot")
        return slot

    def predict(self, block_id: str, x: FeatureVector) -> ClassScores:
        model = self.model_slot(block_id).current
        if x.names != model.schema.feature_names:
            x = x.project(model.schema.feature_names)
        probs = model.predict_batch(x.as_array()[None, :])[0]
        return ClassScores.from_array(model.schema.class_labels, probs)

    def retrain(self, block_id: str, relabel_docs: Sequence[dict], author: str) -> dict:
        slot = self.model_slot(block_id)
        records = [_relabel_from_doc(d, author) for d in relabel_docs]
        model = slot.retrain(records)
        self._audit("retrain", block_id, author,
                    {"relabels": [r.to_doc() for r in records]})
        return {"block_id": block_id, "applied": len(records),
                "model": _model_summary(model)}

    def training_rows(self, block_id: str, offset: int = 0, limit: int = 20) -> dict:
        """Read-only slice of the model's current training table, relabels
        applied, so relabel workflows can address rows by index."""
        if offset < 0:
            raise OutOfRangeError(f"offset must be >= 0, got {offset}")
        if limit < 1:
            raise OutOfRangeError(f"limit must be >= 1, got {limit}")
        data = self.model_slot(block_id).train_data
        rows = [{"row_index": i,
                 "features": data.rows[i].to_dict(),
                 "label": data.labels[i]}
                for i in range(offset, min(offset + limit, len(data)))]
        return {"block_id": block_id, "total": len(data),
                "offset": offset, "rows": rows}

    # -- explain surfaces ------------------------------------------------------------------------------

    def background(self, block_id: str | None = None) -> BackgroundSet:
        if self._background is None:
            raise EmptyBackgroundError("no training data loaded; background unavailable")
        if block_id is None:
            return self._background
        names = self.model_slot(block_id).current.schema.feature_names
        if names == self._background.feature_names:
            return self._background
        return self._background.project(names)

    def predict_surface(self, block_id: str) -> PredictSurface:
        slot = self.model_slot(block_id)

        def fn(matrix: np.ndarray) -> np.ndarray:
            return slot.current.predict_batch(np.asarray(matrix, dtype=float))

        model = slot.current
        return PredictSurface(fn=fn, feature_names=model.schema.feature_names,
                              class_labels=model.schema.class_labels)

    def pipeline_surface(self) -> PredictSurface:
        """The whole flow as a predict function, evaluated by silent dry runs.

        A rejected or halted row has no class scores, so it contributes a
        uniform vector; a completed decision is widened back to a score
        vector (winner keeps its score, the rest split the remainder).
        """
        if self.schema is None:
            raise EmptyDatasetError("pipeline surface needs a feature schema")
        names = self.schema.feature_names
        labels = self.schema.class_labels
        shadow = _TraceShadow(self)

        def fn(matrix: np.ndarray) -> np.ndarray:
            matrix = np.asarray(matrix, dtype=float)
            out = np.empty((matrix.shape[0], len(labels)))
            for i, row in enumerate(matrix):
                fv = FeatureVector(names, tuple(float(v) for v in row))
                result = engine.execute(shadow, fv, dry_run=True)
                if result.status == engine.COMPLETED:
                    out[i] = _decision_probs(labels, result.decision)
                else:
                    out[i] = 1.0 / len(labels)
            return out

        return PredictSurface(fn=fn, feature_names=names, class_labels=labels)

    def surface_for(self, target: str) -> PredictSurface:
        if target == PIPELINE_TARGET:
            return self.pipeline_surface()
        return self.predict_surface(target)

    def explain(self, target: str, method: str, instance: Mapping[str, float],
                *, target_class: str | None = None, n_samples: int | str | None = None,
                seed: int = 0, kernel_width: float | None = None,
                ridge_lambda: float = 1e-3) -> Explanation:
        """One entry point for every explanation request (API, CLI, agent),
        so identical parameters cannot produce different results."""
        surface = self.surface_for(target)
        bg = self.background(None if target == PIPELINE_TARGET else target)
        x = self.instance_vector(instance, surface.feature_names)
        cls = target_class or surface.class_labels[0]
        if method == "exact_shapley":
            return exact_shapley(surface, x, bg, cls)
        if method == "shap":
            return kernel_shap(surface, x, bg, cls, n_samples=n_samples, seed=seed)
        if method == "lime":
            kwargs = {"seed": seed, "ridge_lambda": ridge_lambda}
            if kernel_width is not None:
                kwargs["kernel_width"] = kernel_width
            if n_samples is not None:
                if not isinstance(n_samples, int):
                    raise OutOfRangeError("lime n_samples must be an integer")
                kwargs["n_samples"] = n_samples
            return lime_explain(surface, x, bg, cls, **kwargs)
        raise OutOfRangeError(
            f"unknown method {method!r}; expected exact_shapley, shap, or lime")

    def what_if_pipeline(self, base: Mapping[str, float],
                         overrides: Mapping[str, float]) -> dict:
        """Dry-run the full flow on base+overrides; the trace records the run
        with its dry_run flag but the control plane is left untouched."""
        fv = self.instance_vector(base).with_overrides(overrides)
        result = self.execute(fv, dry_run=True)
        labels = self.schema.class_labels if self.schema else ()
        if result.status == engine.COMPLETED and labels:
            scores = {lab: float(p) for lab, p in
                      zip(labels, _decision_probs(labels, result.decision))}
        else:
            scores = None
        return {
            "run_id": result.run_id,
            "status": result.status,
            "decision": result.decision.to_dict() if result.decision else None,
            "scores": scores,
            "reason": result.reason,
            "vector": fv.to_dict(),
        }


class _TraceShadow:
    """Registry stand-in for silent surface evaluations: shares the graph and
    live control state but writes trace events into a throwaway store."""

    def __init__(self, registry: Registry):
        self.graph = registry.graph
        self.bindings = registry.bindings
        self.control = registry.control
        self.shutdown = registry.shutdown
        self.trace = TraceStore(capacity=2)
        self._entry_names = registry.entry_feature_names()

    def entry_feature_names(self):
        return self._entry_names

    def reset_mutable_state(self) -> list[str]:  # dry runs never reach this
        return []


def _decision_probs(labels: Sequence[str], decision) -> np.ndarray:
    k = len(labels)
    probs = np.full(k, (1.0 - decision.score) / (k - 1))
    probs[list(labels).index(decision.label)] = decision.score
    return probs


def _check_guard_priorities(rules: Sequence[GuardRule]) -> None:
    seen: dict[int, str] = {}
    for r in rules:
        if r.priority in seen:
            raise RuleDocumentError(
                f"rules '{seen[r.priority]}' and '{r.id}' share priority {r.priority}")
        seen[r.priority] = r.id


def _relabel_from_doc(doc: dict, author: str) -> RelabelRecord:
    if not isinstance(doc, dict) or "row_index" not in doc or "new_label" not in doc:
        raise SchemaDocumentError("relabel needs row_index and new_label")
    return RelabelRecord(row_index=int(doc["row_index"]),
                         old_label=str(doc.get("old_label", "")),
                         new_label=str(doc["new_label"]),
                         author=doc.get("author", author))


def _model_summary(model: Model) -> dict:
    doc = model.to_doc()
    summary = {"type": doc["type"], "features": list(model.schema.feature_names)}
    if doc["type"] == "tree":
        summary["depth"] = model.depth()
        summary["degenerate"] = model.degenerate
    else:
        summary["final_loss"] = model.loss_history[-1]
        summary["epochs"] = model.training.epochs
    return summary


# --- building a runtime from a topology document ----------------------------------------


def _fit_learner(doc: dict, data: Dataset) -> Model:
    kind = doc.get("type")
    if kind == "tree":
        return fit_tree(data, max_depth=int(doc.get("max_depth", 4)),
                        min_samples_leaf=int(doc.get("min_samples_leaf", 1)),
                        seed=int(doc.get("seed", 0)))
    if kind == "logreg":
        return fit_logreg(data, learning_rate=float(doc.get("learning_rate", 0.05)),
                          epochs=int(doc.get("epochs", 300)),
                          l2=float(doc.get("l2", 1.0)),
                          seed=int(doc.get("seed", 0)))
    raise SchemaDocumentError(f"unknown learner type: {kind!r}")


def build_runtime(topology_doc: dict, dataset: Dataset | None = None, *,
                  extra_bindings: Mapping[str, HandlerBinding] | None = None,
                  trace_capacity: int = 1024,
                  background_size: int = 100,
                  background_seed: int = 0) -> Registry:
    """Train every model block from its learner config and assemble a Registry."""
    slots: dict[str, ModelSlot] = {}
    bindings: dict[str, HandlerBinding] = dict(extra_bindings or {})

    specs = [b for b in topology_doc.get("blocks", []) if isinstance(b, dict)]
    learner_blocks = [b["id"] for b in specs
                      if b.get("kind") == BlockKind.MODEL.value
                      and b["id"] not in bindings]
    for block_id in learner_blocks:
        bindings[block_id] = HandlerBinding(FV, CS, _slot_handler(slots, block_id))

    graph = import_topology(topology_doc, bindings)

    if learner_blocks:
        if dataset is None or len(dataset) == 0:
            raise EmptyDatasetError("model blocks need training data")
        feats = input_feature_map(graph, dataset.schema.feature_names)
        for block_id in learner_blocks:
            spec = graph.spec(block_id)
            learner = spec.config.get("learner")
            if not learner:
                raise SchemaDocumentError(
                    f"model block '{block_id}' has no learner config and no handler")
            names = feats.get(block_id)
            if names is None:
                raise SchemaDocumentError(
                    f"cannot infer the training columns for '{block_id}'; "
                    "it sits downstream of a preprocessor")
            train = (dataset if names == dataset.schema.feature_names
                     else dataset.project(names))
            slots[block_id] = ModelSlot(block_id, _fit_learner(learner, train), train)

    return Registry(graph, bindings, slots=slots, dataset=dataset,
                    trace_capacity=trace_capacity,
                    background_size=background_size, background_seed=background_seed)
