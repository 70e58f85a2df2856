"""Tool manifest: every externally useful route as an LLM-callable descriptor.

The manifest is regenerated from the registry on each request, so it always
mirrors the live graph. Conventions an executor relies on: `{placeholders}`
in the path are filled from arguments; leftover arguments become the JSON
body on POST/PUT and query parameters on GET/DELETE.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from ..graph import BlockKind
from ..registry import Registry

API_PREFIX = "/api/v1"

PROBE_RULE_ID = "probe_rule"


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    description: str
    parameters: dict
    http: dict  # {"method": ..., "path": ...}
    block_id: str | None = None
    example_arguments: dict = field(default_factory=dict)

    def to_doc(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "parameters": self.parameters,
            "http": dict(self.http),
            "block_id": self.block_id,
            "example_arguments": dict(self.example_arguments),
        }


def _slug(block_id: str) -> str:
    return re.sub(r"[^a-z0-9_]", "_", block_id.lower())


def _obj(properties: dict, required: Sequence[str] = ()) -> dict:
    return {
        "type": "object",
        "properties": properties,
        "required": list(required),
        "additionalProperties": False,
    }


def _features_schema(names: Sequence[str]) -> dict:
    return _obj({n: {"type": "number"} for n in names}, required=names)


def _example_instance(registry: Registry) -> dict[str, float]:
    if registry.dataset is not None and len(registry.dataset):
        return registry.dataset.rows[0].to_dict()
    names = registry.entry_feature_names() or ()
    return {n: 0.0 for n in names}


def generate_tool_manifest(registry: Registry) -> list[ToolDescriptor]:
    schema = registry.schema
    feature_names = schema.feature_names if schema else ()
    class_labels = list(schema.class_labels) if schema else []
    instance = _example_instance(registry)
    features_schema = _features_schema(feature_names)
    tools: list[ToolDescriptor] = []

    def add(name, description, parameters, method, path, block_id=None, example=None):
        tools.append(ToolDescriptor(
            name=name, description=description, parameters=parameters,
            http={"method": method, "path": f"{API_PREFIX}{path}"},
            block_id=block_id, example_arguments=example or {}))

    add("get_graph", "Fetch the pipeline topology: blocks, edges, entry, exit.",
        _obj({}), "GET", "/graph")
    add("execute_pipeline",
        "Run one instance through the whole pipeline and return the outcome "
        "with a trace reference.",
        _obj({"features": features_schema,
              "dry_run": {"type": "boolean", "default": False}},
             required=["features"]),
        "POST", "/pipeline/execute", example={"features": instance})
    add("whatif_pipeline",
        "Re-run an instance with some features overridden (dry run, no side "
        "effects) and return the would-be scores and decision.",
        _obj({"base": features_schema,
              "overrides": {"type": "object",
                            "additionalProperties": {"type": "number"}}},
             required=["base"]),
        "POST", "/pipeline/whatif", example={"base": instance, "overrides": {}})
    add("list_trace",
        "List recorded runs, or the ordered events of one run via run_id.",
        _obj({"run_id": {"type": "string"}}), "GET", "/trace")

    explain_params = _obj(
        {"features": features_schema,
         "target_class": {"type": "string", "enum": class_labels or None},
         "seed": {"type": "integer", "default": 0},
         "n_samples": {"type": ["integer", "string"],
                       "description": "sample count, or 'exhaustive' for shap"}},
        required=["features"])
    if not class_labels:
        explain_params["properties"]["target_class"].pop("enum")

    for spec in registry.graph.blocks_of_kind(BlockKind.MODEL):
        sid = _slug(spec.id)
        blurb = spec.description or spec.display_name or spec.id
        add(f"predict_{sid}", f"Class probabilities from this model. {blurb}",
            _obj({"features": features_schema}, required=["features"]),
            "POST", f"/blocks/{spec.id}/predict", spec.id,
            example={"features": instance})
        for method, label in (("lime", "local surrogate (LIME)"),
                              ("shap", "KernelSHAP attribution"),
                              ("exact_shapley", "exact Shapley attribution")):
            add(f"explain_{method}_{sid}",
                f"Per-feature attribution via {label}. {blurb}",
                explain_params, "POST", f"/blocks/{spec.id}/explain/{method}", spec.id,
                example={"features": instance, "seed": 0,
                         **({"n_samples": 64} if method == "shap" else {})})
        add(f"retrain_{sid}",
            f"Refit this model after relabeling training rows. {blurb}",
            _obj({"relabels": {"type": "array", "items": _obj(
                      {"row_index": {"type": "integer"},
                       "new_label": {"type": "string"},
                       "old_label": {"type": "string"}},
                      required=["row_index", "new_label"])},
                  "author": {"type": "string"}},
                 required=["relabels"]),
            "POST", f"/blocks/{spec.id}/retrain", spec.id,
            example={"relabels": [], "author": "probe"})
        add(f"list_training_{sid}",
            f"Read a slice of this model's training rows with current labels. {blurb}",
            _obj({"offset": {"type": "integer", "default": 0},
                  "limit": {"type": "integer", "default": 20}}),
            "GET", f"/blocks/{spec.id}/training", spec.id,
            example={"offset": 0, "limit": 5})

    rule_kinds = (BlockKind.NONGOAL_FILTER, BlockKind.DIVINE_RULE_GUARD)
    for kind in rule_kinds:
        for spec in registry.graph.blocks_of_kind(kind):
            sid = _slug(spec.id)
            is_filter = kind == BlockKind.NONGOAL_FILTER
            noun = "input filter" if is_filter else "decision guard"
            add(f"list_rules_{sid}", f"List the rules of this {noun}.",
                _obj({}), "GET", f"/blocks/{spec.id}/rules", spec.id)
            if is_filter:
                rule_props = {
                    "rule_id": {"type": "string"},
                    "predicate": {"type": "object"},
                    "reject_message": {"type": "string"},
                }
                example_rule = {
                    "rule_id": PROBE_RULE_ID,
                    "predicate": {"all": [{"field": feature_names[0],
                                           "op": "ge", "value": -1e12}]}
                    if feature_names else {"all": []},
                    "reject_message": "probe rule, admits everything",
                }
            else:
                rule_props = {
                    "rule_id": {"type": "string"},
                    "priority": {"type": "integer"},
                    "condition": {"type": "object"},
                    "replacement": {"type": "object"},
                    "rationale": {"type": "string"},
                }
                example_rule = {
                    "rule_id": PROBE_RULE_ID,
                    "priority": 999999,
                    "condition": {"all": [{"field": "decision.score",
                                           "op": "lt", "value": 0.0}]},
                    "replacement": {"label": class_labels[0] if class_labels else "",
                                    "score": 1.0},
                    "rationale": "probe rule, never matches",
                }
            add(f"put_rule_{sid}", f"Create or replace one rule on this {noun}.",
                _obj(rule_props, required=list(rule_props)),
                "PUT", f"/blocks/{spec.id}/rules/{{rule_id}}", spec.id,
                example=example_rule)
            add(f"delete_rule_{sid}", f"Delete one rule from this {noun}.",
                _obj({"rule_id": {"type": "string"}}, required=["rule_id"]),
                "DELETE", f"/blocks/{spec.id}/rules/{{rule_id}}", spec.id,
                example={"rule_id": PROBE_RULE_ID})

    for spec in registry.graph.blocks_of_kind(BlockKind.BIAS_INJECTOR):
        sid = _slug(spec.id)
        add(f"get_offsets_{sid}", "Read this bias injector's per-class offsets.",
            _obj({}), "GET", f"/blocks/{spec.id}/offsets", spec.id)
        add(f"set_offsets_{sid}",
            "Replace this bias injector's per-class log-space offsets.",
            _obj({"offsets": {"type": "object",
                              "additionalProperties": {"type": "number"}},
                  "active": {"type": "boolean"},
                  "rationale": {"type": "string"}},
                 required=["offsets"]),
            "PUT", f"/blocks/{spec.id}/offsets", spec.id,
            example=registry.get_bias(spec.id))

    for spec in registry.graph.blocks_of_kind(BlockKind.LOGIC_BOMB):
        sid = _slug(spec.id)
        add(f"get_predicate_{sid}", "Read this fail-safe's boundary predicate.",
            _obj({}), "GET", f"/blocks/{spec.id}/predicate", spec.id)
        add(f"set_predicate_{sid}",
            "Replace the boundary predicate that resets and halts the system.",
            _obj({"expression": {"type": "object"}}, required=["expression"]),
            "PUT", f"/blocks/{spec.id}/predicate", spec.id,
            example={"expression": registry.get_predicate(spec.id)["expression"]})

    for spec in registry.graph.blocks_of_kind(BlockKind.AGGREGATOR):
        sid = _slug(spec.id)
        add(f"get_strategy_{sid}", "Read this aggregator's combination strategy.",
            _obj({}), "GET", f"/blocks/{spec.id}/strategy", spec.id)
        add(f"set_strategy_{sid}",
            "Replace the aggregation strategy (majority_vote, mean_probability, "
            "or weighted_mean with per-branch weights).",
            _obj({"kind": {"type": "string",
                           "enum": ["majority_vote", "mean_probability",
                                    "weighted_mean"]},
                  "weights": {"type": "object",
                              "additionalProperties": {"type": "number"}}},
                 required=["kind"]),
            "PUT", f"/blocks/{spec.id}/strategy", spec.id,
            example=registry.get_strategy(spec.id))

    # the kill switch pair goes last so replaying the manifest in order
    # leaves the flag cleared
    add("trigger_shutdown",
        "EMERGENCY STOP: halt all pipeline execution until cleared.",
        _obj({"reason": {"type": "string"}, "author": {"type": "string"}},
             required=["reason"]),
        "POST", "/control/shutdown", example={"reason": "probe", "author": "probe"})
    add("clear_shutdown", "Clear the emergency stop and resume execution.",
        _obj({"author": {"type": "string"}}), "POST", "/control/clear",
        example={"author": "probe"})

    names = [t.name for t in tools]
    assert len(names) == len(set(names)), "tool names must be unique"
    return tools
