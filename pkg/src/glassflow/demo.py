"""Bundled heart-risk demo: filter -> splitter -> {tree, logreg} -> aggregator -> guard.

Six blocks, six edges. The filter rejects physically impossible ages, two
ensemble members score the instance, the aggregator folds them into one
decision, and the guard overrides anything with extreme cholesterol.
"""

from __future__ import annotations

from dataclasses import dataclass

from .models import Dataset, gen_synthetic, train_test_split
from .registry import Registry, build_runtime

GUARD_CHOLESTEROL_LIMIT = 400.0


def demo_topology() -> dict:
    return {
        "blocks": [
            {
                "id": "filter_1",
                "kind": "NonGoalFilter",
                "display_name": "Input filter",
                "description": "Rejects instances outside the allowed input region.",
                "input_payload": "FeatureVector",
                "output_payload": "FeatureVector",
                "config": {
                    "rules": [
                        {
                            "id": "age_range",
                            "predicate": {"all": [
                                {"field": "age", "op": "in_range", "value": [0, 120]},
                            ]},
                            "reject_message": "age outside the plausible range [0, 120]",
                        },
                    ],
                },
            },
            {
                "id": "splitter_1",
                "kind": "Splitter",
                "display_name": "Ensemble splitter",
                "description": "Broadcasts the instance to both ensemble members.",
                "input_payload": "FeatureVector",
                "output_payload": "FeatureVector",
                "config": {"mode": "broadcast"},
            },
            {
                "id": "tree_1",
                "kind": "Model",
                "display_name": "Decision tree",
                "description": "CART classifier, depth 4, trained on the heart-risk table.",
                "input_payload": "FeatureVector",
                "output_payload": "ClassScores",
                "config": {"learner": {"type": "tree", "max_depth": 4,
                                       "min_samples_leaf": 1, "seed": 7}},
            },
            {
                "id": "logreg_1",
                "kind": "Model",
                "display_name": "Logistic regression",
                "description": "Binary logistic regression on standardized features.",
                "input_payload": "FeatureVector",
                "output_payload": "ClassScores",
                "config": {"learner": {"type": "logreg", "learning_rate": 0.1,
                                       "epochs": 500, "l2": 1.0, "seed": 11}},
            },
            {
                "id": "agg_1",
                "kind": "Aggregator",
                "display_name": "Ensemble aggregator",
                "description": "Folds both members' scores into one decision; "
                               "weights reflect each member's validation strength.",
                "input_payload": "ClassScores",
                "output_payload": "Decision",
                "config": {"strategy": {"kind": "weighted_mean",
                                        "weights": {"tree_1": 1.0, "logreg_1": 3.0}}},
            },
            {
                "id": "guard_1",
                "kind": "DivineRuleGuard",
                "display_name": "Safety guard",
                "description": "Overrides the decision when a hard rule matches.",
                "input_payload": "Decision",
                "output_payload": "Decision",
                "config": {
                    "rules": [
                        {
                            "id": "extreme_cholesterol",
                            "priority": 10,
                            "condition": {"all": [
                                {"field": "cholesterol", "op": "gt",
                                 "value": GUARD_CHOLESTEROL_LIMIT},
                            ]},
                            "replacement": {"label": "disease", "score": 1.0},
                            "rationale": "cholesterol beyond the hard clinical limit "
                                         "is always flagged",
                        },
                    ],
                },
            },
        ],
        "edges": [
            ["filter_1", "splitter_1"],
            ["splitter_1", "tree_1"],
            ["splitter_1", "logreg_1"],
            ["tree_1", "agg_1"],
            ["logreg_1", "agg_1"],
            ["agg_1", "guard_1"],
        ],
        "entry": "filter_1",
        "exit": "guard_1",
    }


@dataclass(frozen=True)
class DemoBundle:
    registry: Registry
    train: Dataset
    test: Dataset


def build_demo(n_rows: int = 1000, seed: int = 42, *, test_fraction: float = 0.2,
               split_seed: int = 7, trace_capacity: int = 1024) -> DemoBundle:
    """Generate data, split it, train both members, and assemble the runtime."""
    data = gen_synthetic(n_rows, seed)
    train, test = train_test_split(data, test_fraction, split_seed)
    registry = build_runtime(demo_topology(), train, trace_capacity=trace_capacity)
    return DemoBundle(registry=registry, train=train, test=test)
