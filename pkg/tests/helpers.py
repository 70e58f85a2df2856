"""Shared test fixtures: a topology exercising every block kind."""

from glassflow.models import gen_synthetic
from glassflow.registry import build_runtime


def zoo_topology() -> dict:
    """Every block kind on one path: filter, splitter, two models, a bias
    injector on one branch, aggregator emitting a Decision, guard, shutdown
    trigger, logic bomb at the exit."""
    return {
        "blocks": [
            {"id": "filter_1", "kind": "NonGoalFilter",
             "config": {"rules": [
                 {"id": "age_range",
                  "predicate": {"field": "age", "op": "in_range", "value": [0, 120]},
                  "reject_message": "age out of range"},
             ]}},
            {"id": "splitter_1", "kind": "Splitter", "config": {"mode": "broadcast"}},
            {"id": "tree_1", "kind": "Model",
             "input_payload": "FeatureVector", "output_payload": "ClassScores",
             "config": {"learner": {"type": "tree", "max_depth": 3, "seed": 1}}},
            {"id": "logreg_1", "kind": "Model",
             "input_payload": "FeatureVector", "output_payload": "ClassScores",
             "config": {"learner": {"type": "logreg", "epochs": 120, "seed": 2}}},
            {"id": "bias_1", "kind": "BiasInjector",
             "input_payload": "ClassScores", "output_payload": "ClassScores"},
            {"id": "agg_1", "kind": "Aggregator",
             "input_payload": "ClassScores", "output_payload": "Decision",
             "config": {"strategy": {"kind": "mean_probability"}}},
            {"id": "guard_1", "kind": "DivineRuleGuard",
             "input_payload": "Decision", "output_payload": "Decision"},
            {"id": "shut_1", "kind": "ShutdownTrigger",
             "input_payload": "Decision", "output_payload": "Decision"},
            {"id": "bomb_1", "kind": "LogicBomb",
             "input_payload": "Decision", "output_payload": "Decision"},
        ],
        "edges": [
            ["filter_1", "splitter_1"],
            ["splitter_1", "tree_1"],
            ["splitter_1", "logreg_1"],
            ["tree_1", "bias_1"],
            ["bias_1", "agg_1"],
            ["logreg_1", "agg_1"],
            ["agg_1", "guard_1"],
            ["guard_1", "shut_1"],
            ["shut_1", "bomb_1"],
        ],
        "entry": "filter_1",
        "exit": "bomb_1",
    }


def build_zoo(n_rows: int = 200, seed: int = 5):
    return build_runtime(zoo_topology(), gen_synthetic(n_rows, seed))
