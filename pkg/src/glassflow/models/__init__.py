from .data import (
    Dataset,
    SYNTHETIC_CLASSES,
    SYNTHETIC_FEATURES,
    SYNTHETIC_NOISE_RATE,
    gen_synthetic,
    load_csv,
    synthetic_risk_score,
    train_test_split,
    write_csv,
)
from .logreg import LogRegModel, Training, fit_logreg
from .retrain import Model, RelabelRecord, apply_relabels, retrain_with_relabels
from .tree import TreeModel, TreeNode, fit_tree

__all__ = [
    "Dataset", "SYNTHETIC_CLASSES", "SYNTHETIC_FEATURES", "SYNTHETIC_NOISE_RATE",
    "gen_synthetic", "load_csv", "synthetic_risk_score", "train_test_split",
    "write_csv", "LogRegModel", "Training", "fit_logreg", "Model",
    "RelabelRecord", "apply_relabels", "retrain_with_relabels",
    "TreeModel", "TreeNode", "fit_tree",
]


def model_from_doc(doc: dict) -> Model:
    kind = doc.get("type")
    if kind == "tree":
        return TreeModel.from_doc(doc)
    if kind == "logreg":
        return LogRegModel.from_doc(doc)
    raise ValueError(f"unknown model document type: {kind!r}")
