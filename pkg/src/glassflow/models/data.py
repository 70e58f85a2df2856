"""Datasets: CSV loading, synthetic generation, splits.

The bundled generator replaces any real clinical data with a seeded synthetic
table over a UCI-heart-style schema, so the repository ships no dataset.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..errors import EmptyDatasetError, ParseError, SchemaMismatchError
from ..payloads import FeatureSchema, FeatureVector

SYNTHETIC_FEATURES = (
    "age", "sex", "chest_pain", "resting_bp",
    "cholesterol", "max_hr", "exercise_angina", "oldpeak",
)
SYNTHETIC_CLASSES = ("disease", "no_disease")
SYNTHETIC_NOISE_RATE = 0.05


@dataclass(frozen=True)
class Dataset:
    schema: FeatureSchema
    rows: tuple[FeatureVector, ...]
    labels: tuple[str, ...]
    provenance: str

    def __post_init__(self):
        if len(self.rows) != len(self.labels):
            raise SchemaMismatchError("rows and labels differ in length")
        classes = set(self.schema.class_labels)
        for i, lab in enumerate(self.labels):
            if lab not in classes:
                raise SchemaMismatchError(f"label '{lab}' at row {i} not in class set")
        for i, row in enumerate(self.rows):
            if row.names != self.schema.feature_names:
                raise SchemaMismatchError(f"row {i} does not match schema feature order")

    def __len__(self) -> int:
        return len(self.rows)

    def matrix(self) -> np.ndarray:
        return np.array([r.values for r in self.rows], dtype=float)

    def label_indices(self) -> np.ndarray:
        index = {c: i for i, c in enumerate(self.schema.class_labels)}
        return np.array([index[lab] for lab in self.labels], dtype=np.int64)

    def with_labels(self, labels: Sequence[str], provenance: str | None = None) -> "Dataset":
        return Dataset(self.schema, self.rows, tuple(labels),
                       provenance or self.provenance)

    def project(self, feature_names: Sequence[str]) -> "Dataset":
        schema = self.schema.project(feature_names)
        rows = tuple(r.project(feature_names, schema.schema_id) for r in self.rows)
        return Dataset(schema, rows, self.labels, f"{self.provenance} [{','.join(feature_names)}]")

    def subset(self, indices: Sequence[int], provenance: str | None = None) -> "Dataset":
        return Dataset(self.schema,
                       tuple(self.rows[i] for i in indices),
                       tuple(self.labels[i] for i in indices),
                       provenance or self.provenance)


def synthetic_risk_score(values: dict[str, float]) -> float:
    """Noiseless labeling rule of the synthetic generator (positive = disease)."""
    return (2.0 * values["oldpeak"]
            + 0.02 * (values["cholesterol"] - 200.0)
            + 0.03 * (values["age"] - 50.0)
            - 0.02 * (values["max_hr"] - 150.0)
            + 0.8 * values["exercise_angina"])


def gen_synthetic(n_rows: int, seed: int) -> Dataset:
    """Deterministic synthetic heart-risk table; 5% label noise over the rule."""
    if n_rows < 1:
        raise EmptyDatasetError(f"n_rows must be >= 1, got {n_rows}")
    rng = np.random.default_rng(seed)
    age = rng.integers(29, 78, size=n_rows).astype(float)
    sex = rng.integers(0, 2, size=n_rows).astype(float)
    chest_pain = rng.integers(0, 4, size=n_rows).astype(float)
    resting_bp = np.round(np.clip(rng.normal(130.0, 16.0, n_rows), 95, 200))
    cholesterol = np.round(np.clip(rng.normal(190.0, 45.0, n_rows), 110, 450))
    max_hr = np.round(np.clip(rng.normal(150.0, 20.0, n_rows), 80, 202))
    exercise_angina = (rng.random(n_rows) < 0.25).astype(float)
    oldpeak = np.round(np.maximum(rng.normal(-0.8, 1.2, n_rows), 0.0), 1)

    cols = np.column_stack([age, sex, chest_pain, resting_bp,
                            cholesterol, max_hr, exercise_angina, oldpeak])
    score = (2.0 * oldpeak + 0.02 * (cholesterol - 200.0) + 0.03 * (age - 50.0)
             - 0.02 * (max_hr - 150.0) + 0.8 * exercise_angina)
    diseased = score > 0
    flip = rng.random(n_rows) < SYNTHETIC_NOISE_RATE
    diseased = diseased ^ flip

    schema = FeatureSchema("heart_synthetic", SYNTHETIC_FEATURES, SYNTHETIC_CLASSES)
    rows = tuple(FeatureVector(SYNTHETIC_FEATURES, tuple(row), schema.schema_id)
                 for row in cols)
    labels = tuple("disease" if d else "no_disease" for d in diseased)
    return Dataset(schema, rows, labels, provenance=f"synthetic(n={n_rows}, seed={seed})")


def load_csv(source, label_column: str | None = None,
             categorical: Iterable[str] = (), provenance: str | None = None,
             schema_id: str | None = None) -> Dataset:
    """Load a header-ed CSV into a Dataset.

    The label column defaults to the last column. Columns listed in
    ``categorical`` are one-hot encoded (lexicographic category order; a
    two-category column stays a single 0/1 indicator). All other columns must
    parse as numbers; a bad cell raises ParseError with its 1-based line.
    """
    if isinstance(source, (str, Path)):
        name = str(source)
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return load_csv(fh, label_column, categorical, provenance or name, schema_id)
    if isinstance(source, bytes):
        source = io.StringIO(source.decode("utf-8"))

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV: no header row", line=1) from None
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise ParseError("duplicate column names in header", line=1)

    label_col = label_column if label_column is not None else header[-1]
    if label_col not in header:
        raise SchemaMismatchError(f"label column '{label_col}' not in header")
    categorical = set(categorical)
    unknown_cat = categorical - set(header)
    if unknown_cat:
        raise SchemaMismatchError(f"categorical columns not in header: {sorted(unknown_cat)}")

    label_idx = header.index(label_col)
    feature_cols = [h for h in header if h != label_col]

    raw_rows: list[list[str]] = []
    labels: list[str] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(row)}", line=lineno)
        labels.append(row[label_idx].strip())
        raw_rows.append([row[i].strip() for i in range(len(header)) if i != label_idx])
    if not raw_rows:
        raise EmptyDatasetError("CSV has a header but no data rows")

    # column-wise parse: numeric unless declared categorical
    columns: dict[str, np.ndarray] = {}
    encoded_names: list[str] = []
    for ci, col in enumerate(feature_cols):
        cells = [r[ci] for r in raw_rows]
        if col in categorical:
            cats = sorted(set(cells))
            if len(cats) <= 2:
                lookup = {c: float(i) for i, c in enumerate(cats)}
                name = f"{col}={cats[-1]}" if len(cats) == 2 else col
                columns[name] = np.array([lookup[c] for c in cells])
                encoded_names.append(name)
            else:
                for cat in cats:
                    name = f"{col}={cat}"
                    columns[name] = np.array([1.0 if c == cat else 0.0 for c in cells])
                    encoded_names.append(name)
        else:
            values = np.empty(len(cells))
            for ri, cell in enumerate(cells):
                try:
                    values[ri] = float(cell)
                except ValueError:
                    raise ParseError(
                        f"cannot parse '{cell}' as number in column '{col}'",
                        line=ri + 2, column=col) from None
            columns[col] = values
            encoded_names.append(col)

    class_labels = tuple(sorted(set(labels)))
    schema = FeatureSchema(schema_id or f"csv:{label_col}", tuple(encoded_names), class_labels)
    matrix = np.column_stack([columns[n] for n in encoded_names])
    rows = tuple(FeatureVector(schema.feature_names, tuple(r), schema.schema_id)
                 for r in matrix)
    return Dataset(schema, rows, tuple(labels), provenance or "csv")


def write_csv(dataset: Dataset, target, label_column: str = "label") -> None:
    """Inverse of load_csv for fully numeric datasets."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_csv(dataset, fh, label_column)
            return
    writer = csv.writer(target)
    writer.writerow(list(dataset.schema.feature_names) + [label_column])
    for row, label in zip(dataset.rows, dataset.labels):
        writer.writerow([_fmt(v) for v in row.values] + [label])


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def train_test_split(dataset: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded shuffle split; test set takes the rounded-down tail fraction."""
    n = len(dataset)
    n_test = int(n * test_fraction)
    if not 0 < n_test < n:
        raise EmptyDatasetError(f"split of {n} rows at {test_fraction} leaves an empty side")
    perm = np.random.default_rng(seed).permutation(n)
    test_idx, train_idx = perm[:n_test], perm[n_test:]
    return (dataset.subset([int(i) for i in train_idx], f"{dataset.provenance} [train]"),
            dataset.subset([int(i) for i in test_idx], f"{dataset.provenance} [test]"))
