import io

import numpy as np
import pytest

from glassflow.errors import (
    EmptyDatasetError,
    NotBinaryError,
    ParseError,
    SchemaMismatchError,
)
from glassflow.models import (
    Dataset,
    LogRegModel,
    TreeModel,
    fit_logreg,
    fit_tree,
    gen_synthetic,
    load_csv,
    synthetic_risk_score,
    train_test_split,
    write_csv,
)
from glassflow.payloads import FeatureSchema, FeatureVector


def make_dataset(X, labels, feature_names, class_labels, name="t"):
    schema = FeatureSchema(name, tuple(feature_names), tuple(class_labels))
    rows = tuple(FeatureVector(schema.feature_names, tuple(float(v) for v in row),
                               schema.schema_id) for row in X)
    return Dataset(schema, rows, tuple(labels), "test")


def accuracy(model, data):
    probs = model.predict_batch(data.matrix())
    predicted = [data.schema.class_labels[i] for i in probs.argmax(axis=1)]
    return float(np.mean([p == t for p, t in zip(predicted, data.labels)]))


# --- decision tree -------------------------------------------------------------------

def test_tree_fits_xor_at_depth_two():
    X = [(0, 0), (0, 1), (1, 0), (1, 1)] * 4
    labels = ["same", "diff", "diff", "same"] * 4
    data = make_dataset(X, labels, ["a", "b"], ["diff", "same"])
    tree = fit_tree(data, max_depth=2)
    assert accuracy(tree, data) == 1.0
    assert tree.depth() <= 2


def test_tree_depth_limit_respected():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 3))
    labels = ["pos" if x[0] + x[1] * x[2] > 0 else "neg" for x in X]
    data = make_dataset(X, labels, ["a", "b", "c"], ["neg", "pos"])
    for depth in (1, 2, 3):
        assert fit_tree(data, max_depth=depth).depth() <= depth


def test_tree_deterministic_and_round_trips():
    data = gen_synthetic(150, 3)
    t1 = fit_tree(data, max_depth=4, seed=7)
    t2 = fit_tree(data, max_depth=4, seed=7)
    assert t1.nodes == t2.nodes
    clone = TreeModel.from_doc(t1.to_doc())
    X = data.matrix()[:20]
    np.testing.assert_allclose(clone.predict_batch(X), t1.predict_batch(X))


def test_tree_prediction_is_smoothed_leaf_distribution():
    X = [(0,), (0,), (0,), (1,)]
    data = make_dataset(X, ["a", "a", "b", "b"], ["f"], ["a", "b"])
    tree = fit_tree(data, max_depth=1)
    probs = tree.predict_batch(np.array([[0.0], [1.0]]))
    # Laplace alpha=1: (count + 1) / (n + k)
    np.testing.assert_allclose(probs[0], [3 / 5, 2 / 5])
    np.testing.assert_allclose(probs[1], [1 / 3, 2 / 3])
    np.testing.assert_allclose(probs.sum(axis=1), 1.0)


def test_tree_single_class_is_degenerate_single_leaf():
    data = make_dataset([(0,), (1,)], ["a", "a"], ["f"], ["a", "b"])
    tree = fit_tree(data, max_depth=3)
    assert tree.degenerate
    probs = tree.predict_batch(np.array([[5.0]]))[0]
    np.testing.assert_allclose(probs, [3 / 4, 1 / 4])  # smoothing keeps b alive
    assert probs.argmax() == 0


def test_tree_empty_dataset_raises():
    schema = FeatureSchema("s", ("f",), ("a", "b"))
    with pytest.raises(EmptyDatasetError):
        fit_tree(Dataset(schema, (), (), "t"), max_depth=2)


# --- logistic regression -------------------------------------------------------------

def test_logreg_separates_linear_data():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(300, 2))
    labels = ["pos" if 2 * x[0] - x[1] > 0 else "neg" for x in X]
    data = make_dataset(X, labels, ["a", "b"], ["neg", "pos"])
    model = fit_logreg(data, epochs=400)
    assert accuracy(model, data) > 0.95


def test_logreg_loss_non_increasing():
    data = gen_synthetic(250, 9)
    model = fit_logreg(data, learning_rate=0.05, epochs=100)
    losses = np.asarray(model.loss_history)
    assert len(losses) == 101  # initial loss plus one per epoch
    assert np.all(np.diff(losses) <= 1e-12)


def test_logreg_probabilities_form_simplex():
    data = gen_synthetic(120, 4)
    model = fit_logreg(data, epochs=50)
    probs = model.predict_batch(data.matrix())
    assert probs.shape == (120, 2)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
    assert (probs >= 0).all()


def test_logreg_round_trip_and_binary_only():
    data = gen_synthetic(100, 5)
    model = fit_logreg(data, epochs=30)
    clone = LogRegModel.from_doc(model.to_doc())
    X = data.matrix()[:10]
    np.testing.assert_allclose(clone.predict_batch(X), model.predict_batch(X))
    three = make_dataset([(0,), (1,), (2,)], ["a", "b", "c"], ["f"], ["a", "b", "c"])
    with pytest.raises(NotBinaryError):
        fit_logreg(three)


# --- synthetic data and CSV ----------------------------------------------------------

def test_gen_synthetic_deterministic_and_balanced():
    d1 = gen_synthetic(500, 42)
    d2 = gen_synthetic(500, 42)
    assert d1.labels == d2.labels
    np.testing.assert_array_equal(d1.matrix(), d2.matrix())
    counts = {lab: d1.labels.count(lab) for lab in set(d1.labels)}
    assert set(counts) == {"disease", "no_disease"}
    assert min(counts.values()) > 100  # neither class is rare


def test_synthetic_risk_monotone_in_cholesterol():
    base = {"age": 55, "sex": 1, "chest_pain": 2, "resting_bp": 130,
            "cholesterol": 200, "max_hr": 150, "exercise_angina": 0, "oldpeak": 1}
    low = synthetic_risk_score(base)
    high = synthetic_risk_score({**base, "cholesterol": 350})
    assert high > low


def test_csv_round_trip():
    data = gen_synthetic(40, 8)
    buf = io.StringIO()
    write_csv(data, buf)
    loaded = load_csv(io.StringIO(buf.getvalue()))
    assert loaded.schema.feature_names == data.schema.feature_names
    assert loaded.labels == data.labels
    np.testing.assert_allclose(loaded.matrix(), data.matrix())


def test_csv_categorical_one_hot():
    text = "color,size,label\nred,1,a\nblue,2,b\ngreen,3,a\n"
    data = load_csv(io.StringIO(text), categorical=["color"])
    assert data.schema.feature_names == ("color=blue", "color=green", "color=red", "size")
    np.testing.assert_allclose(data.matrix()[0], [0, 0, 1, 1])


def test_csv_two_category_column_stays_single_indicator():
    text = "flag,size,label\nyes,1,a\nno,2,b\n"
    data = load_csv(io.StringIO(text), categorical=["flag"])
    assert data.schema.feature_names == ("flag=yes", "size")


def test_csv_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError) as err:
        load_csv(io.StringIO("a,label\noops,x\n"))
    assert err.value.detail.get("line") == 2
    with pytest.raises(ParseError):
        load_csv(io.StringIO(""))
    with pytest.raises(SchemaMismatchError):
        load_csv(io.StringIO("a,b\n1,2\n"), label_column="nope")
    with pytest.raises(EmptyDatasetError):
        load_csv(io.StringIO("a,label\n"))


def test_train_test_split_is_a_partition():
    data = gen_synthetic(100, 11)
    train, test = train_test_split(data, test_fraction=0.2, seed=7)
    assert len(train.rows) == 80 and len(test.rows) == 20
    seen = {tuple(r.values) for r in train.rows} | {tuple(r.values) for r in test.rows}
    assert len(seen) == len({tuple(r.values) for r in data.rows})
    again = train_test_split(data, test_fraction=0.2, seed=7)
    assert again[1].labels == test.labels
