import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from credit_ensemble.bayes import (
    normalize_log_joint,
    posterior,
    posterior_batch,
    predict_bayes,
    predict_bayes_batch,
    train_bayes,
)
from credit_ensemble.dataset import NEGATIVE, POSITIVE, Attribute, Dataset, FeatureSchema, Instance
from credit_ensemble.errors import MissingClass

SCHEMA = FeatureSchema((
    Attribute("amount"),
    Attribute("purpose", ("A", "B", "C")),
    Attribute("age"),
    Attribute("housing", ("own", "rent")),
))
ROWS = [
    [1.0, "A", 20.0, "own"],
    [2.0, "A", 30.0, "own"],
    [4.0, "B", 40.0, "rent"],
    [5.0, "C", 25.0, "rent"],
    [7.0, "C", 35.0, "rent"],
    [9.0, "B", 45.0, "own"],
]
LABELS = [1, 1, 1, 0, 0, 0]

# hand computed from ROWS (population variance):
#   POSITIVE rows 1-3: amount mean 7/3, var 14/9; age mean 30, var 200/3
#   NEGATIVE rows 4-6: amount mean 7, var 8/3;   age mean 35, var 200/3
#   purpose counts POS (2,1,0) NEG (0,1,2) -> (c+1)/6
#   housing counts POS (2,1)   NEG (1,2)   -> (c+1)/5
HAND = {
    POSITIVE: {"amount": (7 / 3, 14 / 9), "age": (30.0, 200 / 3),
               "purpose": (3 / 6, 2 / 6, 1 / 6), "housing": (3 / 5, 2 / 5)},
    NEGATIVE: {"amount": (7.0, 8 / 3), "age": (35.0, 200 / 3),
               "purpose": (1 / 6, 2 / 6, 3 / 6), "housing": (2 / 5, 3 / 5)},
}


def toy():
    return Dataset.from_rows(SCHEMA, ROWS, LABELS)


def gauss(x, mean, var):
    return math.exp(-((x - mean) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)


def direct_posterior(values):
    """Bayes rule as a plain product of hand-tabulated likelihoods."""
    amount, purpose, age, housing = values
    joint = {}
    for c in (POSITIVE, NEGATIVE):
        h = HAND[c]
        p = 0.5
        p *= gauss(amount, *h["amount"])
        p *= h["purpose"][("A", "B", "C").index(purpose)]
        p *= gauss(age, *h["age"])
        p *= h["housing"][("own", "rent").index(housing)]
        joint[c] = p
    total = joint[POSITIVE] + joint[NEGATIVE]
    return joint[POSITIVE] / total, joint[NEGATIVE] / total


def test_priors_balanced():
    d = Dataset.from_rows(SCHEMA, ROWS[1:5], [1, 1, 0, 0])
    np.testing.assert_array_equal(train_bayes(d).priors, [0.5, 0.5])


def test_laplace_on_unseen_code():
    schema = FeatureSchema((Attribute("c", ("x", "y")),))
    d = Dataset.from_rows(schema, [["x"]] * 4, [1, 1, 1, 0])
    table = train_bayes(d).categorical_tables[0]
    np.testing.assert_allclose(table[0], [4 / 5, 1 / 5], rtol=0, atol=1e-15)


def test_moments_match_hand_table():
    model = train_bayes(toy())
    for j, name in ((0, "amount"), (2, "age")):
        means, variances = model.numeric_params[j]
        for k, c in enumerate((POSITIVE, NEGATIVE)):
            assert means[k] == pytest.approx(HAND[c][name][0], abs=1e-12)
            assert variances[k] == pytest.approx(HAND[c][name][1], abs=1e-12)
    for j, name in ((1, "purpose"), (3, "housing")):
        for k, c in enumerate((POSITIVE, NEGATIVE)):
            np.testing.assert_allclose(model.categorical_tables[j][k], HAND[c][name], rtol=0, atol=1e-15)


def test_model_invariants():
    model = train_bayes(toy(), variance_floor=2.0)
    assert model.priors.sum() == pytest.approx(1.0, abs=1e-12)
    for table in model.categorical_tables.values():
        np.testing.assert_allclose(table.sum(axis=1), 1.0, rtol=0, atol=1e-12)
    for _, variances in model.numeric_params.values():
        assert (variances >= 2.0).all()


def test_variance_floor_for_constant_column():
    schema = FeatureSchema((Attribute("x"),))
    d = Dataset.from_rows(schema, [[3.0], [3.0], [1.0], [2.0]], [1, 1, 0, 0])
    _, variances = train_bayes(d).numeric_params[0]
    assert variances[0] == 1e-9


def test_missing_class():
    d = Dataset.from_rows(SCHEMA, ROWS[:3], [1, 1, 1])
    with pytest.raises(MissingClass):
        train_bayes(d)


TEST_INSTANCES = [
    [1.5, "A", 22.0, "own"], [8.0, "C", 44.0, "rent"], [4.5, "B", 33.0, "own"],
    [3.0, "C", 28.0, "rent"], [6.0, "A", 39.0, "own"], [0.0, "B", 50.0, "rent"],
    [10.0, "A", 18.0, "own"], [5.0, "B", 31.0, "rent"], [2.5, "C", 41.0, "own"],
    [7.5, "A", 26.0, "rent"],
]


@pytest.mark.parametrize("values", TEST_INSTANCES)
def test_posterior_matches_direct_product(values):
    model = train_bayes(toy())
    got = posterior(model, Instance(tuple(values), POSITIVE))
    expected = direct_posterior(values)
    assert abs(got[0] - expected[0]) <= 1e-12
    assert abs(got[1] - expected[1]) <= 1e-12


def test_uninformative_instance_returns_priors():
    schema = FeatureSchema((Attribute("x"), Attribute("c", ("a", "b"))))
    rows = [[0.0, "a"], [2.0, "b"], [0.0, "a"], [2.0, "b"], [0.0, "b"]]
    d = Dataset.from_rows(schema, rows[:4] + [[1.0, "a"], [1.0, "b"]], [1, 1, 0, 0, 1, 0])
    model = train_bayes(d)
    # identical class-conditional tables: override with shared parameters
    shared_num = {0: (np.array([1.0, 1.0]), np.array([0.5, 0.5]))}
    shared_cat = {1: np.array([[0.4, 0.6], [0.4, 0.6]])}
    model = replace(model, numeric_params=shared_num, categorical_tables=shared_cat,
                    priors=np.array([0.3, 0.7]))
    p = posterior(model, Instance((0.7, "b"), 1))
    assert p == pytest.approx((0.3, 0.7), abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-50, 50), b=st.floats(-50, 50), shift=st.floats(-100, 100))
def test_normalization_invariance(a, b, shift):
    logs = np.array([a, b])
    base = normalize_log_joint(logs)
    np.testing.assert_allclose(base.sum(), 1.0, rtol=0, atol=1e-12)
    np.testing.assert_allclose(normalize_log_joint(logs + math.log(2.0)), base, rtol=0, atol=1e-12)
    np.testing.assert_allclose(normalize_log_joint(logs + shift), base, rtol=0, atol=1e-12)


def test_extreme_evidence_does_not_underflow():
    model = train_bayes(toy())
    p = posterior(model, Instance((1e4, "A", -1e4, "own"), 1))
    assert all(np.isfinite(p)) and sum(p) == pytest.approx(1.0)


def test_predict_examples():
    model = train_bayes(toy())
    pos_model = replace(model, priors=np.array([0.7, 0.3]), numeric_params={
        j: (np.zeros(2), np.ones(2)) for j in model.numeric_params
    }, categorical_tables={j: np.full_like(t, 1 / t.shape[1]) for j, t in model.categorical_tables.items()})
    inst = Instance((0.0, "A", 0.0, "own"), 1)
    assert posterior(pos_model, inst) == pytest.approx((0.7, 0.3))
    assert predict_bayes(pos_model, inst) == POSITIVE
    tie = replace(pos_model, priors=np.array([0.5, 0.5]))
    assert posterior(tie, inst) == (0.5, 0.5)
    assert predict_bayes(tie, inst) == POSITIVE


def test_predict_matches_posterior_argmax():
    model = train_bayes(toy())
    rng = np.random.default_rng(0)
    insts = [
        Instance((float(rng.uniform(0, 10)), str(rng.choice(["A", "B", "C"])),
                  float(rng.uniform(15, 50)), str(rng.choice(["own", "rent"]))), 1)
        for _ in range(100)
    ]
    expected = []
    for inst in insts:
        p_pos, p_neg = posterior(model, inst)
        expected.append(POSITIVE if p_pos >= p_neg else NEGATIVE)
    assert [predict_bayes(model, i) for i in insts] == expected
    d = Dataset.from_rows(SCHEMA, [list(i.values) for i in insts], [1] * 100)
    np.testing.assert_array_equal(predict_bayes_batch(model, d), expected)
    batch = posterior_batch(model, d)
    np.testing.assert_array_equal(batch, [posterior(model, i) for i in insts])


def test_unknown_code_uses_smoothed_floor():
    model = train_bayes(toy())
    p = posterior(model, Instance((4.0, "Z", 30.0, "own"), 1))
    # an unknown purpose contributes 1/(n_c + 3) = 1/6 for both classes
    without = Dataset.from_rows(
        FeatureSchema((SCHEMA.attributes[0], SCHEMA.attributes[2], SCHEMA.attributes[3])),
        [[r[0], r[2], r[3]] for r in ROWS], LABELS,
    )
    q = posterior(train_bayes(without), Instance((4.0, 30.0, "own"), 1))
    assert p == pytest.approx(q, abs=1e-12)
