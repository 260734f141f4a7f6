import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from credit_ensemble.dataset import NEGATIVE, POSITIVE
from credit_ensemble.errors import DimensionMismatch, NonFiniteUpdate
from credit_ensemble.mlp import (
    LOGISTIC,
    TANH,
    MlpConfig,
    MlpModel,
    _online_epoch,
    _online_epoch_one_hidden,
    default_hidden_layout,
    forward,
    gradient,
    init_params,
    n_params,
    predict,
    predict_batch,
    scores,
    train_mlp,
)


def sigmoid(z):
    return 1.0 / (1.0 + math.exp(-z))


def random_model(sizes, activation, rng, scale=1.0):
    params = rng.uniform(-scale, scale, n_params(sizes))
    return MlpModel.from_flat(params, sizes, activation)


def zero_model(sizes, activation):
    return MlpModel.from_flat(np.zeros(n_params(sizes)), sizes, activation)


def loss(model, x, t):
    return 0.5 * (t - forward(model, x)) ** 2


def finite_difference(model, x, t, h=1e-5):
    sizes, act = model.sizes, model.activation
    p = model.flat_params()
    out = np.empty_like(p)
    for i in range(len(p)):
        up, down = p.copy(), p.copy()
        up[i] += h
        down[i] -= h
        out[i] = (loss(MlpModel.from_flat(up, sizes, act), x, t)
                  - loss(MlpModel.from_flat(down, sizes, act), x, t)) / (2 * h)
    return out


def relative_error(a, b):
    return np.abs(a - b) / np.maximum(1e-8, np.abs(a) + np.abs(b))


# -- config -----------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    {"learning_rate": 0.0}, {"learning_rate": 1.5}, {"epochs": 0},
    {"hidden_layout": (3, 0)}, {"activation": "relu"}, {"weight_init_range": -1},
])
def test_config_preconditions(kwargs):
    with pytest.raises(ValueError):
        MlpConfig(**kwargs)


def test_default_hidden_width():
    assert default_hidden_layout(61) == (31,)
    assert default_hidden_layout(100) == (32,)
    assert default_hidden_layout(4) == (3,)


def test_model_rejects_broken_chain():
    w = (np.zeros((3, 2)), np.zeros((3, 1)))
    b = (np.zeros(2), np.zeros(1))
    with pytest.raises(ValueError):
        MlpModel(w, b, LOGISTIC)
    with pytest.raises(ValueError):
        MlpModel((np.zeros((3, 2)),), (np.zeros(2),), LOGISTIC)


# -- forward / predict ------------------------------------------------------

def test_zero_network_scores():
    x = np.random.default_rng(0).random(5)
    assert forward(zero_model((5, 3, 1), LOGISTIC), x) == 0.5
    assert forward(zero_model((5, 3, 1), TANH), x) == 0.0


def test_nested_logistic_by_hand():
    model = MlpModel.from_flat(np.ones(4), (1, 1, 1), LOGISTIC)
    assert forward(model, [0.0]) == pytest.approx(sigmoid(sigmoid(1.0) + 1.0), abs=1e-15)


def test_width_mismatch():
    model = zero_model((3, 2, 1), LOGISTIC)
    with pytest.raises(DimensionMismatch):
        forward(model, [0.0, 1.0])
    with pytest.raises(DimensionMismatch):
        gradient(model, [0.0], 1.0)
    with pytest.raises(DimensionMismatch):
        train_mlp(np.zeros((2, 3)), [1, 0, 1], MlpConfig(epochs=1))


def test_predict_boundaries():
    assert predict(zero_model((2, 2, 1), LOGISTIC), [0.3, 0.9]) == POSITIVE
    model = MlpModel((np.zeros((1, 1)),), (np.array([-0.31]),), TANH)
    assert forward(model, [0.0]) == pytest.approx(math.tanh(-0.31))
    assert predict(model, [0.0]) == NEGATIVE


@pytest.mark.parametrize("activation", [LOGISTIC, TANH])
def test_predict_matches_thresholded_forward(activation):
    rng = np.random.default_rng(5)
    model = random_model((6, 4, 1), activation, rng, scale=2.0)
    X = rng.random((100, 6))
    mid = 0.5 if activation == LOGISTIC else 0.0
    expected = [POSITIVE if forward(model, x) >= mid else NEGATIVE for x in X]
    assert [predict(model, x) for x in X] == expected
    np.testing.assert_array_equal(predict_batch(model, X), expected)


@settings(max_examples=50, deadline=None)
@given(
    x=arrays(np.float64, 4, elements=st.floats(-1e6, 1e6)),
    seed=st.integers(0, 1000),
    activation=st.sampled_from([LOGISTIC, TANH]),
)
def test_output_range(x, seed, activation):
    model = random_model((4, 3, 1), activation, np.random.default_rng(seed), scale=1e-3)
    s = forward(model, x)
    if activation == LOGISTIC:
        assert 0.0 < s < 1.0
    else:
        assert -1.0 < s < 1.0


# -- gradient ---------------------------------------------------------------

def test_gradient_zero_error():
    model = zero_model((3, 2, 1), LOGISTIC)
    g = gradient(model, [0.2, 0.4, 0.6], 0.5)
    np.testing.assert_array_equal(g, 0.0)


def test_gradient_single_unit_by_hand():
    w, b, x, t = 0.7, -0.2, 0.9, 1.0
    model = MlpModel((np.array([[w]]),), (np.array([b]),), LOGISTIC)
    y = sigmoid(w * x + b)
    g = gradient(model, [x], t)
    assert g[0] == pytest.approx(-(t - y) * y * (1 - y) * x, rel=1e-14)
    assert g[1] == pytest.approx(-(t - y) * y * (1 - y), rel=1e-14)


@pytest.mark.parametrize("activation", [LOGISTIC, TANH])
def test_gradient_531_finite_differences(activation):
    rng = np.random.default_rng(11)
    model = random_model((5, 3, 1), activation, rng)
    x = rng.random(5)
    t = 1.0 if activation == LOGISTIC else -1.0
    err = relative_error(gradient(model, x, t), finite_difference(model, x, t))
    assert err.max() < 1e-4


def test_gradient_two_hidden_layers():
    rng = np.random.default_rng(12)
    model = random_model((4, 3, 2, 1), TANH, rng)
    x = rng.random(4)
    err = relative_error(gradient(model, x, 1.0), finite_difference(model, x, 1.0))
    assert err.max() < 1e-4


# -- training ---------------------------------------------------------------

def test_single_step_delta_rule_by_hand():
    X = np.array([[0.3, 0.8]])
    cfg = MlpConfig(hidden_layout=(2,), epochs=1, learning_rate=0.7, seed=9)
    sizes = (2, 2, 1)
    p0 = init_params(sizes, cfg, np.random.default_rng(cfg.seed))
    W1, b1 = p0[:4].reshape(2, 2), p0[4:6]
    W2, b2 = p0[6:8].reshape(2, 1), p0[8:9]
    h = 1.0 / (1.0 + np.exp(-(X[0] @ W1 + b1)))
    y = 1.0 / (1.0 + np.exp(-(h @ W2 + b2)))[0]
    delta = (1.0 - y) * y * (1.0 - y)

    model = train_mlp(X, [POSITIVE], cfg)
    np.testing.assert_allclose(model.layer_weights[1][:, 0], W2[:, 0] + 0.7 * delta * h, rtol=0, atol=1e-15)
    np.testing.assert_allclose(model.layer_biases[1], b2 + 0.7 * delta, rtol=0, atol=1e-15)


@pytest.mark.parametrize("sizes", [(5, 4, 3, 1), (5, 4, 1)])
@pytest.mark.parametrize("activation", [LOGISTIC, TANH])
def test_kernel_step_is_negative_gradient(activation, sizes):
    rng = np.random.default_rng(3)
    kernel = _online_epoch_one_hidden if len(sizes) == 3 else _online_epoch
    p = rng.uniform(-1, 1, n_params(sizes))
    x = rng.random(5)
    x[1] = 0.0
    t = -1.0 if activation == TANH else 0.0
    expected = p - 0.3 * gradient(MlpModel.from_flat(p, sizes, activation), x, t)
    stepped = p.copy()
    kernel(stepped, np.array(sizes, dtype=np.int64), x[None, :], np.array([t]),
                  np.array([0]), 0.3, activation == TANH)
    np.testing.assert_allclose(stepped, expected, rtol=0, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), tanh=st.booleans())
def test_single_hidden_kernel_matches_generic(seed, tanh):
    rng = np.random.default_rng(seed)
    a, b, n = rng.integers(1, 20), rng.integers(1, 12), rng.integers(1, 30)
    X = rng.random((n, a))
    X[X < 0.5] = 0.0
    T = rng.choice([-1.0, 1.0] if tanh else [0.0, 1.0], n)
    sizes = np.array([a, b, 1], dtype=np.int64)
    p = rng.uniform(-1, 1, n_params(sizes))
    q = p.copy()
    for _ in range(3):
        order = rng.permutation(n)
        _online_epoch(p, sizes, X, T, order, 0.7, tanh)
        _online_epoch_one_hidden(q, sizes, X, T, order, 0.7, tanh)
    assert p.tobytes() == q.tobytes()


def test_xor_seed_sweep():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    y = np.array([0, 1, 1, 0])
    solved = []
    for seed in range(10):
        cfg = MlpConfig(hidden_layout=(4,), learning_rate=0.7, epochs=5000, seed=seed)
        model = train_mlp(X, y, cfg)
        if all(predict(model, x) == t for x, t in zip(X, y)):
            solved.append(seed)
    assert solved


def test_training_is_deterministic():
    rng = np.random.default_rng(1)
    X, y = rng.random((30, 4)), rng.integers(0, 2, 30)
    cfg = MlpConfig(epochs=20, seed=4, activation=TANH)
    a, b = train_mlp(X, y, cfg), train_mlp(X, y, cfg)
    assert a.flat_params().tobytes() == b.flat_params().tobytes()
    c = train_mlp(X, y, MlpConfig(epochs=20, seed=5, activation=TANH))
    assert not np.array_equal(a.flat_params(), c.flat_params())


def test_divergence_raises():
    X = np.full((3, 6), np.inf)
    X[:, ::2] = -np.inf
    with pytest.raises(NonFiniteUpdate) as info:
        train_mlp(X, [1, 0, 1], MlpConfig(epochs=5))
    assert info.value.epoch == 1


def test_scores_batch_equals_forward():
    rng = np.random.default_rng(8)
    model = random_model((3, 5, 1), LOGISTIC, rng)
    X = rng.random((10, 3))
    np.testing.assert_allclose(scores(model, X), [forward(model, x) for x in X], rtol=0, atol=1e-15)
