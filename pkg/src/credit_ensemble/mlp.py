"""Multilayer perceptron trained by online back-propagation (delta rule).

Every layer is fully connected; the network has a single output unit and
the same activation (logistic or tanh) on every unit. Training minimises
``0.5 * (target - output)**2`` one record at a time:

    w <- w + learning_rate * delta * input

where the output delta is ``(target - output) * f'(net)`` and hidden deltas
are back-propagated through the pre-update weights. Targets are 1/0 for the
logistic activation and +1/-1 for tanh.

Parameters are flattened layer by layer, weights (fan_in x fan_out,
row-major) followed by biases; :func:`gradient` uses the same order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .dataset import NEGATIVE, POSITIVE
from .errors import DimensionMismatch, NonFiniteUpdate

LOGISTIC = "logistic"
TANH = "tanh"
ACTIVATIONS = (LOGISTIC, TANH)

MAX_DEFAULT_HIDDEN = 32


@dataclass(frozen=True)
class MlpConfig:
    """Training hyperparameters.

    ``hidden_layout=None`` picks one hidden layer of
    ``min(32, ceil((inputs + 1) / 2))`` units once the input width is known.
    """

    hidden_layout: tuple[int, ...] | None = None
    activation: str = LOGISTIC
    learning_rate: float = 0.7
    epochs: int = 3000
    seed: int = 0
    weight_init_range: float = 0.5

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if not (0.0 < self.learning_rate <= 1.0):
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.hidden_layout is not None:
            object.__setattr__(self, "hidden_layout", tuple(int(h) for h in self.hidden_layout))
            if any(h < 1 for h in self.hidden_layout):
                raise ValueError("hidden widths must be >= 1")
        if self.weight_init_range < 0:
            raise ValueError("weight_init_range must be non-negative")

    def layout_for(self, n_inputs: int) -> tuple[int, ...]:
        if self.hidden_layout is not None:
            return self.hidden_layout
        return default_hidden_layout(n_inputs)


def default_hidden_layout(n_inputs: int) -> tuple[int, ...]:
    return (min(MAX_DEFAULT_HIDDEN, math.ceil((n_inputs + 1) / 2)),)


@dataclass(frozen=True, eq=False)
class MlpModel:
    layer_weights: tuple[np.ndarray, ...]
    layer_biases: tuple[np.ndarray, ...]
    activation: str

    def __post_init__(self):
        if len(self.layer_weights) != len(self.layer_biases) or not self.layer_weights:
            raise ValueError("need one bias vector per weight matrix")
        for l, (w, b) in enumerate(zip(self.layer_weights, self.layer_biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {l}: weight {w.shape} and bias {b.shape} disagree")
            if l and w.shape[0] != self.layer_weights[l - 1].shape[1]:
                raise ValueError(f"layer {l} fan-in does not match previous fan-out")
        if self.layer_weights[-1].shape[1] != 1:
            raise ValueError("network must have a single output unit")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")

    @property
    def input_width(self) -> int:
        return self.layer_weights[0].shape[0]

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.input_width,) + tuple(w.shape[1] for w in self.layer_weights)

    @property
    def midpoint(self) -> float:
        return 0.5 if self.activation == LOGISTIC else 0.0

    def flat_params(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.layer_weights, self.layer_biases):
            parts += [w.ravel(), b]
        return np.concatenate(parts)

    @classmethod
    def from_flat(cls, params: np.ndarray, sizes, activation: str) -> "MlpModel":
        weights, biases = [], []
        pos = 0
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            weights.append(params[pos:pos + fan_in * fan_out].reshape(fan_in, fan_out).copy())
            pos += fan_in * fan_out
            biases.append(params[pos:pos + fan_out].copy())
            pos += fan_out
        if pos != len(params):
            raise DimensionMismatch(f"{len(params)} parameters do not fit layer sizes {tuple(sizes)}")
        return cls(tuple(weights), tuple(biases), activation)


def n_params(sizes) -> int:
    return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))


def _act(z, activation):
    if activation == LOGISTIC:
        # exp overflow gives the correct limit 0.0
        with np.errstate(over="ignore"):
            return 1.0 / (1.0 + np.exp(-z))
    return np.tanh(z)


def _act_slope(y, activation):
    # derivative expressed through the unit output
    if activation == LOGISTIC:
        return y * (1.0 - y)
    return 1.0 - y * y


def _check_width(model: MlpModel, width: int):
    if width != model.input_width:
        raise DimensionMismatch(f"input has width {width}, model expects {model.input_width}")


def _layer_outputs(model: MlpModel, x: np.ndarray) -> list[np.ndarray]:
    outs = [x]
    for w, b in zip(model.layer_weights, model.layer_biases):
        outs.append(_act(outs[-1] @ w + b, model.activation))
    return outs


def forward(model: MlpModel, x) -> float:
    """Output of the single output unit for one input vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("forward takes a single vector; use scores() for batches")
    _check_width(model, x.shape[0])
    return float(_layer_outputs(model, x)[-1][0])


def scores(model: MlpModel, X) -> np.ndarray:
    """Vectorised :func:`forward` over the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_width(model, X.shape[1])
    return _layer_outputs(model, X)[-1][:, 0]


def unit_scores(model: MlpModel, X) -> np.ndarray:
    """Scores mapped to [0, 1] (tanh outputs are shifted and halved)."""
    s = scores(model, X)
    return s if model.activation == LOGISTIC else (s + 1.0) / 2.0


def predict(model: MlpModel, x) -> int:
    """POSITIVE iff the score is at or above the activation midpoint."""
    return POSITIVE if forward(model, x) >= model.midpoint else NEGATIVE


def predict_batch(model: MlpModel, X) -> np.ndarray:
    return np.where(scores(model, X) >= model.midpoint, POSITIVE, NEGATIVE)


def target_for(label: int, activation: str) -> float:
    if activation == LOGISTIC:
        return float(label)
    return 1.0 if label == POSITIVE else -1.0


def gradient(model: MlpModel, x, target: float) -> np.ndarray:
    """Partials of ``0.5 * (target - output)**2`` in flat parameter order."""
    x = np.asarray(x, dtype=float)
    _check_width(model, x.shape[0])
    outs = _layer_outputs(model, x)
    delta = -(target - outs[-1]) * _act_slope(outs[-1], model.activation)
    grads = []
    for l in range(len(model.layer_weights) - 1, -1, -1):
        grads.append((np.outer(outs[l], delta).ravel(), delta))
        if l:
            delta = (model.layer_weights[l] @ delta) * _act_slope(outs[l], model.activation)
    parts = []
    for gw, gb in reversed(grads):
        parts += [gw, gb]
    return np.concatenate(parts)


@numba.njit(cache=True)
def _online_epoch(params, sizes, X, T, order, lr, tanh):
    n_layers = sizes.shape[0] - 1
    # outs: unit outputs of every layer, input layer first; deltas skip the input layer
    starts = np.zeros(n_layers + 1, dtype=np.int64)
    for l in range(1, n_layers + 1):
        starts[l] = starts[l - 1] + sizes[l - 1]
    outs = np.empty(starts[n_layers] + 1)
    deltas = np.empty(outs.shape[0])
    poffs = np.zeros(n_layers, dtype=np.int64)
    for l in range(1, n_layers):
        poffs[l] = poffs[l - 1] + sizes[l - 1] * sizes[l] + sizes[l]

    for r in order:
        for i in range(sizes[0]):
            outs[i] = X[r, i]
        for l in range(n_layers):
            a, b = sizes[l], sizes[l + 1]
            w0 = poffs[l]
            b0 = w0 + a * b
            o = starts[l + 1]
            for j in range(b):
                outs[o + j] = params[b0 + j]
            for i in range(a):
                xi = outs[starts[l] + i]
                if xi != 0.0:
                    row = w0 + i * b
                    for j in range(b):
                        outs[o + j] += xi * params[row + j]
            for j in range(b):
                z = outs[o + j]
                outs[o + j] = math.tanh(z) if tanh else 1.0 / (1.0 + math.exp(-z))

        y = outs[starts[n_layers]]
        slope = 1.0 - y * y if tanh else y * (1.0 - y)
        deltas[starts[n_layers]] = (T[r] - y) * slope
        for l in range(n_layers - 1, 0, -1):
            a, b = sizes[l], sizes[l + 1]
            w0 = poffs[l]
            for i in range(a):
                s = 0.0
                row = w0 + i * b
                for j in range(b):
                    s += params[row + j] * deltas[starts[l + 1] + j]
                y = outs[starts[l] + i]
                slope = 1.0 - y * y if tanh else y * (1.0 - y)
                deltas[starts[l] + i] = s * slope

        for l in range(n_layers):
            a, b = sizes[l], sizes[l + 1]
            w0 = poffs[l]
            b0 = w0 + a * b
            d0 = starts[l + 1]
            for i in range(a):
                xi = lr * outs[starts[l] + i]
                if xi != 0.0:
                    row = w0 + i * b
                    for j in range(b):
                        params[row + j] += xi * deltas[d0 + j]
            for j in range(b):
                params[b0 + j] += lr * deltas[d0 + j]


@numba.njit(cache=True)
def _online_epoch_one_hidden(params, sizes, X, T, order, lr, tanh):
    # same arithmetic as _online_epoch, specialised to input-hidden-output
    a, b = sizes[0], sizes[1]
    W1 = params[:a * b].reshape(a, b)
    b1 = params[a * b:a * b + b]
    W2 = params[a * b + b:a * b + 2 * b]
    b2 = params[a * b + 2 * b:a * b + 2 * b + 1]
    h = np.empty(b)
    dh = np.empty(b)
    nz = np.empty(a, dtype=np.int64)
    for r in order:
        x = X[r]
        k = 0
        for i in range(a):
            if x[i] != 0.0:
                nz[k] = i
                k += 1
        for j in range(b):
            h[j] = b1[j]
        for q in range(k):
            i = nz[q]
            xi = x[i]
            for j in range(b):
                h[j] += xi * W1[i, j]
        z = b2[0]
        for j in range(b):
            v = h[j]
            h[j] = math.tanh(v) if tanh else 1.0 / (1.0 + math.exp(-v))
            z += h[j] * W2[j]
        y = math.tanh(z) if tanh else 1.0 / (1.0 + math.exp(-z))
        d_out = (T[r] - y) * (1.0 - y * y if tanh else y * (1.0 - y))
        for j in range(b):
            hj = h[j]
            dh[j] = W2[j] * d_out * (1.0 - hj * hj if tanh else hj * (1.0 - hj))
        for q in range(k):
            i = nz[q]
            xi = lr * x[i]
            for j in range(b):
                W1[i, j] += xi * dh[j]
        for j in range(b):
            b1[j] += lr * dh[j]
            W2[j] += (lr * h[j]) * d_out
        b2[0] += lr * d_out


def init_params(sizes, cfg: MlpConfig, rng: np.random.Generator) -> np.ndarray:
    r = cfg.weight_init_range
    return rng.uniform(-r, r, size=n_params(sizes))


def train_mlp(X, y, cfg: MlpConfig) -> MlpModel:
    """Train a network on rows ``X`` (values in [0, 1]) and 0/1 labels ``y``.

    One seeded generator drives the weight initialisation and the per-epoch
    shuffle, so the result is a pure function of ``(X, y, cfg)``.

    Raises
    ------
    NonFiniteUpdate
        If any parameter stops being finite.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DimensionMismatch("X must be a non-empty 2-D array")
    if y.shape != (X.shape[0],):
        raise DimensionMismatch(f"{X.shape[0]} rows but {y.shape} labels")
    sizes = np.array((X.shape[1],) + cfg.layout_for(X.shape[1]) + (1,), dtype=np.int64)
    rng = np.random.default_rng(cfg.seed)
    params = init_params(sizes, cfg, rng)
    targets = np.array([target_for(int(v), cfg.activation) for v in y])
    tanh = cfg.activation == TANH
    kernel = _online_epoch_one_hidden if len(sizes) == 3 else _online_epoch
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(X.shape[0])
        kernel(params, sizes, X, targets, order, cfg.learning_rate, tanh)
        if not np.isfinite(params).all():
            raise NonFiniteUpdate(epoch)
    return MlpModel.from_flat(params, tuple(int(s) for s in sizes), cfg.activation)
