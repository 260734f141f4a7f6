"""Train the back-propagation network on one fold of the German data."""

from pathlib import Path

import numpy as np

from credit_ensemble import mlp
from credit_ensemble.dataset import fit_encoder, load_dataset, stratified_folds

DATA = Path(__file__).resolve().parent.parent / "data"

d = load_dataset(DATA / "german.data", "german")
folds = stratified_folds(d, k=10, seed=0)
train, test = d.subset(folds.train_indices(0)), d.subset(folds.test_indices(0))

# min-max statistics come from the training part only
enc = fit_encoder(train)
A, B = enc.transform(train), enc.transform(test)

for epochs in (30, 300):
    cfg = mlp.MlpConfig(epochs=epochs, seed=1)
    model = mlp.train_mlp(A.rows, A.labels, cfg)
    train_acc = np.mean(mlp.predict_batch(model, A.rows) == A.labels)
    test_acc = np.mean(mlp.predict_batch(model, B.rows) == B.labels)
    print(f"{epochs:4d} epochs, layers {model.sizes}: train {train_acc:.3f}, test {test_acc:.3f}")

# the analytic gradient agrees with a central difference
x, t = A.rows[0], 1.0
g = mlp.gradient(model, x, t)
p = model.flat_params()
i = int(np.argmax(np.abs(g)))
h = 1e-5
up, down = p.copy(), p.copy()
up[i] += h
down[i] -= h


def loss(params):
    m = mlp.MlpModel.from_flat(params, model.sizes, model.activation)
    return 0.5 * (t - mlp.forward(m, x)) ** 2


print(f"d loss / d param[{i}]:", g[i], "vs finite difference", (loss(up) - loss(down)) / (2 * h))
