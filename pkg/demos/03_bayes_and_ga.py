"""Naive Bayes on raw records and the prototype GA on encoded rows."""

from pathlib import Path

import numpy as np

from credit_ensemble import bayes, ga
from credit_ensemble.dataset import fit_encoder, load_dataset, stratified_folds

DATA = Path(__file__).resolve().parent.parent / "data"

d = load_dataset(DATA / "german.data", "german")
folds = stratified_folds(d, k=10, seed=0)
train, test = d.subset(folds.train_indices(3)), d.subset(folds.test_indices(3))

# Bayes works on the unencoded records: Gaussians for numbers, smoothed tables for codes
model = bayes.train_bayes(train)
print("priors (good, bad):", model.priors)
print("posterior of first test record:", bayes.posterior(model, test.records[0]))
print("Bayes test accuracy:", np.mean(bayes.predict_bayes_batch(model, test) == test.labels))

# the GA evolves 3 prototypes per class in the encoded space
enc = fit_encoder(train)
A, B = enc.transform(train), enc.transform(test)
run = ga.run_ga(A.rows, A.labels, ga.GaConfig(generations=40, seed=2))
print("best-so-far training fitness every 10 generations:", run.history[::10])
print("GA test accuracy:", np.mean(ga.predict_ga_batch(run.best, B.rows) == B.labels))
