"""The three fusion rules on hand-made vote triples."""

import itertools

import numpy as np

from credit_ensemble.ensemble import Majority, VoteVector, Weighted, fuse, train_stacker
from credit_ensemble.mlp import MlpConfig, predict_batch

# votes are ordered (mlp, bayes, ga); 1 = good credit
print("votes     majority  weighted(0.5, 0.29, 0.21)")
for votes in itertools.product((0, 1), repeat=3):
    v = VoteVector.from_votes(votes)
    print(votes, "  ", fuse(Majority(), v), "       ", fuse(Weighted(), v))

# a stacker learns its own rule from scores; here the label follows the first voter
rng = np.random.default_rng(0)
scores = rng.random((200, 3))
labels = (scores[:, 0] > 0.5).astype(int)
meta = train_stacker(scores, labels, MlpConfig(hidden_layout=(2,), epochs=300, seed=0))
print("stacker training accuracy:", np.mean(predict_batch(meta, scores) == labels))
