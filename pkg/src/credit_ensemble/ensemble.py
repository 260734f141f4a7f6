"""Fusion of the three base classifiers' outputs.

Voter order is fixed everywhere: ``(mlp, bayes, ga)``. Votes are 1 for
POSITIVE and 0 for NEGATIVE; scores are in [0, 1] (MLP output mapped to
the unit interval, Bayes POSITIVE posterior, GA vote as 0/1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import mlp
from .dataset import NEGATIVE, POSITIVE
from .mlp import MlpConfig, MlpModel

VOTERS = ("mlp", "bayes", "ga")
DEFAULT_WEIGHTS = (0.5, 0.29, 0.21)
DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class VoteVector:
    scores: tuple[float, float, float]

    def __post_init__(self):
        s = tuple(float(v) for v in self.scores)
        if len(s) != 3:
            raise ValueError("need exactly three scores")
        if any(not (0.0 <= v <= 1.0) for v in s):
            raise ValueError(f"scores must lie in [0, 1], got {s}")
        object.__setattr__(self, "scores", s)

    @property
    def votes(self) -> tuple[int, int, int]:
        return tuple(POSITIVE if v >= 0.5 else NEGATIVE for v in self.scores)

    @classmethod
    def from_votes(cls, votes) -> "VoteVector":
        return cls(tuple(float(v) for v in votes))


@dataclass(frozen=True)
class Majority:
    pass


@dataclass(frozen=True)
class Weighted:
    weights: tuple[float, float, float] = DEFAULT_WEIGHTS
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if len(self.weights) != 3 or any(w < 0 for w in self.weights):
            raise ValueError("weights must be three non-negative numbers")


@dataclass(frozen=True, eq=False)
class Stacked:
    meta: MlpModel
    use_votes: bool = False

    def __post_init__(self):
        if self.meta.input_width != 3:
            raise ValueError("stacker must take three inputs")


FusionStrategy = Union[Majority, Weighted, Stacked]


def majority_vote(v: VoteVector) -> int:
    return POSITIVE if sum(v.votes) >= 2 else NEGATIVE


def weighted_vote(v: VoteVector, weights=DEFAULT_WEIGHTS, threshold: float = DEFAULT_THRESHOLD) -> int:
    """POSITIVE iff ``sum(w_i * vote_i) >= threshold``.

    With the default weights the MLP alone reaches the threshold, and so
    do Bayes and GA together. A sum within rounding error of the threshold
    counts as reaching it.
    """
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    r = math.fsum(w * x for w, x in zip(weights, v.votes))
    return POSITIVE if r >= threshold - _slack(weights, threshold) else NEGATIVE


def _slack(weights, threshold) -> float:
    return 1e-12 * max(abs(threshold), math.fsum(weights))


def stacker_inputs(scores: np.ndarray, use_votes: bool = False) -> np.ndarray:
    scores = np.asarray(scores, dtype=float)
    return (scores >= 0.5).astype(float) if use_votes else scores


def train_stacker(base_scores, labels, cfg: MlpConfig, use_votes: bool = False) -> MlpModel:
    """Fit the meta network on out-of-fold ``(n, 3)`` base scores."""
    X = stacker_inputs(base_scores, use_votes)
    if X.ndim != 2 or X.shape[1] != 3:
        raise ValueError("base scores must have shape (n, 3)")
    return mlp.train_mlp(X, labels, cfg)


def fuse(strategy: FusionStrategy, v: VoteVector) -> int:
    match strategy:
        case Majority():
            return majority_vote(v)
        case Weighted(weights=w, threshold=t):
            return weighted_vote(v, w, t)
        case Stacked(meta=meta, use_votes=use_votes):
            x = stacker_inputs(np.array(v.scores), use_votes)
            return mlp.predict(meta, x)
    raise TypeError(f"unknown fusion strategy {strategy!r}")


def fuse_batch(strategy: FusionStrategy, scores) -> np.ndarray:
    """Vectorised :func:`fuse` over an ``(n, 3)`` score matrix."""
    scores = np.asarray(scores, dtype=float)
    votes = (scores >= 0.5).astype(float)
    match strategy:
        case Majority():
            return np.where(votes.sum(axis=1) >= 2, POSITIVE, NEGATIVE)
        case Weighted(weights=w, threshold=t):
            r = sum(w[i] * votes[:, i] for i in range(3))
            return np.where(r >= t - _slack(w, t), POSITIVE, NEGATIVE)
        case Stacked(meta=meta, use_votes=use_votes):
            return mlp.predict_batch(meta, stacker_inputs(scores, use_votes))
    raise TypeError(f"unknown fusion strategy {strategy!r}")
