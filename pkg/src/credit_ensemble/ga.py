"""Genetic algorithm that evolves a nearest-prototype classifier.

A chromosome is ``p`` prototype vectors per class in the encoded [0, 1]
feature space; its genes are the prototype coordinates concatenated
(POSITIVE prototypes first). The initial population is drawn from training
rows of the matching class, so every starting solution is a valid
classifier. Fitness is training accuracy of the nearest-prototype rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .dataset import NEGATIVE, POSITIVE
from .errors import DimensionMismatch, TooFewRows


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 40
    generations: int = 100
    crossover_rate: float = 0.9
    mutation_rate: float = 0.05
    mutation_sigma: float = 0.1
    prototypes_per_class: int = 3
    elitism: int = 2
    tournament_size: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not (1 <= self.elitism < self.population_size):
            raise ValueError("elitism must satisfy 1 <= elitism < population_size")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")
        if self.prototypes_per_class < 1:
            raise ValueError("prototypes_per_class must be >= 1")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        for name in ("crossover_rate", "mutation_rate"):
            if not (0.0 <= getattr(self, name) <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.mutation_sigma < 0:
            raise ValueError("mutation_sigma must be non-negative")


@dataclass(frozen=True, eq=False)
class Chromosome:
    prototypes: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.prototypes, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "prototypes", P)
        object.__setattr__(self, "labels", labels)
        if P.ndim != 2 or labels.shape != (P.shape[0],):
            raise ValueError("need one label per prototype row")
        n_pos = int((labels == POSITIVE).sum())
        if n_pos < 1 or n_pos * 2 != len(labels) or not ((labels == POSITIVE) | (labels == NEGATIVE)).all():
            raise ValueError("need the same number (>= 1) of prototypes per class")
        if P.size and (P.min() < 0.0 or P.max() > 1.0):
            raise ValueError("prototype coordinates must lie in [0, 1]")

    @property
    def per_class(self) -> int:
        return len(self.labels) // 2

    @property
    def width(self) -> int:
        return self.prototypes.shape[1]

    @property
    def genes(self) -> np.ndarray:
        return self.prototypes.ravel()

    def with_genes(self, genes: np.ndarray) -> "Chromosome":
        return Chromosome(np.asarray(genes, dtype=float).reshape(self.prototypes.shape), self.labels)


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    init_seq, evolve_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(init_seq), np.random.default_rng(evolve_seq)


def _class_rows(y, p):
    pos = np.flatnonzero(y == POSITIVE)
    neg = np.flatnonzero(y == NEGATIVE)
    for name, rows in (("POSITIVE", pos), ("NEGATIVE", neg)):
        if len(rows) < p:
            raise TooFewRows(f"{name} has {len(rows)} training rows, need {p}")
    return pos, neg


def _sample_population(X, y, cfg: GaConfig, rng) -> list[Chromosome]:
    p = cfg.prototypes_per_class
    pos, neg = _class_rows(y, p)
    labels = np.array([POSITIVE] * p + [NEGATIVE] * p)
    population = []
    for _ in range(cfg.population_size):
        rows = np.concatenate([rng.choice(pos, p, replace=False), rng.choice(neg, p, replace=False)])
        population.append(Chromosome(X[rows].copy(), labels))
    return population


def init_population(X, y, cfg: GaConfig) -> list[Chromosome]:
    """Chromosomes whose prototypes are training rows of the matching class.

    Rows are drawn without replacement within each chromosome.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    return _sample_population(X, y, cfg, _streams(cfg.seed)[0])


def nearest_labels(c: Chromosome, X) -> np.ndarray:
    """Nearest-prototype labels for each row; a distance tie goes to POSITIVE."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != c.width:
        raise DimensionMismatch(f"rows have width {X.shape[1]}, prototypes {c.width}")
    pos = c.labels == POSITIVE
    return _nearest(np.ascontiguousarray(X), c.prototypes[pos], c.prototypes[~pos])


@numba.njit(cache=True)
def _min_sq_dist(x, Q):
    # direct differences summed left to right, so equal geometry gives equal sums
    best = np.inf
    for k in range(Q.shape[0]):
        s = 0.0
        for i in range(x.shape[0]):
            diff = x[i] - Q[k, i]
            s += diff * diff
        best = min(best, s)
    return best


@numba.njit(cache=True)
def _nearest(X, P, N):
    out = np.empty(X.shape[0], dtype=np.int64)
    for r in range(X.shape[0]):
        out[r] = POSITIVE if _min_sq_dist(X[r], P) <= _min_sq_dist(X[r], N) else NEGATIVE
    return out


def fitness(c: Chromosome, X, y) -> float:
    """Fraction of ``(X, y)`` classified correctly by ``c``."""
    y = np.asarray(y)
    return float((nearest_labels(c, X) == y).mean())


def predict_ga(c: Chromosome, x) -> int:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("predict_ga takes a single vector")
    return int(nearest_labels(c, x[None, :])[0])


def predict_ga_batch(c: Chromosome, X) -> np.ndarray:
    return nearest_labels(c, X)


def two_point_crossover(a: Chromosome, b: Chromosome, rng: np.random.Generator, points=None):
    """Swap the gene segment ``[i, j)`` between two parents.

    ``points`` fixes the cut points; otherwise two distinct positions in
    ``0..len(genes)`` are drawn from ``rng``.
    """
    if a.prototypes.shape != b.prototypes.shape:
        raise DimensionMismatch("parents have different gene lengths")
    ga, gb = a.genes, b.genes
    if points is None:
        i, j = np.sort(rng.choice(len(ga) + 1, size=2, replace=False))
    else:
        i, j = points
        if not (0 <= i < j <= len(ga)):
            raise ValueError("cut points must satisfy 0 <= i < j <= gene length")
    ca, cb = ga.copy(), gb.copy()
    ca[i:j], cb[i:j] = gb[i:j], ga[i:j]
    return a.with_genes(ca), b.with_genes(cb)


def mutate(c: Chromosome, cfg: GaConfig, rng: np.random.Generator) -> Chromosome:
    """Gaussian perturbation of each gene with probability ``mutation_rate``, clamped to [0, 1]."""
    genes = c.genes
    hit = rng.random(len(genes)) < cfg.mutation_rate
    noise = rng.normal(0.0, cfg.mutation_sigma, size=len(genes))
    return c.with_genes(np.clip(np.where(hit, genes + noise, genes), 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class GaRun:
    best: Chromosome
    best_fitness: float
    history: list[float] = field(default_factory=list)
    generation_best: list[float] = field(default_factory=list)


def run_ga(X, y, cfg: GaConfig) -> GaRun:
    """Generational GA with tournament selection and elitist replacement.

    ``history[g]`` is the best fitness seen up to generation ``g`` (index 0
    is the initial population); ``generation_best[g]`` is the best of the
    population alive at generation ``g``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    init_rng, rng = _streams(cfg.seed)
    pop = _sample_population(X, y, cfg, init_rng)
    fit = np.array([fitness(c, X, y) for c in pop])
    best_i = int(np.argmax(fit))
    best, best_fit = pop[best_i], float(fit[best_i])
    history, generation_best = [best_fit], [best_fit]
    n = cfg.population_size

    def tournament():
        idx = rng.integers(0, n, size=cfg.tournament_size)
        return pop[int(idx[np.argmax(fit[idx])])]

    for _ in range(cfg.generations):
        order = np.argsort(-fit, kind="stable")
        elites = [int(i) for i in order[: cfg.elitism]]
        nxt = [pop[i] for i in elites]
        nxt_fit = [float(fit[i]) for i in elites]
        while len(nxt) < n:
            a, b = tournament(), tournament()
            if rng.random() < cfg.crossover_rate:
                a, b = two_point_crossover(a, b, rng)
            for child in (mutate(a, cfg, rng), mutate(b, cfg, rng)):
                if len(nxt) < n:
                    nxt.append(child)
                    nxt_fit.append(fitness(child, X, y))
        pop, fit = nxt, np.array(nxt_fit)
        gen_i = int(np.argmax(fit))
        if fit[gen_i] > best_fit:
            best, best_fit = pop[gen_i], float(fit[gen_i])
        history.append(best_fit)
        generation_best.append(float(fit[gen_i]))
    return GaRun(best, best_fit, history, generation_best)


def evolve(X, y, cfg: GaConfig) -> Chromosome:
    """Best chromosome found by :func:`run_ga`."""
    return run_ga(X, y, cfg).best
