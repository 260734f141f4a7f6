"""Naive Bayes for mixed numeric/categorical records.

Numeric attributes get per-class Gaussian likelihoods (maximum-likelihood
moments, variance floored); categorical attributes get Laplace smoothed
frequency tables. The model works on the raw :class:`Dataset`, not on the
one-hot encoding.

All per-class arrays are ordered ``(POSITIVE, NEGATIVE)``, the same order
as the pair returned by :func:`posterior`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import NEGATIVE, POSITIVE, Dataset, FeatureSchema, Instance
from .errors import MissingClass

CLASS_ORDER = (POSITIVE, NEGATIVE)
DEFAULT_VARIANCE_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class BayesModel:
    """Fitted parameters.

    Attributes
    ----------
    priors : ndarray of shape (2,)
        Class frequencies.
    class_counts : ndarray of shape (2,)
        Training records per class.
    numeric_params : dict
        Attribute index -> ``(means, variances)``, each of shape (2,).
    categorical_tables : dict
        Attribute index -> ``(2, n_codes)`` smoothed probabilities, columns
        following the schema's category order.
    """

    schema: FeatureSchema
    priors: np.ndarray
    class_counts: np.ndarray
    numeric_params: dict[int, tuple[np.ndarray, np.ndarray]]
    categorical_tables: dict[int, np.ndarray]
    variance_floor: float = DEFAULT_VARIANCE_FLOOR

    def unseen_log_prob(self, attr: int) -> np.ndarray:
        """Log probability given to a code the schema does not list."""
        n_codes = self.categorical_tables[attr].shape[1]
        return -np.log(self.class_counts + n_codes)


def train_bayes(d: Dataset, variance_floor: float = DEFAULT_VARIANCE_FLOOR) -> BayesModel:
    labels = d.labels
    masks = [labels == c for c in CLASS_ORDER]
    counts = np.array([m.sum() for m in masks], dtype=float)
    if (counts == 0).any():
        raise MissingClass("training data must contain both classes")

    num = d.numeric_matrix
    numeric = {}
    for c, j in enumerate(d.schema.numeric_indices):
        col = num[:, c]
        means = np.array([col[m].mean() for m in masks])
        variances = np.array([max(col[m].var(), variance_floor) for m in masks])
        numeric[j] = (means, variances)

    cat = d.category_index_matrix
    tables = {}
    for c, j in enumerate(d.schema.categorical_indices):
        n_codes = len(d.schema.attributes[j].categories)
        table = np.empty((2, n_codes))
        for k, m in enumerate(masks):
            freq = np.bincount(cat[m, c][cat[m, c] >= 0], minlength=n_codes)
            table[k] = (freq + 1.0) / (counts[k] + n_codes)
        tables[j] = table

    return BayesModel(d.schema, counts / counts.sum(), counts, numeric, tables, variance_floor)


def _gauss_logpdf(x, mean, var):
    return -0.5 * np.log(2.0 * math.pi * var) - (x - mean) ** 2 / (2.0 * var)


def log_joint(model: BayesModel, inst: Instance) -> np.ndarray:
    """Unnormalised ``log P(class) + sum log P(value | class)`` per class."""
    if len(inst.values) != len(model.schema):
        raise ValueError("instance arity does not match the model schema")
    out = np.log(model.priors)
    for j, attr in enumerate(model.schema.attributes):
        v = inst.values[j]
        if attr.is_numeric:
            means, variances = model.numeric_params[j]
            out = out + _gauss_logpdf(float(v), means, variances)
        else:
            try:
                k = attr.categories.index(v)
            except ValueError:
                out = out + model.unseen_log_prob(j)
            else:
                out = out + np.log(model.categorical_tables[j][:, k])
    return out


def normalize_log_joint(logs):
    """Turn the two per-class log joints (last axis) into probabilities.

    Uses ``p_c = 1 / (1 + exp(l_other - l_c))``: equal log joints give
    exactly 0.5 each, and a huge gap saturates to 0/1 instead of overflowing.
    """
    logs = np.asarray(logs, dtype=float)
    gap = logs[..., 1] - logs[..., 0]
    with np.errstate(over="ignore"):
        p_pos = 1.0 / (1.0 + np.exp(gap))
        p_neg = 1.0 / (1.0 + np.exp(-gap))
    return np.stack([p_pos, p_neg], axis=-1)


def posterior(model: BayesModel, inst: Instance) -> tuple[float, float]:
    """``(P(POSITIVE | inst), P(NEGATIVE | inst))``, computed in log space."""
    p = normalize_log_joint(log_joint(model, inst))
    return float(p[0]), float(p[1])


def posterior_batch(model: BayesModel, d: Dataset) -> np.ndarray:
    """Vectorised :func:`posterior`; returns shape ``(n, 2)``."""
    if d.schema != model.schema:
        raise ValueError("dataset schema differs from the model schema")
    n = len(d)
    logs = np.tile(np.log(model.priors), (n, 1))
    num = d.numeric_matrix
    cat = d.category_index_matrix
    # accumulate in schema order so results match posterior() bit for bit
    num_pos = {j: c for c, j in enumerate(model.schema.numeric_indices)}
    cat_pos = {j: c for c, j in enumerate(model.schema.categorical_indices)}
    for j, attr in enumerate(model.schema.attributes):
        if attr.is_numeric:
            means, variances = model.numeric_params[j]
            logs = logs + _gauss_logpdf(num[:, num_pos[j], None], means, variances)
        else:
            idx = cat[:, cat_pos[j]]
            table = np.log(model.categorical_tables[j])
            contrib = table[:, np.maximum(idx, 0)].T
            contrib[idx < 0] = model.unseen_log_prob(j)
            logs = logs + contrib
    return normalize_log_joint(logs)


def predict_bayes(model: BayesModel, inst: Instance) -> int:
    """Argmax of the posterior; an exact tie goes to POSITIVE."""
    p_pos, p_neg = posterior(model, inst)
    return POSITIVE if p_pos >= p_neg else NEGATIVE


def predict_bayes_batch(model: BayesModel, d: Dataset) -> np.ndarray:
    p = posterior_batch(model, d)
    return np.where(p[:, 0] >= p[:, 1], POSITIVE, NEGATIVE)
