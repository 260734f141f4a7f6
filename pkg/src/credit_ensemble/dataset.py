"""Parsing, encoding and fold assignment for the Statlog credit files.

Three whitespace separated UCI files are supported:

``german``
    ``german.data``: 20 attributes (7 numeric, 13 coded ``A11``-style),
    class token ``1`` (good) or ``2`` (bad).
``german-numeric``
    ``german.data-numeric``: 24 integer attributes, same class tokens.
``australian``
    ``australian.dat``: 14 attributes (6 numeric, 8 categorical), class
    token ``1`` (approved) or ``0``.

The class label convention is shared by every module: ``POSITIVE`` (1) is
the creditworthy class, ``NEGATIVE`` (0) the other.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    CharacteristicsMismatch,
    DegenerateColumnWarning,
    MalformedRecord,
    TooFewRecords,
)

POSITIVE = 1
NEGATIVE = 0

GERMAN = "german"
GERMAN_NUMERIC = "german-numeric"
AUSTRALIAN = "australian"
VARIANTS = (GERMAN, GERMAN_NUMERIC, AUSTRALIAN)

Value = Union[float, str]


@dataclass(frozen=True)
class Characteristics:
    records: int
    numeric: int
    categorical: int
    class1: int
    class2: int


# Declared totals; class1 is the POSITIVE class in every file.
DECLARED = {
    AUSTRALIAN: Characteristics(690, 6, 8, 307, 383),
    GERMAN: Characteristics(1000, 7, 13, 700, 300),
    GERMAN_NUMERIC: Characteristics(1000, 24, 0, 700, 300),
}


@dataclass(frozen=True)
class Attribute:
    """One source column. ``categories is None`` marks a numeric column."""

    name: str
    categories: tuple[str, ...] | None = None

    @property
    def is_numeric(self) -> bool:
        return self.categories is None


@dataclass(frozen=True)
class FeatureSchema:
    attributes: tuple[Attribute, ...]

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ValueError("attribute names must be unique")
        for a in self.attributes:
            if a.categories is not None and len(set(a.categories)) < 2:
                raise ValueError(f"categorical attribute {a.name!r} needs >= 2 codes")
            if a.categories is not None and len(set(a.categories)) != len(a.categories):
                raise ValueError(f"duplicate category codes in {a.name!r}")

    def __len__(self):
        return len(self.attributes)

    @cached_property
    def numeric_indices(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.attributes) if a.is_numeric)

    @cached_property
    def categorical_indices(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.attributes) if not a.is_numeric)


@dataclass(frozen=True)
class Instance:
    values: tuple[Value, ...]
    label: int


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable parsed records.

    ``ids`` holds each record's position in the originally parsed file, so
    subsets (training folds) stay traceable to their source rows.
    """

    schema: FeatureSchema
    records: tuple[Instance, ...]
    name: str
    ids: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.ids:
            object.__setattr__(self, "ids", tuple(range(len(self.records))))
        if len(self.ids) != len(self.records):
            raise ValueError("ids and records differ in length")
        width = len(self.schema)
        for pos, inst in enumerate(self.records):
            if len(inst.values) != width:
                raise ValueError(f"record {pos} has {len(inst.values)} values, schema has {width}")
            if inst.label not in (POSITIVE, NEGATIVE):
                raise ValueError(f"record {pos} has label {inst.label!r}")
            for attr, v in zip(self.schema.attributes, inst.values):
                if attr.is_numeric != (not isinstance(v, str)):
                    raise ValueError(f"record {pos}: value {v!r} does not fit {attr.name!r}")

    def __len__(self):
        return len(self.records)

    @classmethod
    def from_rows(cls, schema: FeatureSchema, rows, labels, name: str = "custom") -> "Dataset":
        """Build a dataset from value rows; numeric values are cast to float."""
        records = []
        for row, label in zip(rows, labels, strict=True):
            values = tuple(v if isinstance(v, str) else float(v) for v in row)
            records.append(Instance(values, int(label)))
        return cls(schema, tuple(records), name)

    @cached_property
    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.records], dtype=np.int64)

    def class_counts(self) -> tuple[int, int]:
        """Return ``(positive, negative)`` record counts."""
        pos = int(self.labels.sum())
        return pos, len(self) - pos

    def subset(self, indices: Iterable[int]) -> "Dataset":
        idx = [int(i) for i in indices]
        return Dataset(
            self.schema,
            tuple(self.records[i] for i in idx),
            self.name,
            tuple(self.ids[i] for i in idx),
        )

    @cached_property
    def numeric_matrix(self) -> np.ndarray:
        """``(n, n_numeric)`` float array of the numeric attributes."""
        cols = self.schema.numeric_indices
        out = np.empty((len(self), len(cols)))
        for r, inst in enumerate(self.records):
            for c, j in enumerate(cols):
                out[r, c] = inst.values[j]
        return out

    @cached_property
    def category_index_matrix(self) -> np.ndarray:
        """``(n, n_categorical)`` int array of category positions, -1 if unknown."""
        cols = self.schema.categorical_indices
        lookups = [{code: k for k, code in enumerate(self.schema.attributes[j].categories)} for j in cols]
        out = np.empty((len(self), len(cols)), dtype=np.int64)
        for r, inst in enumerate(self.records):
            for c, j in enumerate(cols):
                out[r, c] = lookups[c].get(inst.values[j], -1)
        return out


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _codes(prefix: str, first: int, last: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(first, last + 1))


# (name, documented category codes or None for numeric)
_GERMAN_LAYOUT = (
    ("checking_status", _codes("A1", 1, 4)),
    ("duration_months", None),
    ("credit_history", _codes("A3", 0, 4)),
    ("purpose", _codes("A4", 0, 9) + ("A410",)),
    ("credit_amount", None),
    ("savings", _codes("A6", 1, 5)),
    ("employment_since", _codes("A7", 1, 5)),
    ("installment_rate", None),
    ("personal_status_sex", _codes("A9", 1, 5)),
    ("other_debtors", _codes("A10", 1, 3)),
    ("residence_since", None),
    ("property", _codes("A12", 1, 4)),
    ("age_years", None),
    ("other_installment_plans", _codes("A14", 1, 3)),
    ("housing", _codes("A15", 1, 3)),
    ("existing_credits", None),
    ("job", _codes("A17", 1, 4)),
    ("num_dependents", None),
    ("telephone", _codes("A19", 1, 2)),
    ("foreign_worker", _codes("A20", 1, 2)),
)

_GERMAN_NUMERIC_LAYOUT = tuple((f"a{i:02d}", None) for i in range(1, 25))

_BINARY = ("0", "1")
_AUSTRALIAN_LAYOUT = (
    ("A1", _BINARY),
    ("A2", None),
    ("A3", None),
    ("A4", ("1", "2", "3")),
    ("A5", tuple(str(i) for i in range(1, 15))),
    ("A6", tuple(str(i) for i in range(1, 10))),
    ("A7", None),
    ("A8", _BINARY),
    ("A9", _BINARY),
    ("A10", None),
    ("A11", _BINARY),
    ("A12", ("1", "2", "3")),
    ("A13", None),
    ("A14", None),
)

_GERMAN_CLASSES = {"1": POSITIVE, "2": NEGATIVE}
_AUSTRALIAN_CLASSES = {"1": POSITIVE, "0": NEGATIVE}


def _parse(text: str, name: str, layout, classes: dict[str, int], check: bool) -> Dataset:
    arity = len(layout) + 1
    vocab = [None if codes is None else set(codes) for _, codes in layout]
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != arity:
            raise MalformedRecord(lineno, f"expected {arity} tokens, found {len(tokens)}")
        values: list[Value] = []
        for tok, allowed, (attr, _) in zip(tokens, vocab, layout):
            if allowed is None:
                try:
                    v = float(tok)
                except ValueError:
                    raise MalformedRecord(lineno, f"{attr}: {tok!r} is not numeric") from None
                if not math.isfinite(v):
                    raise MalformedRecord(lineno, f"{attr}: non-finite value {tok!r}")
                values.append(v)
            else:
                if tok not in allowed:
                    raise MalformedRecord(lineno, f"{attr}: unknown category code {tok!r}")
                values.append(tok)
        if tokens[-1] not in classes:
            raise MalformedRecord(lineno, f"unknown class token {tokens[-1]!r}")
        records.append(Instance(tuple(values), classes[tokens[-1]]))

    if check:
        _check_characteristics(name, layout, records)

    # Keep the documented order but only codes that actually occur.
    attributes = []
    for j, (attr, codes) in enumerate(layout):
        if codes is None:
            attributes.append(Attribute(attr))
            continue
        seen = {r.values[j] for r in records}
        observed = tuple(c for c in codes if c in seen)
        attributes.append(Attribute(attr, observed if len(observed) >= 2 else codes))
    return Dataset(FeatureSchema(tuple(attributes)), tuple(records), name)


def _check_characteristics(name, layout, records):
    want = DECLARED[name]
    n_num = sum(codes is None for _, codes in layout)
    pos = sum(r.label == POSITIVE for r in records)
    got = Characteristics(len(records), n_num, len(layout) - n_num, pos, len(records) - pos)
    if got != want:
        raise CharacteristicsMismatch(
            f"{name}: parsed records={got.records} numeric={got.numeric} "
            f"categorical={got.categorical} class1={got.class1} class2={got.class2}; "
            f"declared records={want.records} numeric={want.numeric} "
            f"categorical={want.categorical} class1={want.class1} class2={want.class2}"
        )


def parse_german_categorical(text: str, check: bool = True) -> Dataset:
    """Parse ``german.data``.

    With ``check`` (the default) the totals must equal the declared
    characteristics (1000 records, 7 numeric / 13 categorical, 700/300),
    otherwise :class:`CharacteristicsMismatch` is raised.
    """
    return _parse(text, GERMAN, _GERMAN_LAYOUT, _GERMAN_CLASSES, check)


def parse_german_numeric(text: str, check: bool = True) -> Dataset:
    """Parse ``german.data-numeric`` (24 numeric attributes)."""
    return _parse(text, GERMAN_NUMERIC, _GERMAN_NUMERIC_LAYOUT, _GERMAN_CLASSES, check)


def parse_australian(text: str, check: bool = True) -> Dataset:
    """Parse ``australian.dat`` (6 numeric, 8 categorical, 307/383)."""
    return _parse(text, AUSTRALIAN, _AUSTRALIAN_LAYOUT, _AUSTRALIAN_CLASSES, check)


PARSERS = {
    GERMAN: parse_german_categorical,
    GERMAN_NUMERIC: parse_german_numeric,
    AUSTRALIAN: parse_australian,
}


def load_dataset(path: str | Path, variant: str) -> Dataset:
    """Read and parse a credit file from disk."""
    try:
        parser = PARSERS[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}") from None
    return parser(Path(path).read_text())


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EncodedMatrix:
    """Numeric view of a dataset with every value in [0, 1].

    ``column_map[c]`` is ``(source attribute index, category code)`` for a
    one-hot column and ``(source attribute index, None)`` for a scaled
    numeric column.
    """

    rows: np.ndarray
    labels: np.ndarray
    column_map: tuple[tuple[int, str | None], ...]
    normalization: tuple[tuple[int, float, float], ...]
    degenerate_columns: tuple[int, ...] = ()

    @property
    def width(self) -> int:
        return self.rows.shape[1]

    def __len__(self):
        return self.rows.shape[0]

    def decode_row(self, row: Sequence[float]) -> list[Value]:
        """Map an encoded row back to source values.

        One-hot groups decode to the code of their hot column; numeric
        columns are un-scaled with the recorded (min, max).
        """
        scale = {j: (lo, hi) for j, lo, hi in self.normalization}
        n_attrs = max(j for j, _ in self.column_map) + 1
        out: list[Value | None] = [None] * n_attrs
        for c, (j, code) in enumerate(self.column_map):
            if code is None:
                lo, hi = scale[j]
                out[j] = lo + float(row[c]) * (hi - lo)
            elif row[c] == 1.0:
                out[j] = code
        return out


@dataclass(frozen=True, eq=False)
class Encoder:
    """Min-max plus one-hot encoder fitted on one set of records.

    ``fitted_on`` lists the source record ids whose values fixed the
    normalization statistics.
    """

    schema: FeatureSchema
    column_map: tuple[tuple[int, str | None], ...]
    normalization: tuple[tuple[int, float, float], ...]
    degenerate_columns: tuple[int, ...]
    fitted_on: tuple[int, ...]

    @property
    def width(self) -> int:
        return len(self.column_map)

    def transform(self, d: Dataset) -> EncodedMatrix:
        if d.schema != self.schema:
            raise ValueError("dataset schema differs from the fitted schema")
        n = len(d)
        rows = np.zeros((n, self.width))
        num = d.numeric_matrix
        cat = d.category_index_matrix
        num_pos = {j: c for c, j in enumerate(self.schema.numeric_indices)}
        cat_pos = {j: c for c, j in enumerate(self.schema.categorical_indices)}
        scale = {j: (lo, hi) for j, lo, hi in self.normalization}
        col = 0
        for j, attr in enumerate(self.schema.attributes):
            if attr.is_numeric:
                lo, hi = scale[j]
                if hi > lo:
                    # Values outside the fitted range (test rows) are clipped.
                    rows[:, col] = np.clip((num[:, num_pos[j]] - lo) / (hi - lo), 0.0, 1.0)
                col += 1
            else:
                idx = cat[:, cat_pos[j]]
                known = idx >= 0
                rows[np.nonzero(known)[0], col + idx[known]] = 1.0
                col += len(attr.categories)
        return EncodedMatrix(
            rows, d.labels.copy(), self.column_map, self.normalization, self.degenerate_columns
        )


def fit_encoder(d: Dataset) -> Encoder:
    """Fit min-max statistics on ``d``; one-hot columns follow the schema."""
    if len(d) == 0:
        raise ValueError("cannot fit an encoder on an empty dataset")
    column_map: list[tuple[int, str | None]] = []
    normalization = []
    degenerate = []
    num = d.numeric_matrix
    num_pos = {j: c for c, j in enumerate(d.schema.numeric_indices)}
    for j, attr in enumerate(d.schema.attributes):
        if attr.is_numeric:
            values = num[:, num_pos[j]]
            lo, hi = float(values.min()), float(values.max())
            if lo == hi:
                degenerate.append(len(column_map))
                warnings.warn(
                    f"numeric attribute {attr.name!r} is constant ({lo}); encoded as 0.0",
                    DegenerateColumnWarning,
                    stacklevel=2,
                )
            normalization.append((j, lo, hi))
            column_map.append((j, None))
        else:
            column_map.extend((j, code) for code in attr.categories)
    return Encoder(d.schema, tuple(column_map), tuple(normalization), tuple(degenerate), d.ids)


def encode(d: Dataset) -> EncodedMatrix:
    """Encode ``d`` using statistics of its own records."""
    return fit_encoder(d).transform(d)


# ---------------------------------------------------------------------------
# folds
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FoldAssignment:
    k: int
    assignment: np.ndarray
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != fold)

    def fold_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)


def stratified_folds(data: Dataset | Sequence[int] | np.ndarray, k: int, seed: int) -> FoldAssignment:
    """Seeded stratified k-fold assignment.

    Members of each class are shuffled with ``numpy.random.default_rng(seed)``
    (POSITIVE first, then NEGATIVE) and dealt round robin over the folds.
    The deal continues across classes, so fold sizes also differ by at most
    one.
    """
    labels = data.labels if isinstance(data, Dataset) else np.asarray(data, dtype=np.int64)
    if k < 2:
        raise ValueError("k must be at least 2")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for cls in (POSITIVE, NEGATIVE):
        members = np.flatnonzero(labels == cls)
        if len(members) < k:
            raise TooFewRecords(f"class {cls} has {len(members)} records, fewer than k={k}")
        order = rng.permutation(members)
        assignment[order] = (offset + np.arange(len(order))) % k
        offset += len(order)
    if offset != len(labels):
        raise ValueError("labels must be POSITIVE (1) or NEGATIVE (0)")
    return FoldAssignment(k, assignment, seed)
