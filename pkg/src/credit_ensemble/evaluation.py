"""Stratified k-fold cross-validation of the base classifiers and fusions.

Per outer fold the pipeline is:

1. fit the encoder (min-max statistics) on the training records only;
2. train MLP, naive Bayes and GA on the training records and score the
   held-out fold;
3. for stacking, repeat step 1-2 inside an inner stratified split of the
   training records to obtain out-of-fold base scores, train the meta
   network on those, then apply it to the outer base scores;
4. apply every fusion rule to the held-out base outputs.

Seeds: every random component of fold ``f`` gets
``derive_seed(run_seed, f, inner, role)``, a pure function of its
position, so folds can run in any order or process.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import bayes, ensemble, ga, mlp
from .dataset import AUSTRALIAN, GERMAN, GERMAN_NUMERIC, NEGATIVE, POSITIVE, VARIANTS, Dataset, fit_encoder, load_dataset, stratified_folds
from .errors import DimensionMismatch, EmptyInput, IoFailure, NonFiniteUpdate
from .ga import GaConfig
from .mlp import MlpConfig

BASE_METHODS = ("mlp", "bayes", "ga")
STRATEGIES = ("majority", "weighted", "stacked")
METHODS = BASE_METHODS + STRATEGIES

DISPLAY_NAMES = {
    "mlp": "MLP",
    "bayes": "Bayes",
    "ga": "GA",
    "majority": "Majority vote",
    "weighted": "Weighted vote",
    "stacked": "Stacked MLP",
}

# Published accuracies (percent) of methods that are not reimplemented.
REFERENCE_BASELINES = {
    "Clc": {"Australian": 86.52, "German": 84.80},
    "Mysvm": {"Australian": 80.43, "German": 73.70},
    "GA+svm": {"Australian": 86.90, "German": 77.92},
}

SUMMARY_COLUMNS = ("Australian", "German")
DATASET_COLUMN = {AUSTRALIAN: "Australian", GERMAN: "German", GERMAN_NUMERIC: "German"}

METRIC_NOTE = (
    "accuracy = mean over folds of held-out accuracy, in percent with 2 decimals; "
    "failed folds are excluded from the mean and listed"
)

ROLE_MLP, ROLE_GA, ROLE_STACKER, ROLE_SPLIT = range(4)


def derive_seed(run_seed: int, *path: int) -> int:
    """32-bit seed for the component at ``path`` (fold, inner split, role)."""
    seq = np.random.SeedSequence(run_seed, spawn_key=tuple(int(p) for p in path))
    return int(seq.generate_state(1, np.uint32)[0])


def default_mlp_config(variant: str) -> MlpConfig:
    """Logistic units and 3000 epochs for German, tanh and 4000 for Australian."""
    if variant == AUSTRALIAN:
        return MlpConfig(activation=mlp.TANH, epochs=4000)
    return MlpConfig(activation=mlp.LOGISTIC, epochs=3000)


def default_stacker_config() -> MlpConfig:
    return MlpConfig(hidden_layout=(2,), activation=mlp.LOGISTIC, learning_rate=0.7, epochs=1000)


@dataclass(frozen=True)
class BayesOptions:
    variance_floor: float = bayes.DEFAULT_VARIANCE_FLOOR


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a cross-validation run.

    ``mlp=None`` selects :func:`default_mlp_config` for the variant. The
    ``seed`` fields of the component configs are ignored; per-fold seeds
    come from :func:`derive_seed`.
    """

    dataset_path: str
    variant: str
    k: int = 10
    seed: int = 0
    mlp: MlpConfig | None = None
    ga: GaConfig = field(default_factory=GaConfig)
    bayes: BayesOptions = field(default_factory=BayesOptions)
    stacker: MlpConfig = field(default_factory=default_stacker_config)
    classifiers: tuple[str, ...] = BASE_METHODS
    strategies: tuple[str, ...] = STRATEGIES
    weights: tuple[float, float, float] = ensemble.DEFAULT_WEIGHTS
    threshold: float = ensemble.DEFAULT_THRESHOLD
    inner_folds: int = 5
    stack_on: str = "scores"
    workers: int = 1
    output_dir: str = "results"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.inner_folds < 2:
            raise ValueError("inner_folds must be >= 2")
        for name, allowed in (("classifiers", BASE_METHODS), ("strategies", STRATEGIES)):
            values = tuple(getattr(self, name))
            unknown = set(values) - set(allowed)
            if unknown:
                raise ValueError(f"unknown {name}: {sorted(unknown)}")
            # canonical order keeps reports stable
            object.__setattr__(self, name, tuple(m for m in allowed if m in values))
        if self.strategies and self.classifiers != BASE_METHODS:
            raise ValueError("fusion strategies need all three base classifiers")
        if self.stack_on not in ("scores", "votes"):
            raise ValueError("stack_on must be 'scores' or 'votes'")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        ensemble.Weighted(self.weights, self.threshold)

    @property
    def mlp_config(self) -> MlpConfig:
        return self.mlp if self.mlp is not None else default_mlp_config(self.variant)

    @property
    def methods(self) -> tuple[str, ...]:
        return self.classifiers + self.strategies

    def to_dict(self) -> dict[str, Any]:
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, (MlpConfig, GaConfig, BayesOptions)):
                v = asdict(v)
                v.pop("seed", None)
            elif isinstance(v, tuple):
                v = list(v)
            d[f.name] = v
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any], base_dir: str | Path | None = None) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(d)
        if kw.get("mlp") is not None:
            kw["mlp"] = MlpConfig(**kw["mlp"])
        for key, typ in (("ga", GaConfig), ("bayes", BayesOptions), ("stacker", MlpConfig)):
            if key in kw:
                kw[key] = typ(**kw[key])
        for key in ("classifiers", "strategies", "weights"):
            if key in kw:
                kw[key] = tuple(kw[key])
        if base_dir is not None and "dataset_path" in kw:
            p = Path(kw["dataset_path"])
            if not p.is_absolute():
                kw["dataset_path"] = str(Path(base_dir) / p)
        return cls(**kw)


def load_run_config(path: str | Path) -> RunConfig:
    """Read a JSON run configuration; relative dataset paths resolve against its directory."""
    path = Path(path)
    return RunConfig.from_dict(json.loads(path.read_text()), base_dir=path.parent)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def accuracy(predictions, labels) -> float:
    p, t = np.asarray(predictions), np.asarray(labels)
    if p.shape != t.shape:
        raise DimensionMismatch(f"{p.shape} predictions vs {t.shape} labels")
    if p.size == 0:
        raise EmptyInput("accuracy of an empty prediction list")
    return float((p == t).sum() / p.size)


def confusion(predictions, labels, positive: int = POSITIVE) -> tuple[int, int, int, int]:
    """``(TP, FP, FN, TN)`` with ``positive`` as the positive label."""
    p, t = np.asarray(predictions), np.asarray(labels)
    if p.shape != t.shape:
        raise DimensionMismatch(f"{p.shape} predictions vs {t.shape} labels")
    pp, tp_ = p == positive, t == positive
    return (
        int((pp & tp_).sum()),
        int((pp & ~tp_).sum()),
        int((~pp & tp_).sum()),
        int((~pp & ~tp_).sum()),
    )


# ---------------------------------------------------------------------------
# fold pipeline
# ---------------------------------------------------------------------------

@dataclass
class FoldResult:
    fold: int
    test_ids: list[int]
    labels: np.ndarray
    predictions: dict[str, np.ndarray]
    failures: dict[str, str]
    # record ids behind every normalisation fit and the stacker training set
    encoder_fits: list[list[int]]
    stacker_ids: list[int]
    timings: dict[str, float]


def _base_scores(train: Dataset, test: Dataset, cfg: RunConfig, fold: int, inner: int, log):
    """Train the requested base classifiers on ``train`` and score ``test``.

    Returns ``(scores, failures)``; ``scores[m]`` is a [0, 1] score per test
    record (GA scores are its 0/1 votes).
    """
    encoder = fit_encoder(train)
    log["encoder_fits"].append(list(encoder.fitted_on))
    A, B = encoder.transform(train), encoder.transform(test)
    scores, failures = {}, {}
    timings = log["timings"]
    if "mlp" in cfg.classifiers:
        t0 = time.perf_counter()
        mcfg = replace(cfg.mlp_config, seed=derive_seed(cfg.seed, fold, inner, ROLE_MLP))
        try:
            model = mlp.train_mlp(A.rows, A.labels, mcfg)
        except NonFiniteUpdate as exc:
            failures["mlp"] = str(exc)
        else:
            scores["mlp"] = mlp.unit_scores(model, B.rows)
        timings["mlp"] = timings.get("mlp", 0.0) + time.perf_counter() - t0
    if "bayes" in cfg.classifiers:
        t0 = time.perf_counter()
        model = bayes.train_bayes(train, cfg.bayes.variance_floor)
        scores["bayes"] = bayes.posterior_batch(model, test)[:, 0]
        timings["bayes"] = timings.get("bayes", 0.0) + time.perf_counter() - t0
    if "ga" in cfg.classifiers:
        t0 = time.perf_counter()
        gcfg = replace(cfg.ga, seed=derive_seed(cfg.seed, fold, inner, ROLE_GA))
        best = ga.evolve(A.rows, A.labels, gcfg)
        scores["ga"] = ga.predict_ga_batch(best, B.rows).astype(float)
        timings["ga"] = timings.get("ga", 0.0) + time.perf_counter() - t0
    return scores, failures


def _score_matrix(scores):
    return np.column_stack([scores[m] for m in BASE_METHODS])


def run_fold(d: Dataset, folds, fold: int, cfg: RunConfig) -> FoldResult:
    train_idx, test_idx = folds.train_indices(fold), folds.test_indices(fold)
    train, test = d.subset(train_idx), d.subset(test_idx)
    log = {"encoder_fits": [], "timings": {}}
    scores, failures = _base_scores(train, test, cfg, fold, 0, log)

    predictions = {}
    for m in cfg.classifiers:
        if m in scores:
            predictions[m] = np.where(scores[m] >= 0.5, POSITIVE, NEGATIVE)
    base_ok = all(m in scores for m in BASE_METHODS)
    for s in ("majority", "weighted"):
        if s not in cfg.strategies:
            continue
        if not base_ok:
            failures[s] = "base classifier failed: " + "; ".join(failures.values())
            continue
        rule = ensemble.Majority() if s == "majority" else ensemble.Weighted(cfg.weights, cfg.threshold)
        predictions[s] = ensemble.fuse_batch(rule, _score_matrix(scores))

    stacker_ids: list[int] = []
    if "stacked" in cfg.strategies:
        t0 = time.perf_counter()
        predictions_stacked, reason, stacker_ids = _stack(train, scores, base_ok, failures, cfg, fold, log)
        if reason is None:
            predictions["stacked"] = predictions_stacked
        else:
            failures["stacked"] = reason
        log["timings"]["stacking"] = time.perf_counter() - t0

    return FoldResult(
        fold=fold,
        test_ids=list(test.ids),
        labels=test.labels,
        predictions=predictions,
        failures=failures,
        encoder_fits=log["encoder_fits"],
        stacker_ids=stacker_ids,
        timings=log["timings"],
    )


def _stack(train: Dataset, outer_scores, base_ok, failures, cfg: RunConfig, fold: int, log):
    if not base_ok:
        return None, "base classifier failed: " + "; ".join(failures.values()), []
    inner = stratified_folds(train, cfg.inner_folds, derive_seed(cfg.seed, fold, 0, ROLE_SPLIT))
    oof = np.empty((len(train), 3))
    inner_log = {"encoder_fits": log["encoder_fits"], "timings": {}}
    for i in range(cfg.inner_folds):
        tr, te = inner.train_indices(i), inner.test_indices(i)
        s, fail = _base_scores(train.subset(tr), train.subset(te), cfg, fold, i + 1, inner_log)
        if fail:
            return None, f"inner split {i}: " + "; ".join(fail.values()), []
        oof[te] = _score_matrix(s)
    scfg = replace(cfg.stacker, seed=derive_seed(cfg.seed, fold, 0, ROLE_STACKER))
    use_votes = cfg.stack_on == "votes"
    try:
        meta = ensemble.train_stacker(oof, train.labels, scfg, use_votes)
    except NonFiniteUpdate as exc:
        return None, f"stacker: {exc}", []
    preds = ensemble.fuse_batch(ensemble.Stacked(meta, use_votes), _score_matrix(outer_scores))
    return preds, None, list(train.ids)


def _run_fold_job(args):
    return run_fold(*args)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass
class MethodResult:
    fold_accuracies: list[float | None]
    mean_accuracy: float | None
    std_accuracy: float | None
    confusion: dict[str, int]
    failed_folds: list[int]
    failures: dict[str, str] = field(default_factory=dict)


@dataclass
class EvaluationReport:
    dataset: str
    variant: str
    n_records: int
    k: int
    seed: int
    methods: dict[str, MethodResult]
    references: dict[str, dict[str, float]]
    config: dict[str, Any]
    timings: dict[str, float]
    note: str = METRIC_NOTE

    @property
    def column(self) -> str:
        return DATASET_COLUMN[self.variant]

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "EvaluationReport":
        kw = dict(d)
        kw["methods"] = {name: MethodResult(**m) for name, m in d["methods"].items()}
        return cls(**kw)


def _aggregate(cfg: RunConfig, d: Dataset, results: list[FoldResult], timings) -> EvaluationReport:
    methods = {}
    for m in cfg.methods:
        accs: list[float | None] = []
        conf = np.zeros(4, dtype=np.int64)
        failed, reasons = [], {}
        for r in results:
            if m in r.predictions:
                accs.append(accuracy(r.predictions[m], r.labels))
                conf += confusion(r.predictions[m], r.labels)
            else:
                accs.append(None)
                failed.append(r.fold)
                reasons[str(r.fold)] = r.failures.get(m, "failed")
        ok = [a for a in accs if a is not None]
        mean = float(math.fsum(ok) / len(ok)) if ok else None
        std = float(np.std(ok, ddof=1)) if len(ok) > 1 else (0.0 if ok else None)
        methods[m] = MethodResult(
            accs, mean, std, dict(zip(("tp", "fp", "fn", "tn"), (int(c) for c in conf))), failed, reasons
        )
    return EvaluationReport(
        dataset=Path(cfg.dataset_path).name,
        variant=cfg.variant,
        n_records=len(d),
        k=cfg.k,
        seed=cfg.seed,
        methods=methods,
        references={k: dict(v) for k, v in REFERENCE_BASELINES.items()},
        config=cfg.to_dict(),
        timings=timings,
    )


def cross_validate(cfg: RunConfig, dataset: Dataset | None = None, return_folds: bool = False):
    """Run the full k-fold experiment described by ``cfg``.

    ``dataset`` skips reading ``cfg.dataset_path``. With ``return_folds``
    the per-fold :class:`FoldResult` list is returned as well.
    """
    t_start = time.perf_counter()
    d = dataset if dataset is not None else load_dataset(cfg.dataset_path, cfg.variant)
    folds = stratified_folds(d, cfg.k, cfg.seed)
    t_loaded = time.perf_counter()
    jobs = [(d, folds, f, cfg) for f in range(cfg.k)]
    if cfg.workers == 1:
        results = [_run_fold_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_fold_job, jobs))
    timings = {"load": t_loaded - t_start}
    for r in results:
        for phase, secs in r.timings.items():
            timings[phase] = timings.get(phase, 0.0) + secs
    timings["total"] = time.perf_counter() - t_start
    report = _aggregate(cfg, d, results, timings)
    return (report, results) if return_folds else report


def _pct(x: float | None) -> str:
    return "" if x is None else f"{x * 100:.2f}"


def summary_rows(reports: list[EvaluationReport]) -> list[list[str]]:
    """Method x dataset table, computed methods first, then reference baselines."""
    by_column: dict[str, EvaluationReport] = {}
    for r in reports:
        if r.column in by_column:
            raise ValueError(f"two reports fill the {r.column} column")
        by_column[r.column] = r
    rows = [["method", *SUMMARY_COLUMNS]]
    for m in METHODS:
        if not any(m in r.methods for r in reports):
            continue
        row = [DISPLAY_NAMES[m]]
        for col in SUMMARY_COLUMNS:
            r = by_column.get(col)
            row.append(_pct(r.methods[m].mean_accuracy) if r is not None and m in r.methods else "")
        rows.append(row)
    for name, values in REFERENCE_BASELINES.items():
        rows.append([name, *(f"{values[c]:.2f}" for c in SUMMARY_COLUMNS)])
    return rows


def _csv_text(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def fold_rows(reports: list[EvaluationReport]) -> list[list[str]]:
    rows = [["dataset", "variant", "fold", "method", "status", "accuracy"]]
    for r in reports:
        for m, res in r.methods.items():
            for f, acc in enumerate(res.fold_accuracies):
                rows.append([r.column, r.variant, str(f), m, "ok" if acc is not None else "failed",
                             "" if acc is None else repr(acc)])
    return rows


def figure_rows(reports: list[EvaluationReport]) -> list[list[str]]:
    rows = [["dataset", "method", "fold", "accuracy"]]
    for r in reports:
        for m, res in r.methods.items():
            for f, acc in enumerate(res.fold_accuracies):
                if acc is not None:
                    rows.append([r.column, DISPLAY_NAMES[m], str(f), _pct(acc)])
    return rows


def report_json(report: EvaluationReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def load_report(path: str | Path) -> EvaluationReport:
    return EvaluationReport.from_dict(json.loads(Path(path).read_text()))


def emit_report(reports, out_dir: str | Path, formats=("csv", "json")) -> list[Path]:
    """Write ``summary.csv``, ``folds.csv``, ``figure_data.csv`` and/or ``report.json``.

    ``reports`` is one report or a list (one per summary column). JSON
    output needs exactly one report.
    """
    if isinstance(reports, EvaluationReport):
        reports = [reports]
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        if "csv" in formats:
            for name, rows in (("summary.csv", summary_rows(reports)),
                               ("folds.csv", fold_rows(reports)),
                               ("figure_data.csv", figure_rows(reports))):
                (out / name).write_text(_csv_text(rows))
                written.append(out / name)
        if "json" in formats:
            if len(reports) != 1:
                raise ValueError("report.json holds a single report")
            (out / "report.json").write_text(report_json(reports[0]))
            written.append(out / "report.json")
    except OSError as exc:
        raise IoFailure(f"cannot write report to {out}: {exc}") from exc
    return written
