"""Confusion-matrix metrics, ROC analysis, cross-validation, grid search and timing.

Class 1 (negative sentiment) is the detection target: ``tp`` counts correctly
flagged negative tweets and the ROC curve is drawn for label 1.
"""
from __future__ import annotations

import itertools
import json
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from ._random import child_seed
from .corpus import Dataset, split_indices, stratified_fold_indices
from .models import FAMILIES, canonical_family
from .pipeline import PreprocessOptions, dataset_tokens, fit_pipeline

UNDEFINED = None


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def confusion(pred: Sequence[int], truth: Sequence[int]) -> ConfusionMatrix:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {len(pred)} predictions, {len(truth)} labels")
    if pred.size == 0:
        raise ValueError("need at least one prediction")
    return ConfusionMatrix(tp=int(np.sum((pred == 1) & (truth == 1))),
                           tn=int(np.sum((pred == 0) & (truth == 0))),
                           fp=int(np.sum((pred == 1) & (truth == 0))),
                           fn=int(np.sum((pred == 0) & (truth == 1))))


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else UNDEFINED


def _f1(p: float | None, r: float | None) -> float | None:
    if p is None or r is None:
        return UNDEFINED
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


@dataclass(frozen=True)
class MetricsReport:
    """Accuracy plus per-class precision/recall/F1; ``None`` marks an undefined cell."""

    acc: float
    precision: dict[int, float | None]
    recall: dict[int, float | None]
    f1: dict[int, float | None]
    support: dict[int, int]
    cm: ConfusionMatrix

    def row(self) -> dict[str, Any]:
        out: dict[str, Any] = {"acc": self.acc}
        for c in (0, 1):
            out[f"precision_{c}"] = self.precision[c]
            out[f"recall_{c}"] = self.recall[c]
            out[f"f1_{c}"] = self.f1[c]
        out.update(tp=self.cm.tp, tn=self.cm.tn, fp=self.cm.fp, fn=self.cm.fn)
        return out


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    if cm.total <= 0:
        raise ValueError("metrics of an empty confusion matrix")
    p1, r1 = _ratio(cm.tp, cm.tp + cm.fp), _ratio(cm.tp, cm.tp + cm.fn)
    p0, r0 = _ratio(cm.tn, cm.tn + cm.fn), _ratio(cm.tn, cm.tn + cm.fp)
    return MetricsReport(acc=(cm.tp + cm.tn) / cm.total,
                         precision={0: p0, 1: p1}, recall={0: r0, 1: r1},
                         f1={0: _f1(p0, r0), 1: _f1(p1, r1)},
                         support={0: cm.tn + cm.fp, 1: cm.tp + cm.fn}, cm=cm)


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def trapezoid_auc(fpr: np.ndarray, tpr: np.ndarray) -> float:
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


def roc_curve(scores: Sequence[float], truth: Sequence[int]) -> RocCurve:
    """ROC for class 1, sweeping the threshold over distinct scores from high to low.

    Samples with equal scores enter together, which makes the trapezoidal area
    equal to the tie-corrected Mann-Whitney statistic.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth)
    if scores.shape != truth.shape:
        raise ValueError("scores and labels differ in length")
    n_pos = int(np.sum(truth == 1))
    n_neg = int(np.sum(truth == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both classes in the ground truth")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    order = np.argsort(-scores, kind="stable")
    s, t = scores[order], truth[order]
    tps = np.cumsum(t == 1)
    fps = np.cumsum(t == 0)
    group_end = np.r_[np.flatnonzero(np.diff(s) != 0), len(s) - 1]
    tpr = np.r_[0.0, tps[group_end] / n_pos]
    fpr = np.r_[0.0, fps[group_end] / n_neg]
    thresholds = np.r_[np.inf, s[group_end]]
    return RocCurve(fpr, tpr, thresholds, trapezoid_auc(fpr, tpr))


# --- grids ---------------------------------------------------------------------

_DOMAIN: dict[str, Callable[[Any], bool]] = {
    "alpha": lambda v: v > 0,
    "c": lambda v: v > 0,
    "lr": lambda v: v is None or v > 0,
    "epochs": lambda v: int(v) == v and v >= 1,
    "k": lambda v: int(v) == v and v >= 1,
    "n_trees": lambda v: int(v) == v and v >= 1,
    "n_rounds": lambda v: int(v) == v and v >= 1,
    "hidden": lambda v: int(v) == v and v >= 1,
    "max_depth": lambda v: v is None or (int(v) == v and v >= 1),
    "min_leaf": lambda v: int(v) == v and v >= 1,
    "min_df": lambda v: int(v) == v and v >= 1,
    "penalty": lambda v: v in ("l2", "none"),
    "idf": lambda v: v in ("paper", "smooth", "none"),
    "norm": lambda v: v in (None, "l2"),
    "ngram_range": lambda v: len(v) == 2 and 1 <= v[0] <= v[1],
}


@dataclass(frozen=True)
class HyperGrid:
    params: dict[str, tuple]

    def __post_init__(self):
        clean = {}
        for name, values in self.params.items():
            values = tuple(tuple(v) if isinstance(v, list) else v for v in values)
            if not values:
                raise ValueError(f"grid parameter {name!r} has no candidate values")
            check = _DOMAIN.get(name)
            for v in values:
                if check is not None and not check(v):
                    raise ValueError(f"grid value {name}={v!r} outside its domain")
            clean[name] = values
        object.__setattr__(self, "params", clean)

    def cells(self) -> list[dict[str, Any]]:
        """Cartesian product in declaration order (first parameter varies slowest)."""
        names = list(self.params)
        return [dict(zip(names, combo)) for combo in itertools.product(*self.params.values())]

    def __len__(self) -> int:
        return math.prod(len(v) for v in self.params.values())


def load_default_grids(path: str | Path | None = None) -> dict[str, HyperGrid]:
    if path is None:
        text = resources.files("disaster_tweets.data").joinpath("default_grids.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    doc = json.loads(text)
    return {canonical_family(f): HyperGrid(g) for f, g in doc.items()}


# --- cross-validation and grid search ---------------------------------------------

@dataclass
class CVResult:
    family: str
    config: dict[str, Any]
    folds: list[MetricsReport]
    assignment: np.ndarray
    n_fits: int

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean([r.acc for r in self.folds]))

    def mean_of(self, key: str) -> float | None:
        vals = [r.row()[key] for r in self.folds]
        vals = [v for v in vals if v is not None]
        return float(np.mean(vals)) if vals else None


def _tokens_and_labels(ds, docs, preprocess):
    if isinstance(ds, Dataset):
        labels = ds.labels()
        docs = dataset_tokens(ds, preprocess) if docs is None else docs
    else:
        docs, labels = ds
        labels = np.asarray(labels)
    return list(docs), labels


def _fold_eval(family, config, docs, labels, train_idx, test_idx, seed):
    fitted = fit_pipeline(family, config, [docs[i] for i in train_idx], labels[train_idx], seed)
    pred = fitted.predict([docs[i] for i in test_idx])
    return metrics(confusion(pred, labels[test_idx]))


def cross_validate(family: str, config: dict[str, Any] | None, ds, k: int = 5, seed: int = 0,
                   docs=None, preprocess: PreprocessOptions | None = None,
                   n_jobs: int = 1) -> CVResult:
    """Stratified k-fold CV: fold ``i`` is scored by a model fit on the other folds.

    ``k`` equal to the number of samples gives leave-one-out.

    ``ds`` is a Dataset or a ``(token_docs, labels)`` pair; the vocabulary is
    rebuilt inside every training split.
    """
    docs, labels = _tokens_and_labels(ds, docs, preprocess)
    if k == len(labels):
        # leave-one-out: every sample is its own fold, stratification is vacuous
        assignment = np.arange(k)
    else:
        assignment = stratified_fold_indices(labels, k, seed)
    jobs = []
    for fold in range(k):
        train_idx = np.flatnonzero(assignment != fold)
        test_idx = np.flatnonzero(assignment == fold)
        jobs.append((train_idx, test_idx, child_seed(seed, "cv-fold", fold)))
    run = lambda j: _fold_eval(family, config, docs, labels, *j)  # noqa: E731
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            reports = list(pool.map(run, jobs))
    else:
        reports = [run(j) for j in jobs]
    return CVResult(canonical_family(family), dict(config or {}), reports, assignment, k)


@dataclass
class GridSearchResult:
    family: str
    best_index: int
    cells: list[CVResult]
    metric: str = "acc"

    @property
    def best(self) -> CVResult:
        return self.cells[self.best_index]

    @property
    def best_config(self) -> dict[str, Any]:
        return self.best.config

    @property
    def n_fits(self) -> int:
        return sum(c.n_fits for c in self.cells)

    def table(self) -> list[dict[str, Any]]:
        """One row per (grid cell, fold), winner flagged."""
        rows = []
        for ci, cell in enumerate(self.cells):
            for fi, rep in enumerate(cell.folds):
                row = {"cell": ci, "fold": fi, "family": self.family,
                       "config": json.dumps(cell.config, sort_keys=True),
                       "best": int(ci == self.best_index)}
                row.update(rep.row())
                rows.append(row)
        return rows


def grid_search(family: str, grid: HyperGrid | dict, ds, k: int = 5, seed: int = 0,
                docs=None, preprocess: PreprocessOptions | None = None, n_jobs: int = 1,
                metric: str = "acc") -> GridSearchResult:
    """Exhaustive CV over the grid; the best mean ``metric`` wins, earliest cell on ties.

    ``metric`` is ``"acc"`` or a per-class key such as ``"f1_1"``.
    """
    grid = grid if isinstance(grid, HyperGrid) else HyperGrid(grid)
    cells = grid.cells()
    if not cells:
        raise ValueError("empty grid")
    docs, labels = _tokens_and_labels(ds, docs, preprocess)
    run = lambda cfg: cross_validate(family, cfg, (docs, labels), k, seed)  # noqa: E731
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(cfg) for cfg in cells]
    scores = [r.mean_accuracy if metric == "acc" else (r.mean_of(metric) or -math.inf)
              for r in results]
    best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    return GridSearchResult(canonical_family(family), best, results, metric)


# --- benchmarking -----------------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkRecord:
    family: str
    disaster_id: str
    fit_seconds: float
    predict_seconds: float
    accuracy: float
    auc: float | None = None
    report: MetricsReport | None = field(default=None, compare=False, repr=False)

    @property
    def total_seconds(self) -> float:
        return self.fit_seconds + self.predict_seconds


def benchmark(families: Sequence[str], ds: Dataset, train_fraction: float = 0.30, seed: int = 0,
              configs: dict[str, dict] | None = None, repeats: int = 3,
              include_vectorize: bool = False, preprocess: PreprocessOptions | None = None,
              docs=None) -> list[BenchmarkRecord]:
    """Time fit and full test-set prediction for each family on one shared split.

    Times are medians over ``repeats`` runs of a monotonic clock. Vectorization
    is timed only with ``include_vectorize``; loading and tokenization never are.
    """
    from .models import TrainingSet, fit_model
    from .pipeline import split_config

    docs, labels = _tokens_and_labels(ds, docs, preprocess)
    train_idx, test_idx = split_indices(labels.tolist(), train_fraction, seed)
    train_docs = [docs[i] for i in train_idx]
    test_docs = [docs[i] for i in test_idx]
    y_train, y_test = labels[train_idx], labels[test_idx]
    configs = configs or {}
    records = []
    for fam in families:
        fam = canonical_family(fam)
        features, model_cfg = split_config(configs.get(fam))
        model_seed = child_seed(seed, "benchmark", fam)
        fit_times, pred_times = [], []
        for _ in range(repeats):
            t0 = time.perf_counter()
            vocab = features.fit(train_docs)
            X_train = features.transform(train_docs, vocab)
            t1 = time.perf_counter()
            model = fit_model(fam, TrainingSet(X_train, y_train, len(vocab)), model_cfg, model_seed)
            t2 = time.perf_counter()
            X_test = features.transform(test_docs, vocab)
            t3 = time.perf_counter()
            scores = model.decision_scores(X_test)
            pred = (scores > model.threshold).astype(np.int64)
            t4 = time.perf_counter()
            fit_times.append((t2 - t0) if include_vectorize else (t2 - t1))
            pred_times.append((t4 - t2) if include_vectorize else (t4 - t3))
        rep = metrics(confusion(pred, y_test))
        auc = roc_curve(scores, y_test).auc if len(set(y_test.tolist())) == 2 else None
        records.append(BenchmarkRecord(fam, _disaster_id(ds), statistics.median(fit_times),
                                       statistics.median(pred_times), rep.acc, auc, rep))
    order = {f: i for i, f in enumerate(FAMILIES)}
    return sorted(records, key=lambda r: (r.disaster_id, order.get(r.family, len(order))))


def _disaster_id(ds) -> str:
    return ds.disaster_id if isinstance(ds, Dataset) else ""
