"""Confusion-matrix metrics, rank-based AUC, and the experiment harnesses.

Male is the positive class throughout; per-class accuracies are therefore
recall of the male and female classes respectively.  The harnesses wire the
full pipeline: feature build, L2 normalization, class weights computed on
the training partition only, fit, and held-out evaluation.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from . import classifiers
from .classifiers import FitConfig, default_grid
from .corpus import RatingCorpus
from .features import (
    balanced_weights,
    build_normalized_features,
    make_holdout_split,
    make_stratified_kfold,
)
from .stereotype import StereotypeModel

METRIC_NAMES = (
    "accuracy",
    "accuracy_male",
    "accuracy_female",
    "precision",
    "recall",
    "f_measure",
    "auc",
)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    accuracy_male: float
    accuracy_female: float
    precision: float
    recall: float
    f_measure: float
    auc: float
    degenerate: tuple[str, ...] = ()  # ratios that were 0/0, reported as 0

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in METRIC_NAMES}
        out["degenerate"] = list(self.degenerate)
        return out


def confusion(predictions: np.ndarray, labels: np.ndarray) -> ConfusionMatrix:
    """Count outcomes with male (label 1) as the positive class."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ValueError("predictions and labels must have equal length")
    if predictions.size == 0:
        raise ValueError("cannot build a confusion matrix from empty inputs")
    pos = labels == 1
    pred_pos = predictions == 1
    return ConfusionMatrix(
        tp=int((pred_pos & pos).sum()),
        fp=int((pred_pos & ~pos).sum()),
        tn=int((~pred_pos & ~pos).sum()),
        fn=int((~pred_pos & pos).sum()),
    )


def auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Rank-based AUC: P(random male scored above random female), ties at 0.5."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    ranks = rankdata(scores, method="average")
    rank_sum = float(ranks[labels == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_points(scores: np.ndarray, labels: np.ndarray) -> list[tuple[float, float, float]]:
    """(fpr, tpr, threshold) triples over all distinct score thresholds."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    order = np.argsort(-scores, kind="stable")
    n_pos = int((labels == 1).sum())
    n_neg = labels.size - n_pos
    points = [(0.0, 0.0, float("inf"))]
    tp = fp = 0
    for i, idx in enumerate(order):
        if labels[idx] == 1:
            tp += 1
        else:
            fp += 1
        last = i + 1 == labels.size
        if last or scores[order[i + 1]] != scores[idx]:
            points.append((fp / n_neg, tp / n_pos, float(scores[idx])))
    return points


def write_roc_csv(scores: np.ndarray, labels: np.ndarray, path) -> None:
    """ROC operating points as CSV (fpr, tpr, threshold) for plotting."""
    import csv
    from pathlib import Path

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fpr", "tpr", "threshold"])
        for fpr, tpr, threshold in roc_points(scores, labels):
            writer.writerow([repr(fpr), repr(tpr), repr(threshold)])


def write_fold_csv(report: "CvReport", path) -> None:
    """Per-fold metric rows as CSV, one line per fold plus mean and sigma."""
    import csv
    from pathlib import Path

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fold", *METRIC_NAMES])
        for i, fold in enumerate(report.folds):
            writer.writerow([i, *(repr(getattr(fold, n)) for n in METRIC_NAMES)])
        writer.writerow(["mean", *(repr(report.mean[n]) for n in METRIC_NAMES)])
        writer.writerow(["std", *(repr(report.std[n]) for n in METRIC_NAMES)])


def metrics(cm: ConfusionMatrix, scores: np.ndarray, labels: np.ndarray) -> MetricSet:
    """Assemble the full metric set; 0/0 ratios report as flagged zeros."""
    degenerate: list[str] = []

    def ratio(num: int, den: int, name: str) -> float:
        if den == 0:
            degenerate.append(name)
            return 0.0
        return num / den

    accuracy = ratio(cm.tp + cm.tn, cm.total, "accuracy")
    acc_male = ratio(cm.tp, cm.tp + cm.fn, "accuracy_male")
    acc_female = ratio(cm.tn, cm.tn + cm.fp, "accuracy_female")
    precision = ratio(cm.tp, cm.tp + cm.fp, "precision")
    recall = acc_male
    if precision + recall == 0:
        degenerate.append("f_measure")
        f_measure = 0.0
    else:
        f_measure = 2.0 * precision * recall / (precision + recall)
    return MetricSet(
        accuracy=accuracy,
        accuracy_male=acc_male,
        accuracy_female=acc_female,
        precision=precision,
        recall=recall,
        f_measure=f_measure,
        auc=auc(scores, labels),
        degenerate=tuple(degenerate),
    )


@dataclass(frozen=True)
class EvalReport:
    """One harness run: metrics plus the confusion counts behind them."""

    metrics: MetricSet
    confusion: ConfusionMatrix
    harness: str
    classifier: str
    with_gs: bool
    n_train: int
    n_test: int
    converged: bool
    config: FitConfig

    def to_dict(self) -> dict:
        return {
            "harness": self.harness,
            "classifier": self.classifier,
            "with_gs": self.with_gs,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "converged": self.converged,
            "config": self.config.to_dict(),
            "confusion": self.confusion.to_dict(),
            "metrics": self.metrics.to_dict(),
        }


@dataclass(frozen=True)
class CvReport:
    folds: tuple[MetricSet, ...]
    mean: dict[str, float]
    std: dict[str, float]  # population sigma over folds (divisor k)
    k: int
    classifier: str
    with_gs: bool
    chosen_configs: tuple[FitConfig, ...] = field(default=())
    std_divisor: str = "k"

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "classifier": self.classifier,
            "with_gs": self.with_gs,
            "std_divisor": self.std_divisor,
            "folds": [m.to_dict() for m in self.folds],
            "mean": dict(self.mean),
            "std": dict(self.std),
            "chosen_configs": [c.to_dict() for c in self.chosen_configs],
        }


def _fold_summary(folds: Sequence[MetricSet]) -> tuple[dict, dict]:
    mean: dict[str, float] = {}
    std: dict[str, float] = {}
    for name in METRIC_NAMES:
        vals = np.array([getattr(m, name) for m in folds])
        mean[name] = float(vals.mean())
        std[name] = float(vals.std())  # population sigma: divisor k
    return mean, std


def _prepared_features(
    corpus: RatingCorpus, model: StereotypeModel | None, mode: str, gs_scaling: str
):
    return build_normalized_features(corpus, model, mode=mode, gs_scaling=gs_scaling)


def _evaluate_split(fm, train_idx, test_idx, kind, config) -> tuple[MetricSet, ConfusionMatrix, bool]:
    labels = fm.labels
    weights = balanced_weights(labels[train_idx])
    model = classifiers.fit(kind, fm.X[train_idx], labels[train_idx], weights, config)
    scores = classifiers.predict_scores(model, fm.X[test_idx])
    preds = classifiers.predict_classes(model, fm.X[test_idx])
    cm = confusion(preds, labels[test_idx])
    ms = metrics(cm, scores, labels[test_idx])
    return ms, cm, classifiers.model_converged(model)


def run_holdout(
    corpus: RatingCorpus,
    model: StereotypeModel | None,
    kind: str,
    config: FitConfig | None = None,
    test_fraction: float = 0.2,
    seed: int = 0,
    mode: str = "cardinality",
    gs_scaling: str = "unit",
) -> EvalReport:
    """Stratified holdout: normalize, weight on the training side, fit, score."""
    config = config or classifiers.default_config(kind)
    fm = _prepared_features(corpus, model, mode, gs_scaling)
    plan = make_holdout_split(fm.labels, test_fraction, seed)
    train_idx, test_idx = plan.holdout_indices()
    ms, cm, converged = _evaluate_split(fm, train_idx, test_idx, kind, config)
    return EvalReport(
        metrics=ms,
        confusion=cm,
        harness=f"holdout:{test_fraction}",
        classifier=kind,
        with_gs=model is not None,
        n_train=int(train_idx.size),
        n_test=int(test_idx.size),
        converged=converged,
        config=config,
    )


def _max_workers() -> int:
    raw = os.environ.get("GS_AUDIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_cv(
    corpus: RatingCorpus,
    model: StereotypeModel | None,
    kind: str,
    grid: Sequence[FitConfig] | None = None,
    k: int = 10,
    seed: int = 0,
    mode: str = "cardinality",
    gs_scaling: str = "unit",
) -> CvReport:
    """Stratified k-fold CV with per-fold grid search on the training folds.

    Each outer fold: pick the best config by inner 3-fold AUC on the training
    side, refit it there, evaluate once on the held-out fold.  Mean and
    population sigma are reported over the k fold metric sets.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    grid = list(grid) if grid is not None else default_grid(kind)
    fm = _prepared_features(corpus, model, mode, gs_scaling)
    plan = make_stratified_kfold(fm.labels, k, seed)

    def one_fold(fold: int) -> tuple[MetricSet, FitConfig]:
        train_idx, test_idx = plan.fold_indices(fold)
        search = classifiers.grid_search(
            fm.X[train_idx], fm.labels[train_idx], kind, grid, inner_k=3, seed=seed
        )
        ms, _, _ = _evaluate_split(fm, train_idx, test_idx, kind, search.best)
        return ms, search.best

    workers = _max_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_fold, range(k)))
    else:
        results = [one_fold(fold) for fold in range(k)]

    folds = tuple(ms for ms, _ in results)
    chosen = tuple(cfg for _, cfg in results)
    mean, std = _fold_summary(folds)
    return CvReport(
        folds=folds,
        mean=mean,
        std=std,
        k=k,
        classifier=kind,
        with_gs=model is not None,
        chosen_configs=chosen,
    )
