"""Stratified k-fold cross-validation, pooled classification metrics and report tables."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import features as feat
from .errors import ValidationError

FOLD_MODES = ("stratified", "stratified_grouped")
NORM_SCOPES = ("fold", "global")


@dataclass
class FoldPlan:
    k: int
    mode: str
    seed: int
    assignments: np.ndarray  # sample index -> fold index

    def split(self, fold: int):
        test = self.assignments == fold
        return np.flatnonzero(~test), np.flatnonzero(test)


def _deal(items_by_class, k, rng):
    """Shuffle each class and deal round-robin, continuing where the previous class stopped."""
    out = {}
    offset = 0
    for items in items_by_class:
        items = np.asarray(items)[rng.permutation(len(items))]
        for j, item in enumerate(items):
            out[item] = (offset + j) % k
        offset += len(items)
    return out


def make_folds(labels, subject_ids=None, k: int = 10, mode: str = "stratified",
               seed: int = 0) -> FoldPlan:
    labels = np.asarray(labels)
    if mode not in FOLD_MODES:
        raise ValidationError(f"unknown fold mode {mode!r}; expected one of {FOLD_MODES}")
    classes = np.unique(labels)
    if len(classes) < 2:
        raise ValidationError("cross-validation needs both classes")
    if k < 2:
        raise ValidationError("k must be >= 2")
    rng = np.random.default_rng(seed)

    if mode == "stratified":
        by_class = [np.flatnonzero(labels == c) for c in classes]
        smallest = min(map(len, by_class))
        if k > smallest:
            raise ValidationError(f"k={k} exceeds minority-class count {smallest}")
        dealt = _deal(by_class, k, rng)
        assign = np.array([dealt[i] for i in range(len(labels))])
    else:
        if subject_ids is None:
            raise ValidationError("grouped folds need subject ids")
        sids = np.asarray(subject_ids)
        subjects = list(dict.fromkeys(sids))
        subj_label = {}
        for s, lab in zip(sids, labels):
            if subj_label.setdefault(s, lab) != lab:
                raise ValidationError(f"subject {s} carries more than one label")
        by_class = [[s for s in subjects if subj_label[s] == c] for c in classes]
        smallest = min(map(len, by_class))
        if k > smallest:
            raise ValidationError(f"k={k} exceeds minority-class subject count {smallest}")
        dealt = _deal(by_class, k, rng)
        assign = np.array([dealt[s] for s in sids])
    return FoldPlan(k, mode, seed, assign)


@dataclass
class MetricsReport:
    fold_accuracy: list
    mean_accuracy: float
    std_accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int
    per_fold: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def confusion(y_true, y_pred):
    y_true = np.asarray(y_true).astype(bool)
    y_pred = np.asarray(y_pred).astype(bool)
    tp = int(np.sum(y_true & y_pred))
    fp = int(np.sum(~y_true & y_pred))
    fn = int(np.sum(y_true & ~y_pred))
    tn = int(np.sum(~y_true & ~y_pred))
    return tp, fp, fn, tn


def prf(tp, fp, fn):
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _run_fold(X, y, train, test, classifier, fold, scope):
    if len(np.unique(y[train])) < 2:
        raise ValidationError(f"fold {fold}: training split holds a single class")
    if scope == "fold":
        stats = feat.fit_normalizer(X[train])
        Xtr, Xte = feat.transform(X[train], stats), feat.transform(X[test], stats)
    else:
        Xtr, Xte = X[train], X[test]
    est = classifier.build(fold).fit(Xtr, y[train])
    return np.asarray(est.predict(Xte))


def cross_validate(X, y, subject_ids, classifier, plan: FoldPlan, scope: str = "fold",
                   jobs: int = 1) -> MetricsReport:
    """Score ``classifier`` on each held-out fold and pool the predictions.

    ``classifier`` needs a ``build(fold_index)`` method returning an object with
    ``fit(X, y)`` / ``predict(X)`` on {0, 1} labels. With ``scope='global'`` the whole
    matrix is z-scored once before splitting; with ``'fold'`` the statistics come from
    the training split only.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if not (len(X) == len(y) == len(plan.assignments)) or (
            subject_ids is not None and len(subject_ids) != len(y)):
        raise ValidationError("X, y, subject ids and fold plan differ in length")
    if scope not in NORM_SCOPES:
        raise ValidationError(f"unknown normalisation scope {scope!r}")
    if scope == "global":
        X = feat.transform(X, feat.fit_normalizer(X))

    splits = [plan.split(f) for f in range(plan.k)]
    args = [(X, y, tr, te, classifier, f, scope) for f, (tr, te) in enumerate(splits)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            preds = list(pool.map(_run_fold, *zip(*args)))
    else:
        preds = [_run_fold(*a) for a in args]

    pooled = np.empty(len(y), dtype=np.int64)
    fold_acc, per_fold = [], []
    for f, ((_, test), pred) in enumerate(zip(splits, preds)):
        pooled[test] = pred
        tp, fp, fn, tn = confusion(y[test], pred)
        p, r, f1 = prf(tp, fp, fn)
        acc = (tp + tn) / len(test)
        fold_acc.append(acc)
        per_fold.append({"fold": f, "n": int(len(test)), "accuracy": acc, "precision": p,
                         "recall": r, "f1": f1, "tp": tp, "fp": fp, "fn": fn, "tn": tn})
    tp, fp, fn, tn = confusion(y, pooled)
    p, r, f1 = prf(tp, fp, fn)
    return MetricsReport(fold_acc, float(np.mean(fold_acc)), float(np.std(fold_acc)),
                         p, r, f1, tp, fp, fn, tn, per_fold)


def compare_kernels(X, y, subject_ids, kernels, make_classifier, plan: FoldPlan,
                    scope: str = "fold", jobs: int = 1) -> list:
    """One cross-validation per kernel on a shared fold plan: ``[(kernel, report), ...]``."""
    return [(k, cross_validate(X, y, subject_ids, make_classifier(k), plan, scope, jobs))
            for k in kernels]


def format_kernel_table(rows) -> str:
    lines = [f"{'Kernel':<10}{'Mean Accuracy':>16}{'Std':>10}"]
    for kernel, rep in rows:
        lines.append(f"{kernel:<10}{100 * rep.mean_accuracy:>15.2f}%{rep.std_accuracy:>10.4f}")
    return "\n".join(lines)


def format_model_table(rows) -> str:
    lines = [f"{'Model':<16}{'Accuracy':>10}{'Precision':>11}{'Recall':>8}{'F1':>8}"]
    for name, rep in rows:
        lines.append(f"{name:<16}{100 * rep.mean_accuracy:>9.2f}%{rep.precision:>11.2f}"
                     f"{rep.recall:>8.2f}{rep.f1:>8.2f}")
    return "\n".join(lines)


def format_fold_table(rep: MetricsReport) -> str:
    lines = [f"{'Fold':>4}{'n':>6}{'Accuracy':>10}"]
    for row in rep.per_fold:
        lines.append(f"{row['fold']:>4}{row['n']:>6}{row['accuracy']:>10.4f}")
    return "\n".join(lines)


def dumps(obj) -> str:
    """Canonical JSON used for every machine-readable report."""
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o)}")
