"""Cross-validation, metrics and the three experiment runners.

Every :class:`EvalReport` stores the per-fold confusion matrices it was
computed from, so all headline numbers can be recomputed from the report
itself.  Aggregation is micro: fold confusion matrices are summed before any
metric is taken.
"""
from __future__ import annotations

import itertools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classify import ClassifierSpec, ForestParams, SvmParams, canonical_mask, fit_classifier, mask_columns
from .dataset import (COHYP, HYPER, MERO, RANDOM, LabeledPair, PairDataset, build_binary_sample,
                      stratified_folds)
from .features import FEATURE_NAMES, FeatureConfig, batch_features
from .graph import DTGraph
from .rng import GENERATOR, derive_seed

REPORT_SCHEMA = 1
METRICS = ("accuracy", "macro_f1", "positive_f1")


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "Confusion":
        t = np.asarray(y_true) == 1
        p = np.asarray(y_pred) == 1
        return cls(int(np.sum(t & p)), int(np.sum(~t & p)), int(np.sum(t & ~p)), int(np.sum(~t & ~p)))

    def as_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def _prf(tp: int, fp: int, fn: int) -> dict:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def metrics(c: Confusion) -> dict:
    """Accuracy, per-class precision/recall/F1, macro F1 and positive-class F1.

    Undefined ratios (zero denominators) are reported as 0.
    """
    pos = _prf(c.tp, c.fp, c.fn)
    neg = _prf(c.tn, c.fn, c.fp)
    return {
        "accuracy": (c.tp + c.tn) / c.n if c.n else 0.0,
        "positive": pos,
        "negative": neg,
        "macro_f1": (pos["f1"] + neg["f1"]) / 2,
        "positive_f1": pos["f1"],
    }


@dataclass
class EvalReport:
    name: str
    folds: list[Confusion]
    config: dict
    dataset: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def confusion(self) -> Confusion:
        total = Confusion()
        for c in self.folds:
            total = total + c
        return total

    @property
    def metrics(self) -> dict:
        return metrics(self.confusion)

    @property
    def accuracy(self) -> float:
        return self.metrics["accuracy"]

    @property
    def fold_accuracies(self) -> list[float]:
        return [metrics(c)["accuracy"] for c in self.folds]

    def score(self, metric: str) -> float:
        if metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        return self.metrics[metric]

    def to_dict(self, include_timings: bool = False) -> dict:
        accs = self.fold_accuracies
        doc = {
            "schema": REPORT_SCHEMA,
            "name": self.name,
            "config": self.config,
            "dataset": self.dataset,
            "folds": [c.as_dict() for c in self.folds],
            "confusion": self.confusion.as_dict(),
            "metrics": self.metrics,
            "fold_accuracy_mean": float(np.mean(accs)) if accs else 0.0,
        }
        if include_timings:
            doc["timings"] = self.timings
        return doc

    def to_json(self, include_timings: bool = False) -> str:
        return json.dumps(self.to_dict(include_timings), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(d["name"], [Confusion(**c) for c in d["folds"]], d["config"], d.get("dataset", {}),
                   d.get("timings", {}))


def _fold_job(args):
    X, y, spec, train, test = args
    model = fit_classifier(spec, X[train], y[train])
    return Confusion.from_predictions(y[test], model.predict(X[test]))


def cross_validate(
    X,
    y,
    spec: ClassifierSpec,
    k: int = 10,
    seed: int = 0,
    name: str | None = None,
    config: dict | None = None,
    dataset: dict | None = None,
    workers: int = 1,
) -> EvalReport:
    """Stratified k-fold CV of ``spec`` on 5-wide feature rows ``X``.

    Standardisation is fitted on each training fold only.  Fold ``f`` trains
    with classifier seed ``derive_seed(seed, f)``; results are independent of
    ``workers``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    t0 = time.perf_counter()
    folds = stratified_folds(y, k, seed)
    jobs = [(X, y, spec.with_seed(derive_seed(seed, f)), tr, te) for f, (tr, te) in enumerate(folds)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            confusions = list(ex.map(_fold_job, jobs))
    else:
        confusions = [_fold_job(j) for j in jobs]
    cfg = {"classifier": spec.to_dict(), "folds": k, "seed": seed, "rng": GENERATOR,
           "fold_seed_rule": "derive_seed(seed, fold)", "aggregation": "micro (summed confusion)"}
    cfg.update(config or {})
    ds = {"size": int(len(y)), "positives": int(np.sum(y == 1)), "negatives": int(np.sum(y != 1))}
    ds.update(dataset or {})
    return EvalReport(name or spec.name, confusions, cfg, ds,
                      {"cv_seconds": time.perf_counter() - t0})


def all_masks(available: Sequence[str] = FEATURE_NAMES) -> list[tuple[str, ...]]:
    """Every non-empty subset of ``available`` in canonical order (size, then position)."""
    avail = canonical_mask(available)
    return [m for r in range(1, len(avail) + 1) for m in itertools.combinations(avail, r)]


def _mask_rank(mask: tuple[str, ...]) -> tuple:
    return (len(mask), mask_columns(mask))


def feature_sweep(
    X,
    y,
    spec: ClassifierSpec,
    k: int = 10,
    seed: int = 0,
    metric: str = "accuracy",
    masks: Sequence[Sequence[str]] | None = None,
    workers: int = 1,
) -> list[tuple[tuple[str, ...], float]]:
    """CV score of every feature subset, best first.

    Columns of ``X`` holding non-finite values count as absent; requesting a
    mask that uses one raises ``ValueError``, and the default sweep covers
    the non-empty subsets of the present columns (31 when all are present).
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    X = np.asarray(X, dtype=np.float64)
    present = [n for i, n in enumerate(FEATURE_NAMES) if np.isfinite(X[:, i]).all()]
    if masks is None:
        masks = all_masks(present)
    out = []
    for m in masks:
        m = canonical_mask(m)
        missing = [n for n in m if n not in present]
        if missing:
            raise ValueError(f"mask {'+'.join(m)} uses absent feature(s) {', '.join(missing)}")
        Xm = np.where(np.isfinite(X), X, 0.0)
        rep = cross_validate(Xm, y, spec.with_mask(m), k, seed, workers=workers)
        out.append((m, rep.score(metric)))
    out.sort(key=lambda ms: (-ms[1], _mask_rank(ms[0])))
    return out


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class ExperimentConfig:
    features: FeatureConfig = FeatureConfig()
    folds: int = 10
    seed: int = 0
    svm: SvmParams = SvmParams()
    forest: ForestParams = ForestParams()
    n_per_class: int = 1000
    workers: int = 1
    graph_path: str | None = None

    def echo(self, g: DTGraph) -> dict:
        return {
            "graph": {"path": self.graph_path, "sha256": g.fingerprint(), "nodes": g.node_count,
                      "edges": g.edge_count, "ew_max": g.ew_max},
            "features": self.features.as_dict(),
        }


def featurize(g: DTGraph, ds: PairDataset, cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray, dict]:
    vecs = batch_features(g, ds.words, cfg.features, workers=cfg.workers)
    X = np.array([v.as_tuple() for v in vecs], dtype=np.float64).reshape(len(vecs), len(FEATURE_NAMES))
    info = {"class_counts": ds.class_counts(), "positive_label": ds.positive_label,
            "oov_pairs": sum(v.oov for v in vecs),
            "unreachable_pairs": sum((not v.reachable) and not v.oov for v in vecs),
            "provenance": {k: str(v) for k, v in ds.provenance.items()}}
    return X, ds.binary_targets(), info


def _run(name, X, y, spec, cfg: ExperimentConfig, g, info, task=None) -> EvalReport:
    echo = cfg.echo(g)
    if task:
        echo["task"] = task
    return cross_validate(X, y, spec, cfg.folds, cfg.seed, name=name, config=echo,
                          dataset=info, workers=cfg.workers)


def _spec(kind: str, mask, cfg: ExperimentConfig) -> ClassifierSpec:
    return ClassifierSpec(kind, tuple(mask), cfg.svm, cfg.forest)


def run_experiment_1(g: DTGraph, ds: PairDataset, cfg: ExperimentConfig = ExperimentConfig()) -> dict[str, EvalReport]:
    """Linear SVM on each single feature and on all five (co-hyponym vs rest)."""
    X, y, info = featurize(g, ds, cfg)
    reports = {}
    for mask in [(f,) for f in FEATURE_NAMES] + [FEATURE_NAMES]:
        spec = _spec("svm", mask, cfg)
        reports[spec.name] = _run(spec.name, X, y, spec, cfg, g, info, "COHYP-vs-rest")
    return reports


def run_experiment_2(g: DTGraph, ds: PairDataset, cfg: ExperimentConfig = ExperimentConfig()) -> dict[str, EvalReport]:
    """Random forest on all five features for co-hyponym vs random and vs hypernym."""
    reports = {}
    for neg in (RANDOM, HYPER):
        sub = ds.subset((COHYP, neg))
        X, y, info = featurize(g, sub, cfg)
        task = f"COHYP-vs-{neg}"
        reports[task] = _run(f"rfALL {task}", X, y, _spec("forest", FEATURE_NAMES, cfg), cfg, g, info, task)
    return reports


def run_experiment_3(g: DTGraph, rows: Sequence[LabeledPair], cfg: ExperimentConfig = ExperimentConfig()) -> dict[str, EvalReport]:
    """Balanced binary samples against each negative relation, svmSS and rfALL."""
    reports = {}
    for neg in (RANDOM, MERO, HYPER):
        ds = build_binary_sample(rows, neg, cfg.n_per_class, cfg.seed)
        X, y, info = featurize(g, ds, cfg)
        task = f"COHYP-vs-{neg}"
        for spec in (_spec("svm", ("SS",), cfg), _spec("forest", FEATURE_NAMES, cfg)):
            key = f"{task} {spec.name}"
            reports[key] = _run(key, X, y, spec, cfg, g, info, task)
    return reports


def format_table(reports: dict[str, EvalReport]) -> str:
    """Plain-text results table, one row per report."""
    width = max([len(k) for k in reports] + [5])
    lines = [f"{'Model':<{width}}  {'Accuracy':>8}  {'macroF1':>8}  {'posF1':>8}  {'n':>6}"]
    for key, rep in reports.items():
        m = rep.metrics
        lines.append(f"{key:<{width}}  {m['accuracy']:8.4f}  {100 * m['macro_f1']:8.1f}  "
                     f"{100 * m['positive_f1']:8.1f}  {rep.confusion.n:6d}")
    return "\n".join(lines) + "\n"
