import json

import numpy as np
import pytest

from dtnet.classify import ClassifierSpec, ForestParams
from dtnet.dataset import COHYP, HYPER, MERO, RANDOM, LabeledPair, PairDataset
from dtnet.evaluation import (Confusion, EvalReport, ExperimentConfig, all_masks, cross_validate, feature_sweep,
                              format_table, metrics, run_experiment_1, run_experiment_2, run_experiment_3)
from dtnet.graph import DTGraph


def test_metrics_perfect_and_wrong():
    m = metrics(Confusion(tp=1, fp=0, fn=0, tn=1))
    assert m["accuracy"] == 1 and m["positive_f1"] == 1 and m["macro_f1"] == 1
    m = metrics(Confusion(tp=0, fp=1, fn=1, tn=0))
    assert m["accuracy"] == 0 and m["positive_f1"] == 0


def test_metrics_hand_computed():
    m = metrics(Confusion(tp=8, fp=2, fn=2, tn=8))
    assert m["accuracy"] == pytest.approx(0.8)
    assert m["positive_f1"] == pytest.approx(0.8)
    assert m["positive"]["precision"] == pytest.approx(0.8)
    assert m["negative"]["recall"] == pytest.approx(0.8)


def separable(n=40, seed=0):
    rng = np.random.default_rng(seed)
    y = np.r_[np.ones(n), -np.ones(n)].astype(int)
    X = rng.uniform(0, 1, (2 * n, 5))
    X[:, 0] += 3 * (y == 1)
    return X, y


@pytest.mark.parametrize("kind", ["svm", "forest"])
def test_cv_perfectly_separable(kind):
    X, y = separable()
    rep = cross_validate(X, y, ClassifierSpec(kind, forest=ForestParams(n_trees=10)), k=10, seed=1)
    assert rep.accuracy == 1.0
    assert len(rep.folds) == 10 and rep.confusion.n == len(y)


def test_micro_accuracy_is_size_weighted_fold_mean():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(53, 5))
    y = np.where(X[:, 1] + rng.normal(0, 1, 53) > 0, 1, -1)
    rep = cross_validate(X, y, ClassifierSpec("svm"), k=5, seed=2)
    sizes = [c.n for c in rep.folds]
    assert rep.accuracy == pytest.approx(np.average(rep.fold_accuracies, weights=sizes))


def test_fold_precondition():
    X, y = separable(n=5)
    with pytest.raises(ValueError):
        cross_validate(X, y, ClassifierSpec("svm"), k=len(y), seed=0)


def test_report_json_recomputable_and_stable():
    X, y = separable()
    a = cross_validate(X, y, ClassifierSpec("svm", ("SS",)), k=4, seed=3)
    b = cross_validate(X, y, ClassifierSpec("svm", ("SS",)), k=4, seed=3, workers=2)
    assert a.to_json() == b.to_json()
    doc = json.loads(a.to_json())
    assert doc["schema"] == 1 and "timings" not in doc
    back = EvalReport.from_dict(doc)
    assert back.metrics == a.metrics
    assert "cv_seconds" in json.loads(a.to_json(include_timings=True))["timings"]


def test_sweep_covers_31_masks_and_ranks():
    rng = np.random.default_rng(0)
    n = 60
    y = np.r_[np.ones(n), -np.ones(n)].astype(int)
    X = rng.normal(0, 1, (2 * n, 5))
    X[:, 0] += 2.5 * (y == 1)  # only SS informative
    ranking = feature_sweep(X, y, ClassifierSpec("svm"), k=5, seed=0)
    assert len(ranking) == 31
    assert "SS" in ranking[0][0]
    scores = [s for _, s in ranking]
    assert scores == sorted(scores, reverse=True)


def test_sweep_all_mask_matches_cv():
    X, y = separable(30, 4)
    X = X + np.random.default_rng(1).normal(0, 1, X.shape)
    spec = ClassifierSpec("svm")
    rank = dict(feature_sweep(X, y, spec, k=5, seed=9, masks=[spec.mask]))
    assert rank[spec.mask] == cross_validate(X, y, spec, k=5, seed=9).accuracy


def test_sweep_rejects_absent_features():
    X, y = separable()
    X[:, 1:] = np.nan
    assert feature_sweep(X, y, ClassifierSpec("svm"), k=4, seed=0) == [(("SS",), 1.0)]
    with pytest.raises(ValueError, match="absent"):
        feature_sweep(X, y, ClassifierSpec("svm"), k=4, seed=0, masks=[("SS", "SP")])


def test_all_masks_order():
    masks = all_masks()
    assert len(masks) == 31 and masks[0] == ("SS",) and masks[-1] == ("SS", "SP", "SPW", "EDin", "EDun")


def _mini_world():
    from dtnet.synth import SynthSpec, generate

    return generate(SynthSpec(n_clusters=8, cluster_size=6, hub_degree=6, seed=3))


def test_experiment_shapes():
    g, ds = _mini_world()
    cfg = ExperimentConfig(folds=3, seed=1, n_per_class=20, forest=ForestParams(n_trees=5))
    r1 = run_experiment_1(g, ds.subset((COHYP, RANDOM, MERO)), cfg)
    assert list(r1) == ["svmSS", "svmSP", "svmSPW", "svmEDin", "svmEDun", "svmALL"]
    r2 = run_experiment_2(g, ds, cfg)
    assert list(r2) == ["COHYP-vs-RANDOM", "COHYP-vs-HYPER"]
    r3 = run_experiment_3(g, ds.pairs, cfg)
    assert len(r3) == 6
    rep = r3["COHYP-vs-MERO rfALL"]
    assert rep.dataset["class_counts"] == {COHYP: 20, MERO: 20}
    assert rep.config["graph"]["sha256"] == g.fingerprint()
    assert rep.config["features"]["max_hops"] == 6
    table = format_table(r3)
    assert table.count("\n") == 7


def test_experiment_reports_oov():
    g = DTGraph.from_edges([("a", "b", 10), ("b", "c", 10), ("c", "d", 10), ("a", "c", 20)])
    pairs = [LabeledPair("a", "c", COHYP), LabeledPair("b", "d", COHYP),
             LabeledPair("a", "zz", RANDOM), LabeledPair("d", "yy", RANDOM)]
    ds = PairDataset(pairs)
    r = run_experiment_1(g, ds, ExperimentConfig(folds=2))
    assert r["svmSS"].dataset["oov_pairs"] == 2
