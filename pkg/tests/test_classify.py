import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtnet.classify import (ClassifierModel, ClassifierSpec, ForestParams, SvmModel, SvmParams, Tree,
                            TrainingError, build_tree, canonical_mask, fit_classifier, fit_standardizer,
                            gini_split, train_forest, train_svm, weighted_gini)
from dtnet.rng import make_rng


def blobs(seed=7, n=100):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(2, 1, (n, 2)), rng.normal(-2, 1, (n, 2))])
    return X, np.r_[np.ones(n), -np.ones(n)].astype(int)


def test_standardizer_sample_convention():
    s = fit_standardizer([[1.0], [3.0]])
    assert s.transform([[1.0], [3.0]]).ravel() == pytest.approx([-1 / np.sqrt(2), 1 / np.sqrt(2)])
    assert s.transform([[5.0], [5.0]]).ravel() == pytest.approx([2.1213203435596424] * 2)


def test_standardizer_degenerate():
    s = fit_standardizer([[4.0, 1.0], [4.0, 2.0], [4.0, 3.0]])
    assert (s.transform([[4.0, 2.0]]) == [[0.0, 0.0]]).all()
    assert (fit_standardizer([[9.0, -1.0]]).transform([[9.0, -1.0]]) == 0).all()
    with pytest.raises(ValueError):
        fit_standardizer(np.zeros((0, 3)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 60))
def test_standardized_moments(seed, n):
    X = np.random.default_rng(seed).normal(3, 5, (n, 4))
    Z = fit_standardizer(X).transform(X)
    assert np.abs(Z.mean(axis=0)).max() < 1e-9
    assert np.abs(Z.var(axis=0, ddof=1) - 1).max() < 1e-6


def test_svm_separable_1d():
    m = train_svm([[-1.0], [1.0]], [-1, 1], SvmParams(C=1.0))
    assert m.weights[0] > 0
    assert list(m.predict([[-1.0], [1.0]])) == [-1, 1]


def test_svm_xor_bound():
    X = np.array([[0, 0], [1, 1], [0, 1], [1, 0]], float)
    m = train_svm(X, [1, 1, -1, -1])
    assert np.mean(m.predict(X) == [1, 1, -1, -1]) <= 0.75


def test_svm_blobs():
    X, y = blobs()
    Z = fit_standardizer(X).transform(X)
    m = train_svm(Z, y, SvmParams(seed=7))
    assert np.mean(m.predict(Z) == y) >= 0.99


def test_svm_objective_decreases_with_training():
    X, y = blobs(3)
    early = train_svm(X, y, SvmParams(epochs=1, batch_size=200)).objective
    late = train_svm(X, y, SvmParams(epochs=200)).objective
    assert late < early


def test_single_class_rejected():
    with pytest.raises(TrainingError):
        train_svm([[0.0], [1.0]], [1, 1])
    with pytest.raises(TrainingError):
        train_forest([[0.0], [1.0]], [-1, -1])


def test_decision_rule_and_width():
    m = SvmModel(np.array([1.0, 0.0]), 0.0, SvmParams())
    assert list(m.predict([[3.0, -8.0]])) == [1]
    assert len(m.predict(np.zeros((0, 2)))) == 0
    with pytest.raises(ValueError):
        m.predict([[1.0, 2.0, 3.0]])


def exhaustive_best_gini(X, y01, features):
    best = np.inf
    for f in features:
        vals = np.unique(X[:, f])
        for lo, hi in zip(vals, vals[1:]):
            thr = (lo + hi) / 2
            left = X[:, f] <= thr
            best = min(best, weighted_gini(y01[left], y01[~left]))
    return best


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 100), st.integers(1, 4))
def test_split_finder_matches_exhaustive(seed, n, d):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 6, (n, d)).astype(float)  # ties on purpose
    y01 = rng.integers(0, 2, n)
    expected = exhaustive_best_gini(X, y01, range(d))
    results = [gini_split(X[:, f], y01) for f in range(d)]
    results = [r for r in results if r is not None]
    if not results:
        assert expected == np.inf
        return
    score, thr = max(results, key=lambda r: r[0])
    assert abs((1 - score / n) - expected) < 1e-12


def test_stump_on_threshold_data():
    X = np.array([[0.1], [0.4], [0.5], [2.0], [2.5], [3.0]])
    y = np.array([-1, -1, -1, 1, 1, 1])
    t = build_tree(X, y, make_rng(0), max_depth=1)
    assert t.n_nodes == 3 and 0.5 <= t.threshold[0] < 2.0
    assert (t.predict(X) == y).all()


def test_forest_of_one_equals_cart():
    X, y = blobs(11, 60)
    X = X + np.random.default_rng(0).normal(0, 2, X.shape)
    for fps in (None, 1, 2):
        f = train_forest(X, y, ForestParams(n_trees=1, bootstrap=False, features_per_split=fps, seed=5))
        tree = build_tree(X, y, make_rng(5, 0), features_per_split=fps or 2)
        probe = np.random.default_rng(1).normal(0, 3, (500, 2))
        assert (f.predict(probe) == tree.predict(probe)).all()
        assert f.trees[0].to_dict() == tree.to_dict()


def test_forest_determinism_and_workers():
    X, y = blobs(2, 40)
    a = train_forest(X, y, ForestParams(n_trees=7, seed=3))
    b = train_forest(X, y, ForestParams(n_trees=7, seed=3), workers=2)
    assert [t.to_dict() for t in a.trees] == [t.to_dict() for t in b.trees]


def test_forest_vote_tie_goes_positive():
    from dtnet.classify import ForestModel

    leaf = lambda v: Tree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), np.array([v]))
    m = ForestModel([leaf(1), leaf(1), leaf(-1)], ForestParams(n_trees=3), 1)
    assert list(m.predict([[0.0]])) == [1]
    m = ForestModel([leaf(1), leaf(-1)], ForestParams(n_trees=2), 1)
    assert list(m.predict([[0.0]])) == [1]


def test_canonical_mask():
    assert canonical_mask(["EDun", "ss", "SPW"]) == ("SS", "SPW", "EDun")
    with pytest.raises(ValueError):
        canonical_mask(["degree"])


@pytest.mark.parametrize("kind", ["svm", "forest"])
def test_pipeline_serialisation_round_trip(kind):
    rng = np.random.default_rng(4)
    X = rng.normal(0, 1, (80, 5))
    y = np.where(X[:, 0] + 0.5 * X[:, 3] > 0, 1, -1)
    spec = ClassifierSpec(kind, ("SS", "EDin"), SvmParams(seed=1), ForestParams(n_trees=5, seed=1))
    m = fit_classifier(spec, X, y)
    text = m.to_json()
    back = ClassifierModel.from_json(text)
    assert back.to_json() == text
    assert (back.decision_values(X) == m.decision_values(X)).all()
    assert fit_classifier(spec, X, y).to_json() == text


def test_affine_rescaling_invariance():
    rng = np.random.default_rng(9)
    X = rng.normal(0, 1, (120, 5))
    y = np.where(X[:, 0] - X[:, 2] > 0.1, 1, -1)
    test = rng.normal(0, 1, (50, 5))
    scale, shift = np.array([3.0, 0.5, 10.0, 2.0, 7.0]), np.array([1.0, -4.0, 2.0, 0.0, 5.0])
    for kind in ("svm", "forest"):
        spec = ClassifierSpec(kind, ("SS", "SP", "SPW", "EDin", "EDun"), forest=ForestParams(n_trees=9))
        a = fit_classifier(spec, X, y).predict(test)
        b = fit_classifier(spec, X * scale + shift, y).predict(test * scale + shift)
        assert (a == b).all()
