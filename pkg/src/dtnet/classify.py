"""Deterministic binary classifiers over the five pair features.

Labels are ``+1`` (positive relation) and ``-1``.  Two learners are provided:

* a soft-margin linear SVM trained in the primal by mini-batch stochastic
  subgradient descent with step size ``1/(lambda*t)`` (Pegasos), and
* a random forest of CART trees grown with Gini impurity.

:class:`ClassifierModel` bundles feature selection, standardisation and one
of the learners, and is what the evaluation code trains per fold.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .features import FEATURE_NAMES
from .rng import make_rng

SCHEMA = 1


class TrainingError(ValueError):
    pass


def _as_labels(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if not np.isin(y, (-1, 1)).all():
        raise ValueError("labels must be -1 or +1")
    if len(np.unique(y)) < 2:
        raise TrainingError("training set contains a single class")
    return y


def _check_rows(rows, width: int) -> np.ndarray:
    X = np.asarray(rows, dtype=np.float64)
    if X.size == 0:
        return X.reshape(0, width)
    if X.ndim != 2 or X.shape[1] != width:
        raise ValueError(f"expected rows of width {width}, got shape {X.shape}")
    return X


def canonical_mask(names: Sequence[str]) -> tuple[str, ...]:
    """Validate feature names and return them in canonical SS,SP,SPW,EDin,EDun order."""
    lookup = {n.lower(): n for n in FEATURE_NAMES}
    picked = set()
    for n in names:
        key = n.strip().lower().replace("_", "")
        if key not in lookup:
            raise ValueError(f"unknown feature {n!r}; choose from {', '.join(FEATURE_NAMES)}")
        picked.add(lookup[key])
    if not picked:
        raise ValueError("empty feature mask")
    return tuple(n for n in FEATURE_NAMES if n in picked)


def mask_columns(mask: Sequence[str]) -> list[int]:
    return [FEATURE_NAMES.index(n) for n in mask]


# ---------------------------------------------------------------------------
# standardisation


@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    def transform(self, rows) -> np.ndarray:
        X = _check_rows(rows, len(self.mean))
        return (X - self.mean) / self.scale

    def to_dict(self) -> dict:
        return {"mean": [repr(float(v)) for v in self.mean],
                "scale": [repr(float(v)) for v in self.scale]}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.array([float(v) for v in d["mean"]]), np.array([float(v) for v in d["scale"]]))


def fit_standardizer(rows) -> Standardizer:
    """Column means and sample (n-1) standard deviations.

    A zero or undefined deviation is replaced by 1, so constant columns and
    single-row inputs are only centred.
    """
    X = np.asarray(rows, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot fit a standardizer on an empty matrix")
    mean = X.mean(axis=0)
    if X.shape[0] > 1:
        scale = X.std(axis=0, ddof=1)
    else:
        scale = np.zeros(X.shape[1])
    scale = np.where(scale > 0, scale, 1.0)
    return Standardizer(mean, scale)


# ---------------------------------------------------------------------------
# linear SVM


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0


@dataclass
class SvmModel:
    weights: np.ndarray
    bias: float
    params: SvmParams
    objective: float = float("nan")

    def decision_values(self, rows) -> np.ndarray:
        X = _check_rows(rows, len(self.weights))
        return X @ self.weights + self.bias

    def predict(self, rows) -> np.ndarray:
        return np.where(self.decision_values(rows) >= 0, 1, -1)

    def to_dict(self) -> dict:
        return {"kind": "svm", "weights": [repr(float(v)) for v in self.weights],
                "bias": repr(float(self.bias)), "objective": repr(float(self.objective)),
                "params": vars(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        return cls(np.array([float(v) for v in d["weights"]]), float(d["bias"]),
                   SvmParams(**d["params"]), float(d["objective"]))


def svm_objective(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, C: float) -> float:
    """``0.5*|(w, b)|^2 + C * sum(hinge)``; the bias is regularised like a weight."""
    hinge = np.maximum(0.0, 1.0 - y * (X @ w + b))
    return 0.5 * (float(w @ w) + b * b) + C * float(hinge.sum())


def train_svm(rows, y, params: SvmParams = SvmParams()) -> SvmModel:
    """Linear soft-margin SVM by Pegasos-style mini-batch subgradient steps.

    The bias is learned as the weight of a constant feature.  Each epoch
    visits the rows in a fresh seeded order; the last iterate is returned.
    """
    X = np.asarray(rows, dtype=np.float64)
    y = _as_labels(y)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ValueError("rows and labels disagree in length")
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    lam = 1.0 / (params.C * n)
    radius = 1.0 / math.sqrt(lam)
    w = np.zeros(d + 1)
    rng = make_rng(params.seed)
    t = 0
    B = max(1, params.batch_size)
    for _ in range(params.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, B):
            batch = perm[start:start + B]
            t += 1
            eta = 1.0 / (lam * t)
            xb, yb = Xa[batch], y[batch]
            viol = yb * (xb @ w) < 1.0
            w *= 1.0 - eta * lam
            if viol.any():
                w += (eta / len(batch)) * (yb[viol] @ xb[viol])
            norm = math.sqrt(float(w @ w))
            if norm > radius:
                w *= radius / norm
    model = SvmModel(w[:d].copy(), float(w[d]), params)
    model.objective = svm_objective(model.weights, model.bias, X, y, params.C)
    return model


# ---------------------------------------------------------------------------
# CART trees and forests


@dataclass
class Tree:
    """Array-encoded binary tree; ``feature == -1`` marks a leaf.

    A row goes left when ``row[feature] <= threshold``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # leaf label (+1/-1); majority of the node for internal nodes

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        best, stack = 0, [(0, 0)]
        while stack:
            node, dep = stack.pop()
            best = max(best, dep)
            if self.feature[node] >= 0:
                stack += [(self.left[node], dep + 1), (self.right[node], dep + 1)]
        return best

    def predict(self, rows) -> np.ndarray:
        X = np.asarray(rows, dtype=np.float64)
        node = np.zeros(len(X), dtype=np.int64)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] >= 0]
        return self.value[node]

    def to_dict(self) -> dict:
        return {"feature": self.feature.tolist(),
                "threshold": [repr(float(v)) for v in self.threshold],
                "left": self.left.tolist(), "right": self.right.tolist(),
                "value": self.value.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(np.array(d["feature"], dtype=np.int64),
                   np.array([float(v) for v in d["threshold"]]),
                   np.array(d["left"], dtype=np.int64), np.array(d["right"], dtype=np.int64),
                   np.array(d["value"], dtype=np.int64))


def gini_split(x: np.ndarray, y_pos: np.ndarray, min_leaf: int = 1) -> tuple[float, float] | None:
    """Best threshold on one column.

    Returns ``(score, threshold)`` where ``score = sum over children of
    (pos^2 + neg^2) / size``; maximising it minimises the size-weighted Gini
    impurity of the children.  Thresholds are midpoints between consecutive
    distinct values; the lowest threshold wins ties.  None if no split leaves
    ``min_leaf`` rows on both sides.
    """
    n = len(x)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y_pos[order]
    n_left = np.arange(1, n)
    valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
    if not valid.any():
        return None
    lp = np.cumsum(ys)[:-1].astype(np.float64)
    ln = n_left - lp
    rp = float(ys.sum()) - lp
    n_right = n - n_left
    rn = n_right - rp
    score = (lp * lp + ln * ln) / n_left + (rp * rp + rn * rn) / n_right
    score = np.where(valid, score, -np.inf)
    i = int(np.argmax(score))
    thr = 0.5 * (xs[i] + xs[i + 1])
    if not xs[i] <= thr < xs[i + 1]:
        thr = xs[i]
    return float(score[i]), float(thr)


def weighted_gini(y_left: np.ndarray, y_right: np.ndarray) -> float:
    """Size-weighted Gini impurity of a split (labels in {0,1})."""
    n = len(y_left) + len(y_right)
    total = 0.0
    for part in (y_left, y_right):
        if len(part):
            p = part.mean()
            total += len(part) / n * (1.0 - p * p - (1 - p) * (1 - p))
    return total


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_leaf: int = 1
    features_per_split: int | None = None  # None: ceil(sqrt(d))
    bootstrap: bool = True
    seed: int = 0


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    max_depth: int | None = None,
    min_leaf: int = 1,
    features_per_split: int | None = None,
) -> Tree:
    """Grow one CART tree on ``X`` with labels ``y`` in {-1, +1}.

    At every node the columns are visited in a fresh random order; the best
    split among the first ``features_per_split`` of them is taken, and if
    none of those can split, later columns are tried until one can.
    """
    X = np.asarray(X, dtype=np.float64)
    y_pos = (np.asarray(y) == 1).astype(np.int64)
    n, d = X.shape
    m = d if features_per_split is None else max(1, min(d, features_per_split))
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        pos = int(y_pos[idx].sum())
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(1 if 2 * pos >= len(idx) else -1)
        return len(feature) - 1, pos

    root, _ = new_node(np.arange(n))
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, dep = stack.pop()
        pos = int(y_pos[idx].sum())
        if pos == 0 or pos == len(idx) or len(idx) < 2 * min_leaf:
            continue
        if max_depth is not None and dep >= max_depth:
            continue
        best = None
        tried = 0
        for f in rng.permutation(d):
            if tried >= m and best is not None:
                break
            tried += 1
            res = gini_split(X[idx, f], y_pos[idx], min_leaf)
            if res is not None and (best is None or res[0] > best[0]):
                best = (res[0], int(f), res[1])
        if best is None:
            continue
        _, f, thr = best
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = f, thr
        left[node], _ = new_node(li)
        right[node], _ = new_node(ri)
        # LIFO: the left subtree is grown first
        stack.append((right[node], ri, dep + 1))
        stack.append((left[node], li, dep + 1))
    return Tree(np.array(feature, dtype=np.int64), np.array(threshold),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(value, dtype=np.int64))


@dataclass
class ForestModel:
    trees: list[Tree]
    params: ForestParams
    n_features: int

    def votes(self, rows) -> np.ndarray:
        X = _check_rows(rows, self.n_features)
        if len(X) == 0:
            return np.zeros(0, dtype=np.int64)
        return np.sum([t.predict(X) for t in self.trees], axis=0)

    def decision_values(self, rows) -> np.ndarray:
        """Mean vote in [-1, 1]."""
        return self.votes(rows) / len(self.trees)

    def predict(self, rows) -> np.ndarray:
        # ties go to the positive class
        return np.where(self.votes(rows) >= 0, 1, -1)

    def to_dict(self) -> dict:
        p = dict(vars(self.params))
        return {"kind": "forest", "n_features": self.n_features, "params": p,
                "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls([Tree.from_dict(t) for t in d["trees"]], ForestParams(**d["params"]), d["n_features"])


def _grow(args) -> Tree:
    X, y, params, t = args
    rng = make_rng(params.seed, t)
    if params.bootstrap:
        sample = rng.integers(0, len(y), size=len(y))
        X, y = X[sample], y[sample]
    m = params.features_per_split or math.ceil(math.sqrt(X.shape[1]))
    return build_tree(X, y, rng, params.max_depth, params.min_leaf, m)


def train_forest(rows, y, params: ForestParams = ForestParams(), workers: int = 1) -> ForestModel:
    """Random forest; tree ``t`` draws from the stream ``(seed, t)``.

    A bootstrap sample holding a single class yields a one-leaf tree.
    Results do not depend on ``workers``.
    """
    X = np.asarray(rows, dtype=np.float64)
    y = _as_labels(y)
    if params.n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    jobs = [(X, y, params, t) for t in range(params.n_trees)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            trees = list(ex.map(_grow, jobs))
    else:
        trees = [_grow(j) for j in jobs]
    return ForestModel(trees, params, X.shape[1])


# ---------------------------------------------------------------------------
# full pipeline: mask -> standardise -> learner


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "svm"  # "svm" or "forest"
    mask: tuple[str, ...] = FEATURE_NAMES
    svm: SvmParams = SvmParams()
    forest: ForestParams = ForestParams()

    def __post_init__(self):
        if self.kind not in ("svm", "forest"):
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        object.__setattr__(self, "mask", canonical_mask(self.mask))

    @property
    def name(self) -> str:
        feats = "ALL" if self.mask == FEATURE_NAMES else "+".join(self.mask)
        return ("svm" if self.kind == "svm" else "rf") + feats

    def with_seed(self, seed: int) -> "ClassifierSpec":
        return ClassifierSpec(self.kind, self.mask, SvmParams(**{**vars(self.svm), "seed": seed}),
                              ForestParams(**{**vars(self.forest), "seed": seed}))

    def with_mask(self, mask) -> "ClassifierSpec":
        return ClassifierSpec(self.kind, tuple(mask), self.svm, self.forest)

    def to_dict(self) -> dict:
        params = vars(self.svm) if self.kind == "svm" else vars(self.forest)
        return {"kind": self.kind, "features": list(self.mask), "params": dict(params)}


@dataclass
class ClassifierModel:
    spec: ClassifierSpec
    standardizer: Standardizer
    learner: SvmModel | ForestModel

    def _prepare(self, rows) -> np.ndarray:
        X = _check_rows(rows, len(FEATURE_NAMES))
        return self.standardizer.transform(X[:, mask_columns(self.spec.mask)])

    def decision_values(self, rows) -> np.ndarray:
        return self.learner.decision_values(self._prepare(rows))

    def predict(self, rows) -> np.ndarray:
        X = self._prepare(rows)
        if len(X) == 0:
            return np.zeros(0, dtype=np.int64)
        return self.learner.predict(X)

    def to_json(self) -> str:
        doc = {"schema": SCHEMA, "spec": self.spec.to_dict(),
               "feature_mask": list(self.spec.mask),
               "standardizer": self.standardizer.to_dict(),
               "model": self.learner.to_dict()}
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ClassifierModel":
        doc = json.loads(text)
        s = doc["spec"]
        kind = s["kind"]
        spec = ClassifierSpec(kind, tuple(s["features"]),
                              SvmParams(**s["params"]) if kind == "svm" else SvmParams(),
                              ForestParams(**s["params"]) if kind == "forest" else ForestParams())
        learner = (SvmModel.from_dict(doc["model"]) if kind == "svm"
                   else ForestModel.from_dict(doc["model"]))
        return cls(spec, Standardizer.from_dict(doc["standardizer"]), learner)


def fit_classifier(spec: ClassifierSpec, rows, y, workers: int = 1) -> ClassifierModel:
    """Select ``spec.mask`` columns from 5-wide rows, standardise, train."""
    X = _check_rows(rows, len(FEATURE_NAMES))
    X = X[:, mask_columns(spec.mask)]
    if not np.isfinite(X).all():
        raise ValueError("feature matrix contains non-finite values")
    std = fit_standardizer(X)
    Z = std.transform(X)
    if spec.kind == "svm":
        learner = train_svm(Z, y, spec.svm)
    else:
        learner = train_forest(Z, y, spec.forest, workers=workers)
    return ClassifierModel(spec, std, learner)
