"""Gradient-boosted regression trees for binary log-loss, written from scratch.

Each stage fits a least-squares tree to the residuals y - sigmoid(F) and
replaces its leaf means with a single Newton step sum(r) / sum(p(1-p)).
There is no row or column subsampling, so fitting is fully deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, NonFiniteFeature, SingleClassTraining

NEWTON_FLOOR = 1e-12
MIN_GAIN = 1e-12
TIE_TOL = 1e-12
# keeps sigmoid strictly inside (0, 1) in double precision
RAW_SCORE_LIMIT = 35.0


@dataclass(frozen=True)
class GbmConfig:
    n_estimators: int = 10
    max_depth: int = 3
    learning_rate: float = 0.9
    min_leaf: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")


@dataclass
class RegressionTree:
    """Flat binary tree; ``feature[i] == -1`` marks a leaf."""

    feature: list = field(default_factory=list)
    threshold: list = field(default_factory=list)
    left: list = field(default_factory=list)
    right: list = field(default_factory=list)
    value: list = field(default_factory=list)
    depth: int = 0

    def _add(self, feature=-1, threshold=0.0, value=0.0):
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.feature) - 1

    def predict(self, X):
        X = np.atleast_2d(X)
        out = np.empty(X.shape[0])
        for i, row in enumerate(X):
            node = 0
            while self.feature[node] >= 0:
                node = self.left[node] if row[self.feature[node]] <= self.threshold[node] else self.right[node]
            out[i] = self.value[node]
        return out

    def to_dict(self):
        return {
            "feature": list(self.feature), "threshold": list(self.threshold),
            "left": list(self.left), "right": list(self.right),
            "value": list(self.value), "depth": self.depth,
        }


def best_split(X, r, min_leaf):
    """Best (feature, threshold, gain) by squared-error reduction, or None.

    Gains within TIE_TOL (relative) of the best are ties; ties go to the
    lowest feature index, then the lowest threshold.
    """
    n, n_features = X.shape
    if n < 2 * min_leaf or n_features == 0:
        return None
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    rs = r[order]
    csum = np.cumsum(rs, axis=0)
    total = csum[-1]
    k = np.arange(1, n)[:, None]  # rows in the left child
    left_sum = csum[:-1]
    right_sum = total - left_sum
    gain = left_sum ** 2 / k + right_sum ** 2 / (n - k) - total ** 2 / n
    valid = (xs[:-1] < xs[1:]) & (k >= min_leaf) & (n - k >= min_leaf)
    gain = np.where(valid, gain, -np.inf)
    best = gain.max()
    if not np.isfinite(best) or best <= MIN_GAIN:
        return None
    # gains equal up to rounding count as ties
    pos, feat = np.nonzero(gain >= best - TIE_TOL * max(1.0, best))
    # lowest feature first; positions ascend with threshold inside a feature
    pick = np.lexsort((pos, feat))[0]
    f, p = int(feat[pick]), int(pos[pick])
    lo, hi = xs[p, f], xs[p + 1, f]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:
        thr = lo
    return f, float(thr), float(best)


def fit_tree(X, r, hess, max_depth, min_leaf, gains):
    tree = RegressionTree()

    def leaf_value(idx):
        return float(r[idx].sum() / max(hess[idx].sum(), NEWTON_FLOOR))

    def grow(idx, depth):
        node = tree._add(value=leaf_value(idx))
        tree.depth = max(tree.depth, depth)
        if depth >= max_depth:
            return node
        split = best_split(X[idx], r[idx], min_leaf)
        if split is None:
            return node
        f, thr, gain = split
        gains[f] += gain
        go_left = X[idx, f] <= thr
        tree.feature[node] = f
        tree.threshold[node] = thr
        tree.left[node] = grow(idx[go_left], depth + 1)
        tree.right[node] = grow(idx[~go_left], depth + 1)
        return node

    grow(np.arange(X.shape[0]), 0)
    return tree


def sigmoid(raw):
    raw = np.clip(raw, -RAW_SCORE_LIMIT, RAW_SCORE_LIMIT)
    return 1.0 / (1.0 + np.exp(-raw))


@dataclass
class GbmModel:
    init_score: float
    trees: list
    feature_names: tuple
    importances: np.ndarray
    learning_rate: float

    @property
    def n_features(self):
        return len(self.feature_names)

    def decision_function(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        raw = np.full(X.shape[0], self.init_score)
        for tree in self.trees:
            raw += self.learning_rate * tree.predict(X)
        return raw[0] if single else raw

    def predict_score(self, X):
        return sigmoid(self.decision_function(X))

    def importance_dict(self):
        return dict(zip(self.feature_names, self.importances.tolist()))


def fit_gbm(X, y, cfg=None, feature_names=None):
    cfg = cfg or GbmConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise DimensionMismatch(f"X shape {X.shape} does not match {y.size} labels")
    if not np.isfinite(X).all():
        raise NonFiniteFeature("feature matrix contains NaN or infinite values")
    prevalence = y.mean()
    if prevalence in (0.0, 1.0):
        raise SingleClassTraining("training labels contain a single class")
    if X.shape[0] < 2 * cfg.min_leaf:
        raise ValueError(f"need at least {2 * cfg.min_leaf} rows, got {X.shape[0]}")
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(X.shape[1]))
    if len(names) != X.shape[1]:
        raise DimensionMismatch("feature_names length differs from column count")

    init = float(np.log(prevalence / (1.0 - prevalence)))
    raw = np.full(y.size, init)
    gains = np.zeros(X.shape[1])
    trees = []
    for _ in range(cfg.n_estimators):
        p = sigmoid(raw)
        tree = fit_tree(X, y - p, p * (1.0 - p), cfg.max_depth, cfg.min_leaf, gains)
        trees.append(tree)
        raw = raw + cfg.learning_rate * tree.predict(X)
    total = gains.sum()
    importances = gains / total if total > 0 else gains
    return GbmModel(init, trees, names, importances, cfg.learning_rate)


def predict_score(model, x):
    return model.predict_score(x)
