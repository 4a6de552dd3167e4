"""Random forest of Gini decision trees, written against plain numpy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .base import Classifier


@dataclass
class Tree:
    # parallel node arrays; leaves have feature == -1
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_class: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=int)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.nonzero(active)[0]
            nd = node[rows]
            go_left = X[rows, self.feature[nd]] <= self.threshold[nd]
            node[rows] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return self.leaf_class[node]


def gini(counts: np.ndarray) -> np.ndarray:
    n = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / n[..., None]
    return np.where(n > 0, 1.0 - np.sum(p * p, axis=-1), 0.0)


def best_split(X: np.ndarray, y: np.ndarray, n_classes: int, features: np.ndarray):
    """Return (feature, threshold, impurity) of the best Gini split, or None."""
    n = len(y)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    total = onehot.sum(axis=0)
    best = None
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        valid = np.nonzero(xs[1:] > xs[:-1])[0]  # split between i and i+1
        if len(valid) == 0:
            continue
        left = np.cumsum(onehot[order], axis=0)[valid]
        right = total - left
        nl = valid + 1.0
        score = (nl * gini(left) + (n - nl) * gini(right)) / n
        j = int(np.argmin(score))
        if best is None or score[j] < best[2] - 1e-12:
            i = valid[j]
            best = (int(f), 0.5 * (xs[i] + xs[i + 1]), float(score[j]))
    return best


def grow_tree(X, y, n_classes, max_depth, max_features, rng, min_samples_split=2) -> Tree:
    feature, threshold, left, right, leaf_class = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        leaf_class.append(0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(len(y)), 0)]
    k = X.shape[1]
    while stack:
        node, rows, depth = stack.pop()
        counts = np.bincount(y[rows], minlength=n_classes)
        leaf_class[node] = int(np.argmax(counts))
        if depth >= max_depth or len(rows) < min_samples_split or np.count_nonzero(counts) <= 1:
            continue
        feats = rng.choice(k, size=min(max_features, k), replace=False)
        split = best_split(X[rows], y[rows], n_classes, np.sort(feats))
        if split is None or split[2] >= gini(counts.astype(float)) - 1e-12:
            continue
        f, t, _ = split
        mask = X[rows, f] <= t
        feature[node], threshold[node] = f, t
        left[node], right[node] = new_node(), new_node()
        stack.append((right[node], rows[~mask], depth + 1))
        stack.append((left[node], rows[mask], depth + 1))
    return Tree(
        np.array(feature), np.array(threshold, dtype=float),
        np.array(left), np.array(right), np.array(leaf_class),
    )


@dataclass
class RandomForest(Classifier):
    trees: list[Tree] = field(default_factory=list)
    k: int = 0
    vote_scores: bool = True

    @property
    def n_features(self) -> int:
        return self.k

    _packed: tuple | None = field(default=None, init=False, repr=False, compare=False)

    def _pack(self):
        """All trees as one node table, so a batch walks every tree at once."""
        if self._packed is None:
            sizes = [len(t.feature) for t in self.trees]
            roots = np.r_[0, np.cumsum(sizes)[:-1]].astype(int)

            def shifted(attr):
                return np.concatenate([np.where(getattr(t, attr) >= 0, getattr(t, attr) + r, -1)
                                       for t, r in zip(self.trees, roots)])

            self._packed = (
                roots,
                np.concatenate([t.feature for t in self.trees]),
                np.concatenate([t.threshold for t in self.trees]),
                shifted("left"), shifted("right"),
                np.concatenate([t.leaf_class for t in self.trees]),
            )
        return self._packed

    def votes(self, X: np.ndarray) -> np.ndarray:
        V = np.zeros((len(X), len(self.classes)))
        if not self.trees:
            return V
        roots, feature, threshold, left, right, leaf_class = self._pack()
        node = np.tile(roots, (len(X), 1))
        rows = np.broadcast_to(np.arange(len(X))[:, None], node.shape)
        active = feature[node] >= 0
        while active.any():
            r, nd = rows[active], node[active]
            go_left = X[r, feature[nd]] <= threshold[nd]
            node[active] = np.where(go_left, left[nd], right[nd])
            active = feature[node] >= 0
        np.add.at(V, (rows.ravel(), leaf_class[node].ravel()), 1.0)
        return V / len(self.trees)

    def class_scores(self, X):
        return self.votes(X)

    def predict_batch(self, X):
        idx, score = super().predict_batch(X)
        return idx, (score if self.vote_scores else None)

    def score_for(self, X, label):
        return super().score_for(X, label) if self.vote_scores else None


def canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row permutation sorting by label then features; makes training order-free."""
    keys = [X[:, j] for j in range(X.shape[1] - 1, -1, -1)] + [y]
    return np.lexsort(keys)


def fit_forest(X, y, n_classes, *, n_trees=100, max_depth=10, max_features=None, seed=0) -> list[Tree]:
    order = canonical_order(X, y)
    X, y = X[order], y[order]
    if max_features is None:
        max_features = max(1, math.ceil(math.sqrt(X.shape[1])))
    master = np.random.default_rng(seed)
    tree_seeds = master.integers(0, 2**63 - 1, size=n_trees)
    trees = []
    for ts in tree_seeds:
        rng = np.random.default_rng(int(ts))
        boot = rng.integers(0, len(y), size=len(y))
        trees.append(grow_tree(X[boot], y[boot], n_classes, max_depth, max_features, rng))
    return trees
