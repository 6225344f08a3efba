"""Regression trees grown to minimise size-weighted child standard deviation.

A candidate split of a node into children with ``n_i`` rows and effort
variance ``v_i`` scores ``sum_i sqrt(v_i) * n_i / sum_i n_i``; the lowest
score wins. Thresholds are midpoints between consecutive distinct values and
rows with ``x <= threshold`` go left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset


@dataclass(frozen=True)
class CartParams:
    max_features: float = 1.0
    max_depth: int | None = None
    min_sample_split: int = 2
    min_samples_leaf: int = 1

    def __post_init__(self):
        if not 0 < self.max_features <= 1:
            raise ValueError(f"max_features must be in (0, 1], got {self.max_features}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if self.min_sample_split < 0 or self.min_samples_leaf < 1:
            raise ValueError("bad min_sample_split / min_samples_leaf")

    def n_candidates(self, n_features: int) -> int:
        return min(n_features, max(1, math.ceil(self.max_features * n_features - 1e-9)))


@dataclass(frozen=True)
class TreeModel:
    """Array-encoded binary tree; ``feature[i] == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray
    depth: np.ndarray
    n_features: int
    score: np.ndarray  # split score at internal nodes, nan at leaves

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature < 0

    @property
    def max_depth(self) -> int:
        return int(self.depth.max())

    def predict(self, rows) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {rows.shape[1]}")
        node = np.zeros(len(rows), dtype=int)
        active = self.feature[node] >= 0
        while active.any():
            cur = node[active]
            f = self.feature[cur]
            go_left = rows[active, f] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] >= 0
        return self.value[node]

    def dump(self, feature_names=None) -> str:
        """Indented text rendering, one node per line."""
        names = feature_names or [f"x{j}" for j in range(self.n_features)]
        lines = []

        def walk(i, indent):
            pad = "  " * indent
            if self.feature[i] < 0:
                lines.append(f"{pad}leaf mean={self.value[i]:.6g} n={self.count[i]}")
                return
            lines.append(f"{pad}{names[self.feature[i]]} <= {self.threshold[i]:.6g}")
            walk(self.left[i], indent + 1)
            lines.append(f"{pad}{names[self.feature[i]]} > {self.threshold[i]:.6g}")
            walk(self.right[i], indent + 1)

        walk(0, 0)
        return "\n".join(lines)


def split_score(left_efforts, right_efforts) -> float:
    """Score of one binary partition, straight from the definition."""
    n_l, n_r = len(left_efforts), len(right_efforts)
    n = n_l + n_r
    return (math.sqrt(np.var(left_efforts)) * n_l + math.sqrt(np.var(right_efforts)) * n_r) / n


def best_split(x: np.ndarray, y: np.ndarray, features, min_leaf: int):
    """Lowest-scoring (score, feature, threshold) over ``features``, or None.

    Scores are screened with prefix sums, then every candidate within
    rounding distance of the best is rescored exactly (sqrt amplifies the
    cancellation error of near-zero variances). Ties go to the lowest
    feature index, then the lowest threshold.
    """
    n = len(y)
    feats = np.array(sorted(features), dtype=int)
    if n < 2 or feats.size == 0:
        return None
    yc = y - y.mean()
    order = np.argsort(x[:, feats], axis=0, kind="stable")
    xs = np.take_along_axis(x[:, feats], order, axis=0)
    ys = yc[order]  # (n, F)
    n_l = np.arange(1, n)[:, None]  # left part of cut c is rows [0, c]
    n_r = n - n_l
    ok = (xs[1:] > xs[:-1]) & (n_l >= min_leaf) & (n_r >= min_leaf)
    if not ok.any():
        return None
    s1, s2 = np.cumsum(ys, axis=0), np.cumsum(ys * ys, axis=0)
    l1, l2 = s1[:-1], s2[:-1]
    r1, r2 = s1[-1] - l1, s2[-1] - l2
    v_l = np.maximum(l2 / n_l - (l1 / n_l) ** 2, 0.0)
    v_r = np.maximum(r2 / n_r - (r1 / n_r) ** 2, 0.0)
    score = np.where(ok, (np.sqrt(v_l) * n_l + np.sqrt(v_r) * n_r) / n, np.inf)
    floor = float(score.min())
    tol = 1e-6 * (float(np.abs(yc).max()) + 1e-300)
    cut, col = np.nonzero(score <= floor + tol)
    best = None
    for k in np.lexsort((cut, col)):  # feature first, then threshold
        c, j = int(cut[k]), int(col[k])
        yj = ys[:, j]
        s = (np.std(yj[: c + 1]) * (c + 1) + np.std(yj[c + 1 :]) * (n - c - 1)) / n
        if best is None or s < best[0] - 1e-12 * (1.0 + abs(best[0])):
            best = (float(s), int(feats[j]), 0.5 * (xs[c, j] + xs[c + 1, j]))
    return best


def build_tree(x, y, params: CartParams = CartParams(), seed: int = 0) -> TreeModel:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise ValueError("cannot fit a tree on an empty training set")
    if x.ndim != 2 or len(x) != len(y):
        raise ValueError("x must be 2-D with one row per target")
    p = x.shape[1]
    k = params.n_candidates(p) if p else 0
    rng = np.random.default_rng(seed)

    feature, threshold, left, right, value, count, depth, score = ([] for _ in range(8))

    def new_node(idx, d):
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        value.append(float(y[idx].mean()))
        count.append(len(idx))
        depth.append(d)
        score.append(np.nan)
        return len(feature) - 1

    stack = [(new_node(np.arange(len(y)), 0), np.arange(len(y)))]
    while stack:
        node, idx = stack.pop()
        d = depth[node]
        n = len(idx)
        if n < 2 or n <= params.min_sample_split:
            continue
        if params.max_depth is not None and d >= params.max_depth:
            continue
        ys = y[idx]
        if np.all(ys == ys[0]) or p == 0:
            continue
        cand = range(p) if k >= p else rng.choice(p, size=k, replace=False)
        found = best_split(x[idx], ys, cand, params.min_samples_leaf)
        if found is None:
            continue
        s, f, t = found
        go_left = x[idx, f] <= t
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node], score[node] = f, t, s
        left[node] = new_node(li, d + 1)
        right[node] = new_node(ri, d + 1)
        # push right first so the left subtree is expanded (and numbered) first
        stack.append((right[node], ri))
        stack.append((left[node], li))

    return TreeModel(
        np.array(feature, dtype=int),
        np.array(threshold, dtype=float),
        np.array(left, dtype=int),
        np.array(right, dtype=int),
        np.array(value, dtype=float),
        np.array(count, dtype=int),
        np.array(depth, dtype=int),
        p,
        np.array(score, dtype=float),
    )


def cart_fit(train: Dataset, p: CartParams = CartParams(), seed: int = 0) -> TreeModel:
    return build_tree(train.rows, train.efforts, p, seed)


def cart_predict(m: TreeModel, row) -> float:
    row = np.asarray(row, dtype=float)
    if row.ndim != 1:
        raise ValueError("cart_predict takes a single feature vector")
    return float(m.predict(row[None, :])[0])


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeModel, ...]

    def predict(self, rows) -> np.ndarray:
        return np.mean([t.predict(rows) for t in self.trees], axis=0)


def rf_fit(train: Dataset, n_trees: int = 100, seed: int = 0, bootstrap: bool = True,
           params: CartParams | None = None) -> ForestModel:
    """Bagged regression trees with ceil(sqrt(p)) candidate features per node.

    ``bootstrap=False`` trains every tree on the full set (used to check the
    one-tree degenerate case against a single tree).
    """
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    if len(train) == 0:
        raise ValueError("cannot fit a forest on an empty training set")
    n, p = train.rows.shape
    if params is None:
        params = CartParams(max_features=math.ceil(math.sqrt(p)) / p) if p else CartParams()
    trees = []
    for child in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(child)
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        tree_seed = int(rng.integers(2**32))
        trees.append(build_tree(train.rows[idx], train.efforts[idx], params, tree_seed))
    return ForestModel(tuple(trees))


def rf_predict(m: ForestModel, rows) -> np.ndarray:
    return m.predict(rows)
