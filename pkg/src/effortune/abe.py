"""Analogy-based estimation over a six-dimension design space.

Every configuration picks one option per dimension: training-subset
selection, feature weighting, discretization (used by weighting schemes that
need binned data), similarity measure, adaptation of neighbour efforts, and
the number of analogies. ``ABE0`` is the plain unit-weight 1-NN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .dataset import Dataset, MinMax

SUBSETS = ("remove_nothing", "outlier_prune")
SCHEMES = (
    "uniform",
    "pearson_correlation",
    "spearman_correlation",
    "variance_ratio",
    "information_gain",
    "gain_ratio",
    "chi_squared",
    "relief",
)
NEEDS_DISCRETIZATION = frozenset({"information_gain", "gain_ratio", "chi_squared"})
DISCRETIZERS = ("equal_frequency", "equal_width", "none")
SIMILARITIES = (
    "weighted_euclidean",
    "unweighted_euclidean",
    "max_distance",
    "triangular_kernel",
    "minkowski",
    "mean_rank",
)
ADAPTATIONS = ("median", "mean", "second_learner_regression", "weighted_mean")
SELECTORS = (1, 2, 3, 4, 5, "dynamic")

SHORT = {
    "remove_nothing": "all",
    "outlier_prune": "prune",
    "uniform": "uniform",
    "pearson_correlation": "pearson",
    "spearman_correlation": "spearman",
    "variance_ratio": "varratio",
    "information_gain": "infogain",
    "gain_ratio": "gainratio",
    "chi_squared": "chi2",
    "relief": "relief",
    "equal_frequency": "eqfreq",
    "equal_width": "eqwidth",
    "none": "nodisc",
    "weighted_euclidean": "wEuclid",
    "unweighted_euclidean": "uEuclid",
    "max_distance": "maxDist",
    "triangular_kernel": "triKernel",
    "minkowski": "minkowski",
    "mean_rank": "meanRank",
    "median": "median",
    "mean": "mean",
    "second_learner_regression": "regress",
    "weighted_mean": "wmean",
    1: "k1",
    2: "k2",
    3: "k3",
    4: "k4",
    5: "k5",
    "dynamic": "kdyn",
}

MINKOWSKI_P = 3.0
MAX_BINS = 5


@dataclass(frozen=True)
class AbeConfig:
    subset_selection: str = "remove_nothing"
    feature_weighting: str = "uniform"
    discretization: str = "none"
    similarity: str = "weighted_euclidean"
    adaptation: str = "median"
    analogy_selection: int | str = 1

    def __post_init__(self):
        if self.feature_weighting == "off":
            object.__setattr__(self, "feature_weighting", "uniform")
        for f, allowed in zip(fields(self), (SUBSETS, SCHEMES, DISCRETIZERS, SIMILARITIES, ADAPTATIONS, SELECTORS)):
            if getattr(self, f.name) not in allowed:
                raise ValueError(f"{f.name}={getattr(self, f.name)!r} not in {allowed}")

    def violations(self) -> list[str]:
        out = []
        if self.feature_weighting in NEEDS_DISCRETIZATION and self.discretization == "none":
            out.append(f"{self.feature_weighting} needs a discretizer")
        if self.analogy_selection == 1 and self.adaptation != "median":
            out.append("k=1 is only expressed with median adaptation")
        return out

    @property
    def is_valid(self) -> bool:
        return not self.violations()

    @property
    def token(self) -> str:
        return "|".join(SHORT[getattr(self, f.name)] for f in fields(self))


ABE0 = AbeConfig()


def enumerate_configs(valid_only: bool = False):
    """Every point of the raw cross-product, optionally filtered to valid ones."""
    for s in SUBSETS:
        for w in SCHEMES:
            for d in DISCRETIZERS:
                for sim in SIMILARITIES:
                    for a in ADAPTATIONS:
                        for k in SELECTORS:
                            c = AbeConfig(s, w, d, sim, a, k)
                            if not valid_only or c.is_valid:
                                yield c


# ------------------------------------------------------------ discretization

def bin_count(n: int) -> int:
    return max(2, min(MAX_BINS, math.isqrt(n)))


def discretize(column, kind: str, bins: int = MAX_BINS) -> np.ndarray:
    """Bin index per value (``kind="none"`` returns the values unchanged)."""
    column = np.asarray(column, dtype=float)
    if kind == "none":
        return column
    if bins < 2:
        raise ValueError("bins must be >= 2")
    n = len(column)
    if n == 0 or np.ptp(column) == 0:
        return np.zeros(n, dtype=int)
    if kind == "equal_width":
        width = np.ptp(column) / bins
        return np.minimum(((column - column.min()) // width).astype(int), bins - 1)
    if kind == "equal_frequency":
        size = math.ceil(n / bins)
        rank = np.empty(n, dtype=int)
        rank[np.argsort(column, kind="stable")] = np.arange(n)
        return rank // size
    raise ValueError(f"unknown discretizer {kind!r}")


# ------------------------------------------------------------ feature weights

def _entropy(labels) -> float:
    _, counts = np.unique(labels, return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum())


def _cond_entropy(y, x) -> float:
    h = 0.0
    for v in np.unique(x):
        mask = x == v
        h += mask.mean() * _entropy(y[mask])
    return h


def _chi2(x, y) -> float:
    xs, xi = np.unique(x, return_inverse=True)
    ys, yi = np.unique(y, return_inverse=True)
    table = np.zeros((len(xs), len(ys)))
    np.add.at(table, (xi, yi), 1)
    expected = table.sum(1, keepdims=True) * table.sum(0, keepdims=True) / table.sum()
    return float(((table - expected) ** 2 / expected).sum())


def _abs_corr(a, b) -> float:
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        return 0.0
    return abs(float(np.corrcoef(a, b)[0, 1]))


def _ranks(a) -> np.ndarray:
    from scipy.stats import rankdata

    return rankdata(a)


def _variance_ratio(x, y) -> float:
    """Fraction of effort variance removed by the best single threshold on x."""
    n = len(y)
    total = np.var(y) * n
    if total == 0:
        return 0.0
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order] - y.mean()
    cut = np.flatnonzero(xs[1:] > xs[:-1])
    if cut.size == 0:
        return 0.0
    s1, s2 = np.cumsum(ys), np.cumsum(ys * ys)
    n_l = cut + 1
    n_r = n - n_l
    sse_l = s2[cut] - s1[cut] ** 2 / n_l
    sse_r = (s2[-1] - s2[cut]) - (s1[-1] - s1[cut]) ** 2 / n_r
    return float(max(0.0, 1 - (sse_l + sse_r).min() / total))


def _relief(x, y, k: int = 10) -> np.ndarray:
    """RReliefF weights using every row as a probe and k nearest hits."""
    n, p = x.shape
    k = min(k, n - 1)
    if k < 1 or np.ptp(y) == 0:
        return np.zeros(p)
    d = np.abs(x[:, None, :] - x[None, :, :]).sum(axis=2)
    np.fill_diagonal(d, np.inf)
    nn = np.argsort(d, axis=1, kind="stable")[:, :k]
    dy = np.abs(y[:, None] - y[nn]) / np.ptp(y)  # (n, k)
    dx = np.abs(x[:, None, :] - x[nn])  # (n, k, p)
    n_dc = dy.sum() / k
    n_da = dx.sum(axis=(0, 1)) / k
    n_dcda = (dy[:, :, None] * dx).sum(axis=(0, 1)) / k
    if n_dc == 0 or n_dc == n:
        return np.zeros(p)
    return n_dcda / n_dc - (n_da - n_dcda) / (n - n_dc)


def feature_weights(train: Dataset, scheme: str, discretizer: str = "none", bins: int | None = None) -> np.ndarray:
    """Non-negative per-feature weights with mean 1.

    ``train`` is expected to be min-max normalized already. Schemes in
    ``NEEDS_DISCRETIZATION`` bin every feature and the effort first.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown weighting scheme {scheme!r}")
    x, y = train.rows, train.efforts
    n, p = x.shape
    if scheme == "uniform" or p == 0:
        return np.ones(p)
    if scheme in NEEDS_DISCRETIZATION:
        if discretizer == "none":
            raise ValueError(f"{scheme} needs a discretizer other than 'none'")
        b = bins or bin_count(n)
        yb = discretize(y, discretizer, b)
        xb = [discretize(x[:, j], discretizer, b) for j in range(p)]
        if scheme == "information_gain":
            hy = _entropy(yb)
            raw = [hy - _cond_entropy(yb, c) for c in xb]
        elif scheme == "gain_ratio":
            hy = _entropy(yb)
            raw = [(hy - _cond_entropy(yb, c)) / h if (h := _entropy(c)) > 0 else 0.0 for c in xb]
        else:
            raw = [_chi2(c, yb) for c in xb]
    elif scheme == "pearson_correlation":
        raw = [_abs_corr(x[:, j], y) for j in range(p)]
    elif scheme == "spearman_correlation":
        ry = _ranks(y)
        raw = [_abs_corr(_ranks(x[:, j]), ry) for j in range(p)]
    elif scheme == "variance_ratio":
        raw = [_variance_ratio(x[:, j], y) for j in range(p)]
    else:
        raw = _relief(x, y)
    w = np.nan_to_num(np.maximum(np.asarray(raw, dtype=float), 0.0))
    if w.sum() <= 0:
        return np.ones(p)
    return w / w.mean()


# ------------------------------------------------------------ similarity

def _rank_against(table_sorted: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Mid-rank of each value within the matching training column."""
    out = np.empty_like(rows, dtype=float)
    for j in range(rows.shape[1]):
        col = table_sorted[:, j]
        lo = np.searchsorted(col, rows[:, j], side="left")
        hi = np.searchsorted(col, rows[:, j], side="right")
        out[:, j] = lo + 0.5 * (hi - lo)
    return out


def distance_matrix(rows, table, weights, kind: str, ranks_table=None) -> np.ndarray:
    """Distances between each of ``rows`` and each training row of ``table``.

    ``ranks_table`` is the column-sorted training table, required by
    ``mean_rank``.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    table = np.atleast_2d(np.asarray(table, dtype=float))
    w = np.asarray(weights, dtype=float)
    if rows.shape[1] != table.shape[1] or len(w) != table.shape[1]:
        raise ValueError("arity mismatch")
    if kind == "mean_rank":
        if ranks_table is None:
            ranks_table = np.sort(table, axis=0)
        ra, rb = _rank_against(ranks_table, rows), _rank_against(ranks_table, table)
        return (w * np.abs(ra[:, None, :] - rb[None, :, :])).mean(axis=2)
    diff = np.abs(rows[:, None, :] - table[None, :, :])
    if kind in ("weighted_euclidean", "triangular_kernel"):
        return np.sqrt((w * diff**2).sum(axis=2))
    if kind == "unweighted_euclidean":
        return np.sqrt((diff**2).sum(axis=2))
    if kind == "max_distance":
        return (np.sqrt(w) * diff).max(axis=2, initial=0.0)
    if kind == "minkowski":
        return ((w * diff**MINKOWSKI_P).sum(axis=2)) ** (1 / MINKOWSKI_P)
    raise ValueError(f"unknown similarity {kind!r}")


def similarity(a, b, weights, kind: str, aux=None) -> float:
    """Distance between two normalized vectors; ``aux`` is the training table for ``mean_rank``."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("arity mismatch")
    ranks = None if aux is None else np.sort(np.atleast_2d(aux), axis=0)
    if kind == "mean_rank" and ranks is None:
        ranks = np.sort(np.vstack([a, b]), axis=0)
    return float(distance_matrix(a[None, :], b[None, :], weights, kind, ranks)[0, 0])


# ------------------------------------------------------------ adaptation

def _kernel(k: int) -> np.ndarray:
    """Triangular rank weights: k, k-1, ..., 1 for the first k neighbours."""
    return np.arange(k, 0, -1, dtype=float)


def _regress(xtx, xty, query_x) -> np.ndarray:
    """Least-squares prediction from accumulated normal equations."""
    coef = np.linalg.pinv(xtx, rcond=1e-10, hermitian=True) @ xty[:, :, None]
    return coef[:, 0, 0] + np.einsum("qi,qi->q", query_x, coef[:, 1:, 0])


def adapt(efforts_k: np.ndarray, kind: str, triangular: bool = False,
          neigh_x: np.ndarray | None = None, query_x: np.ndarray | None = None) -> np.ndarray:
    """Combine the efforts of the k nearest analogies (one row per query).

    ``efforts_k`` is (queries, k) ordered nearest first.
    """
    q, k = efforts_k.shape
    if kind == "median":
        return np.median(efforts_k, axis=1)
    if kind in ("mean", "weighted_mean"):
        w = np.ones(k) if kind == "mean" else 1.0 / np.arange(1, k + 1)
        if triangular:
            w = w * _kernel(k)
        return efforts_k @ (w / w.sum())
    if kind == "second_learner_regression":
        p = neigh_x.shape[2]
        if k < p + 1:
            return efforts_k.mean(axis=1)
        design = np.concatenate([np.ones((q, k, 1)), neigh_x], axis=2)
        xtx = np.einsum("qki,qkj->qij", design, design)
        xty = np.einsum("qki,qk->qi", design, efforts_k)
        return _regress(xtx, xty, query_x)
    raise ValueError(f"unknown adaptation {kind!r}")


# ------------------------------------------------------------ model

def outlier_mask(efforts) -> np.ndarray:
    """Rows kept by the 1.5 * IQR fence on effort."""
    q1, q3 = np.percentile(efforts, [25, 75])
    fence = 1.5 * (q3 - q1)
    return (efforts >= q1 - fence) & (efforts <= q3 + fence)


@dataclass(frozen=True)
class AbeModel:
    config: AbeConfig
    table: np.ndarray  # normalized training rows, ordered by key
    efforts: np.ndarray
    keys: np.ndarray
    weights: np.ndarray
    k: int
    scaling: MinMax
    ranks_table: np.ndarray

    def neighbours(self, rows) -> tuple[np.ndarray, np.ndarray]:
        """(order, scaled rows); ``order`` lists training indices nearest first."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.shape[1] != self.table.shape[1]:
            raise ValueError(f"expected {self.table.shape[1]} features, got {rows.shape[1]}")
        scaled = self.scaling.transform(rows)
        d = distance_matrix(scaled, self.table, self.weights, self.config.similarity, self.ranks_table)
        # table is stored in key order, so a stable sort breaks distance ties by key
        return np.argsort(d, axis=1, kind="stable"), scaled

    def predict(self, rows) -> np.ndarray:
        order, scaled = self.neighbours(rows)
        nn = order[:, : self.k]
        return adapt(
            self.efforts[nn],
            self.config.adaptation,
            self.config.similarity == "triangular_kernel",
            self.table[nn],
            scaled,
        )


def _loo_best_k(table, efforts, weights, cfg: AbeConfig, ranks_table) -> int:
    """k in [1, n-1] with the lowest leave-one-out median MRE (smallest k on ties)."""
    n = len(efforts)
    d = distance_matrix(table, table, weights, cfg.similarity, ranks_table)
    np.fill_diagonal(d, np.inf)
    order = np.argsort(d, axis=1, kind="stable")[:, : n - 1]
    eff = efforts[order]
    scored = efforts > 0
    if not scored.any():
        return 1
    tri = cfg.similarity == "triangular_kernel"
    regress = cfg.adaptation == "second_learner_regression"
    p = table.shape[1]
    if regress:
        xtx = np.zeros((n, p + 1, p + 1))
        xty = np.zeros((n, p + 1))
    best_k, best = 1, np.inf
    for k in range(1, n):
        if regress:
            # grow the normal equations one neighbour at a time
            row = np.concatenate([np.ones((n, 1)), table[order[:, k - 1]]], axis=1)
            xtx += row[:, :, None] * row[:, None, :]
            xty += row * eff[:, k - 1, None]
            pred = eff[:, :k].mean(axis=1) if k < p + 1 else _regress(xtx, xty, table)
        else:
            pred = adapt(eff[:, :k], cfg.adaptation, tri)
        mre = np.abs(efforts[scored] - pred[scored]) / efforts[scored]
        score = float(np.median(mre))
        if score < best - 1e-12:
            best_k, best = k, score
    return best_k


def abe_fit(train: Dataset, c: AbeConfig = ABE0, seed: int = 0, keys=None) -> AbeModel:
    """Fit an analogy model. ``keys`` are stable row identifiers for tie-breaking
    (defaults to the row position in ``train``)."""
    if not c.is_valid:
        raise ValueError(f"invalid ABE configuration {c.token}: {c.violations()}")
    rows, efforts = train.rows, train.efforts
    keys = np.arange(len(efforts)) if keys is None else np.asarray(keys)
    if len(keys) != len(efforts):
        raise ValueError("one key per training row")
    if len(efforts) < 2:
        raise ValueError("analogy estimation needs at least 2 training rows")
    if c.subset_selection == "outlier_prune":
        keep = outlier_mask(efforts)
        rows, efforts, keys = rows[keep], efforts[keep], keys[keep]
        if len(efforts) < 2:
            raise ValueError("fewer than 2 rows left after outlier pruning")
    by_key = np.argsort(keys, kind="stable")
    rows, efforts, keys = rows[by_key], efforts[by_key], keys[by_key]

    scaling = MinMax.fit(rows)
    table = scaling.transform(rows)
    weights = feature_weights(Dataset(train.name, train.feature_names, table, efforts), c.feature_weighting, c.discretization)
    ranks_table = np.sort(table, axis=0)
    if c.analogy_selection == "dynamic":
        k = _loo_best_k(table, efforts, weights, c, ranks_table)
    else:
        k = min(int(c.analogy_selection), len(efforts))
    for a in (table, efforts, keys, weights, ranks_table):
        a.setflags(write=False)
    return AbeModel(c, table, efforts, keys, weights, k, scaling, ranks_table)


def abe_predict(m: AbeModel, row) -> float:
    return float(m.predict(np.asarray(row, dtype=float)[None, :])[0])


_LONG = {v: k for k, v in SHORT.items()}


def config_from_token(token: str) -> AbeConfig:
    """Inverse of ``AbeConfig.token``."""
    parts = token.split("|")
    if len(parts) != 6:
        raise ValueError(f"expected 6 '|'-separated fields in {token!r}")
    try:
        return AbeConfig(*(_LONG[p] for p in parts))
    except KeyError as e:
        raise ValueError(f"unknown label {e.args[0]!r} in {token!r}") from None


def export_manifest(path=None) -> str:
    """One token per valid configuration, preceded by a count header."""
    valid = [c.token for c in enumerate_configs(valid_only=True)]
    raw = sum(1 for _ in enumerate_configs())
    text = f"# raw={raw} valid={len(valid)}\n" + "\n".join(valid) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
