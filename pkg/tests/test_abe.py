import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from effortune.abe import (
    ABE0,
    ADAPTATIONS,
    AbeConfig,
    SIMILARITIES,
    abe_fit,
    abe_predict,
    adapt,
    config_from_token,
    discretize,
    enumerate_configs,
    export_manifest,
    feature_weights,
    outlier_mask,
    similarity,
)
from effortune.dataset import DATASETS, Dataset, MinMax, load_bundled


def brute_force_nn(train_rows, train_efforts, row):
    """Oracle: scan every training row with plain Euclidean distance on min-max scaled values."""
    lo, hi = train_rows.min(axis=0), train_rows.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    scale = lambda r: np.clip(np.where(hi > lo, (r - lo) / span, 0.0), 0, 1)
    t, q = scale(train_rows), scale(row)
    best, best_i = math.inf, -1
    for i in range(len(t)):
        dist = math.sqrt(((t[i] - q) ** 2).sum())
        if dist < best:
            best, best_i = dist, i
    return train_efforts[best_i]


def loo_best_k(rows, efforts):
    """Oracle: leave-one-out median MRE of unit-weight k-NN median for every k."""
    n = len(efforts)
    scores = {}
    for k in range(1, n):
        errs = []
        for i in range(n):
            keep = np.array([j for j in range(n) if j != i])
            d = np.sqrt(((rows[keep] - rows[i]) ** 2).sum(axis=1))
            nn = keep[np.argsort(d, kind="stable")[:k]]
            errs.append(abs(np.median(efforts[nn]) - efforts[i]) / efforts[i])
        scores[k] = np.median(errs)
    return min(scores, key=lambda k: (scores[k], k))


# ---------------------------------------------------------------- config

def test_config_counts():
    assert sum(1 for _ in enumerate_configs()) == 6912
    assert sum(1 for _ in enumerate_configs(valid_only=True)) == 2 * 21 * 6 * 21


def test_config_rules_and_tokens():
    assert AbeConfig(feature_weighting="off").feature_weighting == "uniform"
    bad = AbeConfig(feature_weighting="information_gain", discretization="none")
    assert not bad.is_valid
    assert not AbeConfig(adaptation="mean", analogy_selection=1).is_valid
    with pytest.raises(ValueError):
        AbeConfig(similarity="cosine")
    c = AbeConfig("outlier_prune", "relief", "equal_frequency", "weighted_euclidean", "median", 3)
    assert c.token == "prune|relief|eqfreq|wEuclid|median|k3"
    assert config_from_token(c.token) == c
    with pytest.raises(ValueError):
        config_from_token("prune|relief")


def test_manifest_export(tmp_path):
    text = export_manifest(tmp_path / "aben.txt")
    lines = (tmp_path / "aben.txt").read_text().splitlines()
    assert lines[0] == "# raw=6912 valid=5292"
    assert len(lines) == 5293 and len(set(lines[1:])) == 5292
    assert text.splitlines() == lines
    assert all(config_from_token(t).is_valid for t in lines[1:])


# ---------------------------------------------------------------- fit / predict examples

def test_abe0_weights_are_one():
    m = abe_fit(load_bundled("albrecht"), ABE0)
    np.testing.assert_array_equal(m.weights, np.ones(m.table.shape[1]))
    assert m.k == 1


def test_outlier_prune_drops_extreme_row():
    efforts = np.array([10, 11, 12, 13, 1000.0])
    assert outlier_mask(efforts).tolist() == [True, True, True, True, False]
    d = Dataset("t", ["x"], [[1], [2], [3], [4], [5]], efforts)
    m = abe_fit(d, AbeConfig(subset_selection="outlier_prune"))
    assert 1000 not in m.efforts and len(m.efforts) == 4


def test_fit_errors():
    with pytest.raises(ValueError):
        abe_fit(Dataset("t", ["x"], [[1]], [3]), ABE0)
    d = load_bundled("kemerer")
    with pytest.raises(ValueError):
        abe_fit(d, AbeConfig(adaptation="mean"))
    with pytest.raises(ValueError):
        abe_fit(d, AbeConfig(feature_weighting="gain_ratio"))
    with pytest.raises(ValueError):
        abe_fit(d, ABE0, keys=[1, 2])


def test_dynamic_k_is_one_when_1nn_is_exact():
    # pairs of identical projects: the nearest neighbour is always a perfect analogue
    x = np.repeat(np.arange(6.0), 2)[:, None]
    y = np.repeat([10.0, 40, 90, 160, 250, 360], 2)
    d = Dataset("t", ["x"], x, y)
    m = abe_fit(d, AbeConfig(adaptation="median", analogy_selection="dynamic"))
    assert m.k == 1
    assert loo_best_k(MinMax.fit(x).transform(x), y) == 1


@pytest.mark.parametrize("seed", range(4))
def test_dynamic_k_matches_loo_oracle(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 10, size=(14, 2))
    y = rng.uniform(1, 100, 14)
    m = abe_fit(Dataset("t", ["a", "b"], x, y), AbeConfig(adaptation="median", analogy_selection="dynamic"))
    assert m.k == loo_best_k(MinMax.fit(x).transform(x), y)


def test_exact_match_returns_its_effort_for_every_metric():
    d = load_bundled("kemerer")
    for sim in SIMILARITIES:
        m = abe_fit(d, AbeConfig(similarity=sim))
        for i in (0, 7, 14):
            assert abe_predict(m, d.rows[i]) == d.efforts[i]


def test_adaptation_examples():
    e = np.array([[10.0, 20.0, 60.0]])
    assert adapt(e, "mean")[0] == pytest.approx(30)
    assert adapt(e, "median")[0] == pytest.approx(20)
    # 1/rank weights 1, 1/2, 1/3
    assert adapt(e, "weighted_mean")[0] == pytest.approx((10 + 10 + 20) / (1 + 1 / 2 + 1 / 3))


def test_regression_adaptation_recovers_plane_and_falls_back():
    rng = np.random.default_rng(1)
    nx = rng.uniform(size=(1, 5, 2))
    eff = 3 + nx[0] @ [2.0, -1.0]
    q = np.array([[0.5, 0.5]])
    assert adapt(eff[None, :], "second_learner_regression", neigh_x=nx, query_x=q)[0] == pytest.approx(3.5)
    # 2 neighbours < 3 coefficients: plain mean
    assert adapt(eff[None, :2], "second_learner_regression", neigh_x=nx[:, :2], query_x=q)[0] == pytest.approx(eff[:2].mean())


def test_arity_mismatch():
    m = abe_fit(load_bundled("kemerer"), ABE0)
    with pytest.raises(ValueError):
        abe_predict(m, [1.0, 2.0])
    with pytest.raises(ValueError):
        similarity([0, 0], [1, 1, 1], [1, 1], "weighted_euclidean")


# ---------------------------------------------------------------- similarity

def test_similarity_examples():
    a, b, w = np.zeros(2), np.ones(2), np.ones(2)
    assert similarity(a, b, w, "weighted_euclidean") == pytest.approx(math.sqrt(2))
    assert similarity(a, b, w, "minkowski") == pytest.approx(2 ** (1 / 3))
    assert similarity(a, b, w, "max_distance") == pytest.approx(1)
    assert similarity(a, b, [4, 0], "unweighted_euclidean") == pytest.approx(math.sqrt(2))
    for kind in SIMILARITIES:
        v = np.array([0.2, 0.7, 0.1])
        assert similarity(v, v, np.ones(3), kind, aux=np.eye(3)) == 0


def test_mean_rank_against_training_table():
    table = np.array([[0.0], [0.5], [1.0]])
    # ranks 0.5, 1.5, 2.5 -> |0.5 - 2.5| = 2
    assert similarity([0.0], [1.0], [1.0], "mean_rank", aux=table) == pytest.approx(2)


def test_triangular_kernel_weights_nearer_neighbours_more():
    e = np.array([[10.0, 20.0, 60.0]])
    assert adapt(e, "mean", triangular=True)[0] == pytest.approx((30 + 40 + 60) / 6)


# ---------------------------------------------------------------- weights / discretization

def test_discretize_examples():
    assert discretize([1, 2, 3, 4], "equal_width", 2).tolist() == [0, 0, 1, 1]
    assert discretize([1, 1, 1, 100], "equal_frequency", 2).tolist() == [0, 0, 1, 1]
    assert discretize([7, 7, 7], "equal_width", 3).tolist() == [0, 0, 0]
    assert discretize([7, 7, 7], "equal_frequency", 3).tolist() == [0, 0, 0]
    np.testing.assert_array_equal(discretize([3.5, 1.0], "none"), [3.5, 1.0])
    with pytest.raises(ValueError):
        discretize([1, 2], "equal_width", 1)


def test_weight_examples():
    rng = np.random.default_rng(3)
    y = rng.uniform(1, 100, 40)
    x = np.column_stack([y, rng.uniform(size=40)])
    d = Dataset("t", ["dup", "noise"], MinMax.fit(x).transform(x), y)
    np.testing.assert_array_equal(feature_weights(d, "uniform"), [1, 1])
    w = feature_weights(d, "pearson_correlation")
    # oracle: direct correlation of each column with effort
    r = [abs(np.corrcoef(d.rows[:, j], y)[0, 1]) for j in range(2)]
    assert w[0] > w[1]
    np.testing.assert_allclose(w, np.array(r) / np.mean(r))
    with pytest.raises(ValueError):
        feature_weights(d, "information_gain", "none")
    for scheme in ("spearman_correlation", "variance_ratio", "relief"):
        assert feature_weights(d, scheme)[0] > feature_weights(d, scheme)[1]
    for scheme in ("information_gain", "gain_ratio", "chi_squared"):
        assert feature_weights(d, scheme, "equal_frequency")[0] > feature_weights(d, scheme, "equal_frequency")[1]


@pytest.mark.parametrize("name", ["kemerer", "maxwell", "desharnais"])
def test_weights_finite_nonnegative_mean_one(name):
    d = load_bundled(name)
    d = Dataset(d.name, d.feature_names, MinMax.fit(d.rows).transform(d.rows), d.efforts)
    for scheme, disc in [("uniform", "none"), ("pearson_correlation", "none"), ("spearman_correlation", "none"),
                         ("variance_ratio", "none"), ("information_gain", "equal_width"),
                         ("gain_ratio", "equal_frequency"), ("chi_squared", "equal_width"), ("relief", "none")]:
        w = feature_weights(d, scheme, disc)
        assert np.isfinite(w).all() and (w >= 0).all()
        assert w.mean() == pytest.approx(1)


# ---------------------------------------------------------------- properties

@pytest.mark.parametrize("name", [n for n in DATASETS if len(load_bundled(n)) <= 100])
def test_abe0_equals_brute_force_nn(name):
    d = load_bundled(name)
    n = len(d)
    test_idx = np.arange(0, n, 3)
    train = d.subset(np.setdiff1d(np.arange(n), test_idx))
    m = abe_fit(train, ABE0)
    for i in test_idx:
        assert abe_predict(m, d.rows[i]) == brute_force_nn(train.rows, train.efforts, d.rows[i])


def _random_config(draw):
    valid = list(enumerate_configs(valid_only=True))
    return valid[draw(st.integers(0, len(valid) - 1))]


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_permutation_with_keys_preserved(data):
    cfg = _random_config(data.draw)
    seed = data.draw(st.integers(0, 10_000))
    rng = np.random.default_rng(seed)
    n = 12
    # coarse integer features make distance ties common
    x = rng.integers(0, 3, size=(n, 3)).astype(float)
    y = rng.integers(1, 50, n).astype(float)
    q = rng.integers(0, 3, size=(5, 3)).astype(float)
    perm = rng.permutation(n)
    a = abe_fit(Dataset("t", ["a", "b", "c"], x, y), cfg)
    b = abe_fit(Dataset("t", ["a", "b", "c"], x[perm], y[perm]), cfg, keys=perm)
    np.testing.assert_allclose(a.predict(q), b.predict(q))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_predictions_within_neighbour_range(data):
    cfg = _random_config(data.draw)
    if cfg.adaptation == "second_learner_regression":
        cfg = replace(cfg, adaptation="mean")
    rng = np.random.default_rng(data.draw(st.integers(0, 10_000)))
    x = rng.uniform(0, 5, size=(15, 2))
    y = rng.uniform(1, 100, 15)
    m = abe_fit(Dataset("t", ["a", "b"], x, y), cfg)
    q = rng.uniform(-1, 6, size=(6, 2))
    order, _ = m.neighbours(q)
    nn = m.efforts[order[:, : m.k]]
    pred = m.predict(q)
    assert (pred >= nn.min(axis=1) - 1e-9).all() and (pred <= nn.max(axis=1) + 1e-9).all()


def test_adaptations_coincide_at_k1():
    e = np.array([[42.0]])
    got = [adapt(e, a, neigh_x=np.zeros((1, 1, 3)), query_x=np.zeros((1, 3)))[0] for a in ADAPTATIONS]
    assert got == [42.0] * len(ADAPTATIONS)
