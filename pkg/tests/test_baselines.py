import itertools

import numpy as np
import pytest
from scipy.optimize import linprog
from scipy.stats import skew

from effortune.baselines import (
    apply_transform,
    atlm_fit,
    atlm_predict,
    lad_fit,
    lp4ee_fit,
    lp4ee_predict,
    mean_predictor,
    pick_transform,
    random_guess_mae,
)
from effortune.dataset import Dataset, load_bundled
from effortune.simplex import Infeasible, SimplexError, Unbounded, solve


def sar(x, y, a):
    return np.abs(y - x @ a).sum()


def grid_sar(x, y, lo=-4.0, hi=4.0, step=0.1):
    """Oracle: brute-force SAR minimum over a regular coefficient grid."""
    axis = np.arange(lo, hi + step / 2, step)
    grid = np.array(list(itertools.product(axis, repeat=x.shape[1])))
    best = np.inf
    for chunk in np.array_split(grid, max(1, len(grid) // 20000)):
        best = min(best, np.abs(y[None, :] - chunk @ x.T).sum(axis=1).min())
    return best, step


# ---------------------------------------------------------------- simplex

def test_simplex_textbook_lp():
    # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), value 36
    a = [[1, 0, 1, 0, 0], [0, 2, 0, 1, 0], [3, 2, 0, 0, 1]]
    r = solve([-3, -5, 0, 0, 0], a, [4, 12, 18])
    np.testing.assert_allclose(r.x[:2], [2, 6])
    assert r.fun == pytest.approx(-36)
    assert (r.reduced_costs >= -1e-9).all()


def test_simplex_infeasible_unbounded_and_cap():
    with pytest.raises(Infeasible):
        solve([1, 1], [[1, 1]], [-1])
    with pytest.raises(Unbounded):
        solve([-1, 0], [[1, -1]], [1])
    with pytest.raises(SimplexError):
        solve([-3, -5, 0, 0, 0], [[1, 0, 1, 0, 0], [0, 2, 0, 1, 0], [3, 2, 0, 0, 1]], [4, 12, 18], max_iter=1)


def test_simplex_agrees_with_highs():
    rng = np.random.default_rng(4)
    for _ in range(10):
        a = rng.uniform(0, 5, size=(6, 10))
        b = a @ rng.uniform(0, 1, 10)
        c = rng.uniform(-1, 2, 10)
        ref = linprog(c, A_eq=a, b_eq=b, bounds=(0, 10), method="highs")
        # add box rows x_i + s_i = 10 to match the bounded reference
        big = np.block([[a, np.zeros((6, 10))], [np.eye(10), np.eye(10)]])
        ours = solve(np.concatenate([c, np.zeros(10)]), big, np.concatenate([b, np.full(10, 10.0)]))
        assert ours.fun == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)


# ---------------------------------------------------------------- LP4EE

def test_lp4ee_exact_fit():
    d = Dataset("t", ["x"], [[1], [2], [3]], [2, 4, 6])
    m = lp4ee_fit(d)
    assert m.coef[0] == pytest.approx(2)
    assert m.sar == pytest.approx(0, abs=1e-9)
    assert lp4ee_predict(m, [10]) == pytest.approx(20)


def test_lp4ee_flat_optimum_returns_a_vertex():
    x, y = np.array([[1.0], [1.0]]), np.array([1.0, 3.0])
    # 1-D scan: SAR(a) = |1 - a| + |3 - a| is 2 on [1, 3] and larger outside
    scan = np.linspace(-2, 6, 801)
    assert min(sar(x, y, np.array([a])) for a in scan) == pytest.approx(2)
    coef, res = lad_fit(x, y)
    assert res.fun == pytest.approx(2)
    assert coef[0] == pytest.approx(1) or coef[0] == pytest.approx(3)


def test_lp4ee_beats_least_squares():
    rng = np.random.default_rng(10)
    x = rng.uniform(0, 10, size=(10, 2))
    y = x @ [1.5, 0.5] + rng.normal(0, 2, 10)
    coef, res = lad_fit(x, y)
    ls, *_ = np.linalg.lstsq(x, y, rcond=None)
    assert res.fun <= sar(x, y, ls) + 1e-9
    assert res.fun == pytest.approx(sar(x, y, coef))


@pytest.mark.parametrize("seed", range(6))
def test_lp4ee_matches_grid_search(seed):
    rng = np.random.default_rng(seed)
    p = 1 + seed % 3
    x = rng.uniform(0, 3, size=(8, p))
    y = np.abs(x @ rng.uniform(-1.5, 1.5, p) + rng.normal(0, 0.5, 8))
    coef, res = lad_fit(x, y)
    grid, step = grid_sar(x, y)
    bound = step / 2 * np.abs(x).sum()
    assert res.fun <= grid + 1e-9
    assert grid - res.fun <= bound
    assert (res.reduced_costs >= -1e-9).all()


def test_lp4ee_on_bundled_china_training_fold():
    d = load_bundled("china").subset(np.arange(0, 499, 3))
    m = lp4ee_fit(d)
    ls, *_ = np.linalg.lstsq(d.rows, d.efforts, rcond=None)
    assert m.sar <= sar(d.rows, d.efforts, ls)
    assert (m.lp.reduced_costs >= -1e-7).all()


# ---------------------------------------------------------------- ATLM

def test_atlm_recovers_noise_free_line():
    x = np.linspace(0, 10, 12)
    d = Dataset("t", ["x"], x[:, None], 3 + 2 * x)
    m = atlm_fit(d, [False])
    assert m.transforms == ("identity",)
    np.testing.assert_allclose(m.coef, [3, 2], atol=1e-6)
    np.testing.assert_allclose(m.predict(d.rows), d.efforts, atol=1e-6)
    assert atlm_predict(m, [0.0]) == pytest.approx(m.coef[0])


def test_log_transform_chosen_for_exponential_column():
    col = np.exp(np.arange(1, 9, dtype=float))
    # oracle: evaluate the three candidate skews directly
    skews = {n: abs(skew(apply_transform(n, col), bias=False)) for n in ("identity", "sqrt", "log")}
    assert min(skews, key=skews.get) == "log"
    assert pick_transform(col) == "log"


def test_constant_column_keeps_identity():
    assert pick_transform([3, 3, 3, 3]) == "identity"


def test_dummy_coding_and_unseen_level():
    rng = np.random.default_rng(0)
    lvl = np.tile([0.0, 1.0, 2.0], 5)
    size = rng.uniform(1, 10, 15)
    d = Dataset("t", ["lang", "size"], np.column_stack([lvl, size]), 10 + 5 * lvl + size)
    m = atlm_fit(d, [True, False])
    assert m.design(d.rows).shape == (15, 1 + 2 + 1)
    unseen = m.design([[7.0, 4.0]])
    np.testing.assert_array_equal(unseen[0, 1:3], [0, 0])


def test_atlm_singular_design_does_not_crash():
    x = np.column_stack([np.arange(8.0), np.arange(8.0)])
    d = Dataset("t", ["a", "b"], x, 1 + x[:, 0])
    m = atlm_fit(d, [False, False])
    assert np.all(np.isfinite(m.coef))


def test_atlm_too_few_rows():
    d = Dataset("t", ["a", "b"], [[1, 2], [2, 3], [3, 5]], [1, 2, 3])
    with pytest.raises(ValueError):
        atlm_fit(d, [False, False])


def test_atlm_coefficients_are_least_squares_optimal():
    d = load_bundled("desharnais")
    m = atlm_fit(d)
    x = m.design(d.rows)
    base = ((x @ m.coef - d.efforts) ** 2).sum()
    for j in range(len(m.coef)):
        for delta in (-1e-3, 1e-3):
            c = m.coef.copy()
            c[j] += delta
            assert ((x @ c - d.efforts) ** 2).sum() >= base * (1 - 1e-12)


# ---------------------------------------------------------------- guessing

def test_random_guess_degenerate_and_deterministic():
    actuals = [1.0, 5.0, 9.0]
    assert random_guess_mae([4.0, 4.0], actuals, runs=7, seed=3) == pytest.approx(np.mean(np.abs(np.array(actuals) - 4)))
    assert random_guess_mae([1, 2, 30], actuals, 500, 9) == random_guess_mae([1, 2, 30], actuals, 500, 9)
    with pytest.raises(ValueError):
        random_guess_mae([], actuals)
    with pytest.raises(ValueError):
        mean_predictor([])


def test_random_guess_converges_to_closed_form():
    train = np.array([1.0, 4.0, 10.0, 30.0])
    test = np.array([2.0, 8.0, 20.0])
    exact = np.abs(test[:, None] - train[None, :]).mean()
    assert random_guess_mae(train, test, runs=100_000, seed=1) == pytest.approx(exact, rel=0.02)


def test_mean_predictor_matches_converged_guess_baseline():
    # stated property: the sample-mean MAE equals the converged random-guess MAE (2%)
    d = load_bundled("desharnais")
    mae_mean = np.abs(d.efforts - mean_predictor(d).value).mean()
    mae_guess = random_guess_mae(d.efforts, d.efforts, runs=100_000, seed=0)
    assert mae_mean == pytest.approx(mae_guess, rel=0.02)
