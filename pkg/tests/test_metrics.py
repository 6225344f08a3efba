import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from effortune.metrics import FoldScore, mae, median_mre, mre, sa


def test_mre_examples():
    assert mre(100, 150) == pytest.approx(0.5)
    assert mre(100, 100) == 0
    assert mre(100, 0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        mre(0, 5)


def test_mae_examples():
    assert mae([10, 20], [10, 20]) == 0
    assert mae([10, 20], [20, 10]) == 10
    assert mae([7], [3]) == 4
    with pytest.raises(ValueError):
        mae([1, 2], [1])
    with pytest.raises(ValueError):
        mae([], [])


def test_sa_examples():
    assert sa(5.0, 5.0) == 0
    assert sa(0.0, 5.0) == 100
    assert sa(2.07 * 3.0, 3.0) == pytest.approx(-107)
    with pytest.raises(ValueError):
        sa(1.0, 0.0)


def test_median_mre_skips_zero_actuals():
    assert median_mre([0, 100, 200], [50, 150, 200]) == pytest.approx(0.25)
    assert np.isnan(median_mre([0, 0], [1, 2]))


def test_fold_score_invariants():
    FoldScore("CART", "kemerer", 0, 0, 0.3, 100.0, 1.0)
    with pytest.raises(ValueError):
        FoldScore("CART", "kemerer", 0, 0, 0.3, 100.5, 1.0)
    with pytest.raises(ValueError):
        FoldScore("CART", "kemerer", 0, 0, -0.1, 10, 1.0)
    a = FoldScore("CART", "kemerer", 0, 1, 0.3, 12.0, 1.0)
    assert a.scores() == FoldScore("CART", "kemerer", 0, 1, 0.3, 12.0, 9.0).scores()


efforts = st.lists(st.floats(1, 1e5), min_size=1, max_size=30)


@settings(max_examples=200)
@given(efforts, st.data(), st.floats(0.01, 1000))
def test_sa_is_scale_invariant(actual, data, c):
    pred = data.draw(st.lists(st.floats(0, 1e5), min_size=len(actual), max_size=len(actual)))
    guess = data.draw(st.floats(1, 1e5))
    a, p = np.array(actual), np.array(pred)
    s1 = sa(mae(a, p), guess)
    s2 = sa(mae(c * a, c * p), c * guess)
    assert s2 == pytest.approx(s1, rel=1e-9, abs=1e-7)


@settings(max_examples=200)
@given(efforts, st.data())
def test_median_mre_permutation_invariant(actual, data):
    pred = data.draw(st.lists(st.floats(0, 1e5), min_size=len(actual), max_size=len(actual)))
    perm = data.draw(st.permutations(range(len(actual))))
    a, p = np.array(actual), np.array(pred)
    assert median_mre(a[perm], p[perm]) == median_mre(a, p)
