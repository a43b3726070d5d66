import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from responserank.metrics import (DegradeGrid, UndefinedMetricError, choice_accuracy,
                                  confusion_matrix, degrade, kendall_tau, pdc,
                                  pdc_from_utilities, pdc_tce_grid, pearson, tce)
from responserank.model import UtilityNet
from responserank.synth import Comparisons

X = [3, 1, 4, 1, 5, 9, 2, 6]
Y = [2, 7, 1, 8, 2, 8, 1, 8]


def test_pearson_and_tau_frozen():
    # frozen from scipy.stats.pearsonr / kendalltau (tau-b)
    assert pearson(X, Y) == pytest.approx(0.20965531907301216, rel=1e-13)
    assert kendall_tau(X, Y) == pytest.approx(0.16051447078102563, rel=1e-13)


@given(st.lists(st.integers(-5, 5), min_size=3, max_size=30), st.integers(0, 1000))
def test_kendall_matches_scipy(xs, seed):
    ys = np.random.default_rng(seed).integers(-3, 3, len(xs))
    ref = stats.kendalltau(xs, ys).statistic
    if np.isnan(ref):
        with pytest.raises(UndefinedMetricError):
            kendall_tau(xs, ys)
    else:
        assert kendall_tau(xs, ys) == pytest.approx(ref, abs=1e-12)


def test_pearson_self_is_exactly_one():
    x = np.random.default_rng(0).normal(size=1000)
    assert pearson(x, x) == 1.0


def test_pearson_constant_undefined():
    with pytest.raises(UndefinedMetricError):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        pearson([1, 2], [1, 2, 3])


@given(st.floats(0.1, 10), st.floats(-10, 10), st.integers(0, 2 ** 31))
def test_pdc_affine_invariant(a, b, seed):
    rng = np.random.default_rng(seed)
    ua, ub = rng.normal(size=300), rng.normal(size=300)
    ha, hb = ua + rng.normal(size=300) * 0.5, ub + rng.normal(size=300) * 0.5
    base = pdc_from_utilities(ua, ub, ha, hb)
    assert pdc_from_utilities(ua, ub, a * ha + b, a * hb + b) == pytest.approx(base, abs=1e-12)


def test_pdc_uses_magnitudes():
    t = np.array([1.0, -2.0, 3.0, -0.5])
    assert pdc(t, -t) == 1.0


def test_degrade_endpoints():
    rng = np.random.default_rng(0)
    d = rng.normal(size=100)
    np.testing.assert_array_equal(degrade(d, 0, 0, rng), d)
    np.testing.assert_array_equal(degrade(d, 1, 0, rng), -d)
    m = degrade(d, 0, 1, rng)
    np.testing.assert_array_equal(np.sign(m), np.sign(d))
    assert sorted(np.abs(m)) == sorted(np.abs(d))
    with pytest.raises(ValueError):
        degrade(d, 1.5, 0, rng)


def test_tce():
    assert tce([0.2, 0.9], [0.5, 0.5]) == pytest.approx(0.35)


def test_confusion_matrix():
    cm = confusion_matrix([True, True, False, False, True], [True, False, False, True, True])
    np.testing.assert_array_equal(cm, [[2, 1], [1, 1]])


def test_choice_accuracy_with_ties():
    net = UtilityNet([np.array([[1.0]])], [np.zeros(1)])
    comps = Comparisons(np.array([[2.0], [0.0], [1.0]]), np.array([[1.0], [1.0], [1.0]]),
                        np.array([True, True, False]), np.ones(3), np.zeros(3, int))
    assert choice_accuracy(net, comps) == pytest.approx((1 + 0 + 0.5) / 3)


def test_grid_shape_and_scalings_agree():
    rows = pdc_tce_grid(DegradeGrid(items=200, pairs=2000, steps=3))
    assert len(rows) == 18
    raw = [r for r in rows if r["scaling"] == "raw"]
    aff = [r for r in rows if r["scaling"] == "affine"]
    for r, a in zip(raw, aff):
        assert r["pdc"] == pytest.approx(a["pdc"], abs=1e-12)
