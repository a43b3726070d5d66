import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from responserank.losses import (LinkConfig, bt_bce, bt_bce_grad, link, link_inverse, mse,
                                 mse_grad, pl_nll, pl_nll_batch, pl_nll_grad,
                                 rt_regression_target, sigmoid)

finite = st.floats(-50, 50, allow_nan=False)


def brute_pl_prob(order_scores):
    """Sequential-softmax probability of a full ordering (plain python)."""
    p, rest = 1.0, list(order_scores)
    for s in order_scores:
        p *= math.exp(s) / sum(math.exp(r) for r in rest)
        rest.remove(s)
    return p


# values computed with 40-digit mpmath from the sequential-softmax definition
@pytest.mark.parametrize("scores,expected", [
    ([1.0, -0.5, 2.0], 4.2844355971194407317),
    ([0.0], 0.69314718055994530942),
    ([3.0], 0.048587351573742058759),
    ([-2.0, 0.25], 3.4594427515624729065),
    ([30.0, -30.0], 30.000000000000187152),
])
def test_pl_nll_frozen(scores, expected):
    assert pl_nll(scores) == pytest.approx(expected, rel=1e-14)


def test_pl_matches_brute_force_probability():
    rng = np.random.default_rng(1)
    for k in range(1, 6):
        s = rng.normal(size=k)
        assert pl_nll(s) == pytest.approx(-math.log(brute_pl_prob([*s, 0.0])), rel=1e-12)


def test_pl_orderings_sum_to_one():
    s = [0.3, -1.2, 2.0]
    total = 0.0
    for perm in itertools.permutations(range(3)):
        total += math.exp(-pl_nll([s[i] for i in perm]))
    # orderings of the real items with the anchor last are only part of the mass
    assert 0 < total < 1


def test_bt_bce_frozen():
    assert bt_bce(1.5, True) == pytest.approx(0.2014132779827524095, rel=1e-15)
    assert bt_bce(1.5, False) == pytest.approx(1.7014132779827524095, rel=1e-15)


def test_bt_extremes_finite():
    assert bt_bce(800.0, True) == 0.0
    assert bt_bce(-800.0, True) == pytest.approx(800.0)
    assert np.isfinite(bt_bce_grad(np.array([-800.0, 800.0]), True)).all()


@given(finite)
def test_single_ranking_equals_bt(s):
    assert abs(pl_nll([s]) - bt_bce(s, True)) < 1e-12
    assert abs(pl_nll_grad([s])[0] - bt_bce_grad(s, True)) < 1e-12


@given(st.lists(st.floats(-20, 20, allow_nan=False), min_size=1, max_size=6))
def test_pl_grad_finite_difference(scores):
    s = np.array(scores)
    g = pl_nll_grad(s)
    h = 1e-6
    for i in range(s.size):
        e = np.zeros_like(s)
        e[i] = h
        fd = (pl_nll(s + e) - pl_nll(s - e)) / (2 * h)
        assert g[i] == pytest.approx(fd, abs=1e-5)


@given(st.lists(finite, min_size=1, max_size=8))
def test_pl_nonnegative_and_grad_bounds(scores):
    loss = pl_nll(scores)
    g = pl_nll_grad(scores)
    assert loss >= 0
    assert np.all(g >= -1 - 1e-12)


def test_pl_batch_padding_matches_individual():
    rng = np.random.default_rng(0)
    rows = [rng.normal(size=k) for k in (1, 3, 2)]
    S = np.zeros((3, 3))
    mask = np.zeros((3, 3), dtype=bool)
    for i, r in enumerate(rows):
        S[i, :r.size] = r
        mask[i, :r.size] = True
    loss, G = pl_nll_batch(S, mask)
    assert loss == pytest.approx(sum(pl_nll(r) for r in rows), rel=1e-13)
    for i, r in enumerate(rows):
        np.testing.assert_allclose(G[i, :r.size], pl_nll_grad(r), rtol=1e-12)
        assert np.all(G[i, r.size:] == 0)


def test_pl_extreme_scores_stable():
    assert np.isfinite(pl_nll([1e3, -1e3, 500.0]))
    assert np.isfinite(pl_nll_grad([1e3, -1e3, 500.0])).all()


def test_sigmoid_scalar_and_symmetry():
    assert sigmoid(0.0) == 0.5
    x = np.linspace(-40, 40, 17)
    np.testing.assert_allclose(sigmoid(x) + sigmoid(-x), 1.0, rtol=0, atol=1e-15)


def test_link_values():
    assert link(0.0) == 10.0
    assert link(1.0) == 5.0
    assert link(-4.0) == 2.0
    cfg = LinkConfig(1.0, 3.0)
    assert link(1.0, cfg) == 2.0


@given(st.floats(0, 1e3, allow_nan=False))
def test_link_roundtrip(du):
    assert link_inverse(link(du)) == pytest.approx(du, rel=1e-9, abs=1e-9)


def test_link_inverse_clamps_and_rejects():
    assert link_inverse(25.0) == 0.0
    with pytest.raises(ValueError):
        link_inverse(0.0)
    with pytest.raises(ValueError):
        LinkConfig(2.0, 1.0)


def test_rt_regression_target_sign():
    np.testing.assert_allclose(rt_regression_target([True, False], [5.0, 2.0]), [1.0, -4.0])


def test_mse_and_grad():
    assert mse(3.0, 1.0) == 4.0
    assert mse_grad(3.0, 1.0) == 4.0
