import numpy as np
import pytest

from responserank.learners import (ALL_LEARNERS, Learner, PairData, RankingData, RegressionData,
                                   default_pool_size, fit, loss_for, parse_learners,
                                   pool_rankings, prepare)
from responserank.losses import bt_bce, pl_nll
from responserank.model import TrainConfig, init_net, utility
from responserank.synth import LabelerConfig, build_dataset


@pytest.fixture(scope="module")
def ds():
    return build_dataset(LabelerConfig(), 30, 20, 5, seed=4)


def test_parse_learners():
    assert parse_learners("bt, rr-pool") == [Learner.BT, Learner.RR_POOL]
    with pytest.raises(ValueError):
        parse_learners("bt,xx")
    assert Learner.RR.label == "ResponseRank"


def test_default_pool_size():
    assert default_pool_size(50) == 10
    assert default_pool_size(26) == 6


def test_prepare_types(ds):
    rng = np.random.default_rng(0)
    assert isinstance(prepare("bt", ds.train, rng), PairData)
    assert isinstance(prepare("rtreg", ds.train, rng), RegressionData)
    for k in ("rr", "rr-pool", "rr-perm"):
        assert isinstance(prepare(k, ds.train, rng), RankingData)
    with pytest.raises(TypeError):
        loss_for(Learner.BT, init_net([5, 4, 1], rng), prepare("rr", ds.train, rng))


def test_rr_rankings_respect_strata(ds):
    data = prepare("rr", ds.train, np.random.default_rng(0))
    assert len(data) == len(ds.train)
    for r in data.rankings:
        assert len({int(ds.train.stratum[i]) for i in r.indices}) == 1
        assert r.strengths == sorted(r.strengths)


def test_pool_rankings_cover_everything(ds):
    rs = pool_rankings(ds.train, 7, np.random.default_rng(1))
    assert sorted(i for r in rs for i in r.indices) == list(range(len(ds.train)))
    assert max(len(r) for r in rs) <= 7


def test_ranking_loss_matches_per_ranking_sum(ds):
    data = prepare("rr", ds.train, np.random.default_rng(0))
    net = init_net([5, 8, 1], np.random.default_rng(2))
    loss, _ = data.loss_and_grad(net)
    expect = 0.0
    for r in data.rankings:
        s = [utility(net, c.winner) - utility(net, c.loser) for c in r.ordered]
        expect += pl_nll(s)
    assert loss == pytest.approx(expect / len(ds.train), rel=1e-12)


def test_pair_loss_matches_bce(ds):
    data = prepare("bt", ds.train, np.random.default_rng(0))
    net = init_net([5, 8, 1], np.random.default_rng(2))
    loss, _ = data.loss_and_grad(net)
    s = utility(net, data.winners) - utility(net, data.losers)
    assert loss == pytest.approx(float(np.mean(bt_bce(s))), rel=1e-12)


@pytest.mark.parametrize("kind", ALL_LEARNERS)
def test_fit_is_deterministic_and_learns(ds, kind):
    cfg = TrainConfig(steps=30)
    h1, h2 = [], []
    a = fit(kind, ds.train, cfg, seed=5, history=h1)
    b = fit(kind, ds.train, cfg, seed=5, history=h2)
    np.testing.assert_array_equal(a.flat, b.flat)
    assert h1[-1] < h1[0]


def test_learners_share_initialisation(ds):
    cfg = TrainConfig(steps=1, lr=0.0, weight_decay=0.0)
    nets = [fit(k, ds.train, cfg, seed=9) for k in ALL_LEARNERS]
    for n in nets[1:]:
        np.testing.assert_array_equal(n.flat, nets[0].flat)
