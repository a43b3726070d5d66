"""Training procedures for BT, ResponseRank and the RT-regression baselines."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import losses
from .losses import LinkConfig
from .model import TrainConfig, UtilityNet, init_net, pair_scores_and_grad, train
from .ranking import RankingTarget, build_rankings, normalize_all, permute_strengths


class Learner(str, enum.Enum):
    BT = "bt"
    RR = "rr"
    RR_POOL = "rr-pool"
    RR_PERM = "rr-perm"
    RTREG = "rtreg"
    RTREG_PERM = "rtreg-perm"

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    Learner.BT: "BT",
    Learner.RR: "ResponseRank",
    Learner.RR_POOL: "ResponseRank-Pool",
    Learner.RR_PERM: "ResponseRank-Perm",
    Learner.RTREG: "RtRegression",
    Learner.RTREG_PERM: "RtRegression-Perm",
}

ALL_LEARNERS = tuple(Learner)


def parse_learners(text: str) -> list[Learner]:
    return [Learner(t.strip()) for t in text.split(",") if t.strip()]


@dataclass
class PairData:
    winners: np.ndarray
    losers: np.ndarray

    def __len__(self):
        return len(self.winners)

    def loss_and_grad(self, net: UtilityNet):
        n = len(self)

        def score_loss(s):
            return float(np.sum(losses.bt_bce(s, True))) / n, losses.bt_bce_grad(s, True) / n

        return pair_scores_and_grad(net, self.winners, self.losers, score_loss)


@dataclass
class RankingData:
    rankings: list[RankingTarget]

    def __post_init__(self):
        flat = [c for r in self.rankings for c in r.ordered]
        self.winners = np.array([c.winner for c in flat])
        self.losers = np.array([c.loser for c in flat])
        width = max(len(r) for r in self.rankings)
        self.pos = np.zeros((len(self.rankings), width), dtype=np.int64)
        self.mask = np.zeros((len(self.rankings), width), dtype=bool)
        k = 0
        for i, r in enumerate(self.rankings):
            self.pos[i, :len(r)] = np.arange(k, k + len(r))
            self.mask[i, :len(r)] = True
            k += len(r)

    def __len__(self):
        return len(self.winners)

    def loss_and_grad(self, net: UtilityNet):
        n = len(self)

        def score_loss(s):
            loss, G = losses.pl_nll_batch(s[self.pos], self.mask)
            gs = np.zeros(n)
            gs[self.pos[self.mask]] = G[self.mask]
            return loss / n, gs / n

        return pair_scores_and_grad(net, self.winners, self.losers, score_loss)


@dataclass
class RegressionData:
    a: np.ndarray
    b: np.ndarray
    target: np.ndarray

    def __len__(self):
        return len(self.target)

    def loss_and_grad(self, net: UtilityNet):
        n = len(self)

        def score_loss(s):
            return (float(np.sum(losses.mse(s, self.target))) / n,
                    losses.mse_grad(s, self.target) / n)

        return pair_scores_and_grad(net, self.a, self.b, score_loss)


PreparedData = PairData | RankingData | RegressionData


def default_pool_size(train_size: int, num_strata: int = 5) -> int:
    return math.ceil(train_size / num_strata)


def pool_rankings(comps, pool_size: int, rng: np.random.Generator) -> list[RankingTarget]:
    """Random groups of ``pool_size`` comparisons, ignoring strata."""
    members = normalize_all(comps)
    order = rng.permutation(len(members))
    out = []
    for lo in range(0, len(order), pool_size):
        # a chunk with tied strengths is split further rather than dropped
        out.extend(build_rankings([members[i] for i in order[lo:lo + pool_size]]))
    return out


def prepare(kind: Learner, comps, rng: np.random.Generator, pool_size: int | None = None,
            link_cfg: LinkConfig = losses.DEFAULT_LINK) -> PreparedData:
    """Map training comparisons to the targets a learner trains on."""
    kind = Learner(kind)
    if kind is Learner.BT:
        members = normalize_all(comps)
        return PairData(np.array([c.winner for c in members]), np.array([c.loser for c in members]))
    if kind in (Learner.RTREG, Learner.RTREG_PERM):
        if kind is Learner.RTREG_PERM:
            comps = permute_strengths(comps, rng)
        target = np.asarray(losses.rt_regression_target(comps.pref_a, comps.strength, link_cfg),
                            dtype=float).reshape(-1)
        return RegressionData(comps.a, comps.b, target)
    if kind is Learner.RR_POOL:
        size = pool_size or default_pool_size(len(comps))
        return RankingData(pool_rankings(comps, size, rng))
    if kind is Learner.RR_PERM:
        comps = permute_strengths(comps, rng)
    members = normalize_all(comps)
    return RankingData(build_rankings(members, strata_key=lambda c: int(comps.stratum[c.index])))


def loss_for(kind: Learner, net: UtilityNet, prepared: PreparedData):
    expected = {Learner.BT: PairData, Learner.RTREG: RegressionData,
                Learner.RTREG_PERM: RegressionData}.get(Learner(kind), RankingData)
    if not isinstance(prepared, expected):
        raise TypeError(f"{kind} expects {expected.__name__}, got {type(prepared).__name__}")
    return prepared.loss_and_grad(net)


def fit(kind: Learner, comps, train_cfg: TrainConfig = TrainConfig(), seed: int = 0,
        pool_size: int | None = None, link_cfg: LinkConfig = losses.DEFAULT_LINK,
        history: list | None = None) -> UtilityNet:
    """Prepare targets once and run full-batch AdamW from a seeded init.

    Initialisation and data preparation use separate child streams of
    ``seed``, so every learner starts from the same weights for a given seed.
    """
    init_ss, prep_ss = np.random.SeedSequence(seed).spawn(2)
    d = comps.a.shape[1]
    net = init_net([d, *train_cfg.hidden, 1], np.random.default_rng(init_ss))
    prepared = prepare(kind, comps, np.random.default_rng(prep_ss), pool_size, link_cfg)
    return train(net, prepared.loss_and_grad, train_cfg, history)
