"""Synthetic preference datasets with ground-truth utilities and response times.

Three labelers are provided:

* ``deterministic``: the higher-utility item always wins, RT is the link mean.
* ``stochastic``: Bradley-Terry choices and log-normal RTs around the link mean.
* ``ddm``: choices and RTs drawn jointly from a drift-diffusion process.

Utilities are rescaled before labeling so the labeler parameters have a fixed
meaning regardless of the random network's output scale: the Bradley-Terry
style labelers see utilities with unit SD over the query items, the DDM sees
drifts (utility differences) with unit SD over the query pairs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterator, NamedTuple

import numpy as np

from .losses import LinkConfig, link, sigmoid
from .model import UtilityNet, init_net, utility


class LabelerKind(str, enum.Enum):
    DETERMINISTIC = "deterministic"
    STOCHASTIC = "stochastic"
    DDM = "ddm"


@dataclass(frozen=True)
class LabelerConfig:
    """Labeler and response-time generator parameters."""

    kind: LabelerKind = LabelerKind.DETERMINISTIC
    choice_temperature: float = 0.2
    rt_sd: float = 0.4  # SD of the log-normal RT in seconds
    rt_min: float = 0.0
    rt_max: float = 10.0
    ddm_threshold: float = 1.2  # boundary separation; barriers sit at +-threshold/2
    ddm_nondecision: float = 0.3
    ddm_drift_mult: float = 1.0
    ddm_noise_sd: float = 0.4
    ddm_dt: float = 0.001
    ddm_max_steps: int = 1_000_000
    num_strata: int = 5
    stratum_rt_sd: float = 3.0

    def __post_init__(self):
        object.__setattr__(self, "kind", LabelerKind(self.kind))
        if not self.rt_min < self.rt_max:
            raise ValueError("rt_min must be below rt_max")
        for name in ("choice_temperature", "ddm_threshold", "ddm_noise_sd", "ddm_dt",
                     "ddm_drift_mult"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.rt_sd < 0 or self.stratum_rt_sd < 0 or self.ddm_nondecision < 0:
            raise ValueError("standard deviations and non-decision time must be >= 0")
        if self.num_strata < 1 or self.ddm_max_steps < 1:
            raise ValueError("num_strata and ddm_max_steps must be >= 1")
        half = self.ddm_threshold / 2
        if self.ddm_dt > 0.01 * half ** 2 / self.ddm_noise_sd ** 2:
            raise ValueError("ddm_dt too coarse for the threshold/noise combination")

    @property
    def link_cfg(self) -> LinkConfig:
        return LinkConfig(self.rt_min, self.rt_max)


@dataclass
class GroundTruth:
    """Random utility network plus the normalisation scales of its query set.

    ``util_scale`` is the SD of item utilities, ``diff_scale`` the SD of
    pairwise differences.
    """

    net: UtilityNet
    diff_scale: float = 1.0
    util_scale: float = 1.0

    def utility(self, X) -> np.ndarray:
        return utility(self.net, X)

    def diff(self, A, B) -> np.ndarray:
        return utility(self.net, A) - utility(self.net, B)

    def normalized_diff(self, A, B) -> np.ndarray:
        """Differences with unit SD over the query pairs (DDM drift)."""
        return self.diff(A, B) / self.diff_scale

    def utility_scaled_diff(self, A, B) -> np.ndarray:
        """Differences of unit-SD utilities (BT and log-normal labelers)."""
        return self.diff(A, B) / self.util_scale


class Comparison(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    pref_a: bool
    strength: float
    stratum: int


@dataclass
class Comparisons:
    """Column-oriented set of labeled comparisons.

    ``pref_a[i]`` is True when item ``a[i]`` was preferred. ``strength`` is the
    response time in seconds (lower means a stronger preference).
    """

    a: np.ndarray
    b: np.ndarray
    pref_a: np.ndarray
    strength: np.ndarray
    stratum: np.ndarray

    def __len__(self) -> int:
        return len(self.pref_a)

    def __getitem__(self, idx) -> "Comparisons":
        if isinstance(idx, (int, np.integer)):
            idx = [idx]
        return Comparisons(self.a[idx], self.b[idx], self.pref_a[idx],
                           self.strength[idx], self.stratum[idx])

    def __iter__(self) -> Iterator[Comparison]:
        for i in range(len(self)):
            yield Comparison(self.a[i], self.b[i], bool(self.pref_a[i]),
                             float(self.strength[i]), int(self.stratum[i]))

    def replace(self, **kw) -> "Comparisons":
        return replace(self, **kw)

    def equals(self, other: "Comparisons") -> bool:
        return all(np.array_equal(getattr(self, f), getattr(other, f))
                   for f in ("a", "b", "pref_a", "strength", "stratum"))


@dataclass
class Dataset:
    train: Comparisons
    test: Comparisons
    ground_truth: GroundTruth
    stratum_multipliers: np.ndarray
    config: LabelerConfig = field(default_factory=LabelerConfig)
    seed: int | None = None

    def equals(self, other: "Dataset") -> bool:
        return (self.train.equals(other.train) and self.test.equals(other.test)
                and np.array_equal(self.stratum_multipliers, other.stratum_multipliers)
                and self.ground_truth.diff_scale == other.ground_truth.diff_scale
                and self.ground_truth.util_scale == other.ground_truth.util_scale)


class DegenerateGroundTruth(RuntimeError):
    pass


def gen_items(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` items with ``d`` iid Uniform[0, 1] attributes, one per row."""
    if n < 0 or d < 1:
        raise ValueError("need n >= 0 and d >= 1")
    return rng.random((n, d))


def gen_ground_truth(d: int, rng: np.random.Generator, hidden=(64, 64),
                     probe: tuple[np.ndarray, np.ndarray] | None = None,
                     max_tries: int = 10) -> GroundTruth:
    """Random utility network d -> 64 -> 64 -> 1.

    If ``probe`` pairs are given, the utility and difference SDs over them
    become the normalisation scales and degenerate networks (zero SD) are
    redrawn.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    for _ in range(max_tries):
        net = init_net([d, *hidden, 1], rng)
        if probe is None:
            return GroundTruth(net)
        ua, ub = utility(net, probe[0]), utility(net, probe[1])
        sd = float(np.std(ua - ub))
        if sd > 0 and np.isfinite(sd):
            return GroundTruth(net, sd, float(np.std(np.concatenate([ua, ub]))))
    raise DegenerateGroundTruth(f"no non-degenerate utility network after {max_tries} draws")


# --------------------------------------------------------------------------
# Labelers. Each takes item arrays A, B (rows are pairs) and returns
# (pref_a, strength) arrays.
# --------------------------------------------------------------------------

def label_deterministic(A, B, gt: GroundTruth, cfg: LabelerConfig = LabelerConfig()):
    du = gt.utility_scaled_diff(A, B)
    # exact ties go to A
    return du >= 0, link(du, cfg.link_cfg)


def lognormal_rt(mean, sd: float, rng: np.random.Generator) -> np.ndarray:
    """Log-normal draws with the given arithmetic mean and SD (both in seconds)."""
    mean = np.asarray(mean, dtype=float)
    s2 = np.log1p((sd / mean) ** 2)
    return np.exp(np.log(mean) - s2 / 2 + np.sqrt(s2) * rng.standard_normal(mean.shape))


def label_stochastic_bt(A, B, gt: GroundTruth, cfg: LabelerConfig, rng: np.random.Generator):
    du = gt.utility_scaled_diff(A, B)
    p = sigmoid(du / cfg.choice_temperature)
    pref_a = rng.random(du.shape) < p
    rt = lognormal_rt(link(du, cfg.link_cfg), cfg.rt_sd, rng)
    return pref_a, rt


def simulate_ddm(drift, threshold: float, noise_sd: float, dt: float, rng: np.random.Generator,
                 max_steps: int = 1_000_000, block: int = 1024, chunk: int = 2048):
    """Euler-Maruyama first passage for a symmetric two-barrier diffusion.

    Evidence starts at 0 and moves by ``v*dt + noise_sd*sqrt(dt)*N(0,1)`` per
    step; barriers are at ``+-threshold``. Returns (upper_hit, steps, capped).
    For capped runs ``upper_hit`` is the sign of the final evidence.
    """
    drift = np.asarray(drift, dtype=float)
    n = drift.size
    upper = np.zeros(n, dtype=bool)
    steps = np.zeros(n, dtype=np.int64)
    capped = np.zeros(n, dtype=bool)
    sq = noise_sd * np.sqrt(dt)
    for lo in range(0, n, chunk):
        idx = np.arange(lo, min(lo + chunk, n))
        x = np.zeros(idx.size)
        taken = 0
        while idx.size and taken < max_steps:
            m = min(block, max_steps - taken)
            inc = drift[idx, None] * dt + sq * rng.standard_normal((idx.size, m))
            path = x[:, None] + np.cumsum(inc, axis=1)
            hit = np.abs(path) >= threshold
            done = hit.any(axis=1)
            first = hit.argmax(axis=1)
            d_idx = idx[done]
            upper[d_idx] = path[done, first[done]] > 0
            steps[d_idx] = taken + first[done] + 1
            x = path[~done, -1]
            idx = idx[~done]
            taken += m
        if idx.size:
            upper[idx] = x >= 0
            steps[idx] = max_steps
            capped[idx] = True
    return upper, steps, capped


def label_ddm(A, B, gt: GroundTruth, cfg: LabelerConfig, rng: np.random.Generator):
    v = cfg.ddm_drift_mult * gt.normalized_diff(A, B)
    half = cfg.ddm_threshold / 2
    upper, steps, capped = simulate_ddm(v, half, cfg.ddm_noise_sd, cfg.ddm_dt, rng,
                                        max_steps=cfg.ddm_max_steps)
    if capped.any():
        # one resample, then keep the clamped result
        ci = np.flatnonzero(capped)
        u2, s2, _ = simulate_ddm(v[ci], half, cfg.ddm_noise_sd, cfg.ddm_dt, rng,
                                 max_steps=cfg.ddm_max_steps)
        upper[ci], steps[ci] = u2, s2
    return upper, cfg.ddm_nondecision + steps * cfg.ddm_dt


def label(A, B, gt: GroundTruth, cfg: LabelerConfig, rng: np.random.Generator):
    if cfg.kind is LabelerKind.DETERMINISTIC:
        return label_deterministic(A, B, gt, cfg)
    if cfg.kind is LabelerKind.STOCHASTIC:
        return label_stochastic_bt(A, B, gt, cfg, rng)
    return label_ddm(A, B, gt, cfg, rng)


def apply_stratum_variability(comps: Comparisons, cfg: LabelerConfig,
                              rng: np.random.Generator) -> tuple[Comparisons, np.ndarray]:
    """Scale each stratum's response times by ``|N(1, stratum_rt_sd)|``."""
    mult = np.abs(rng.normal(1.0, cfg.stratum_rt_sd, size=cfg.num_strata))
    return comps.replace(strength=comps.strength * mult[comps.stratum]), mult


def build_dataset(cfg: LabelerConfig = LabelerConfig(), train_size: int = 50,
                  test_size: int = 200, d: int = 20, variability: bool = True,
                  seed: int = 0) -> Dataset:
    """Generate one labeled train/test dataset; a pure function of its arguments."""
    rng = np.random.default_rng(seed)
    n = train_size + test_size
    A = gen_items(n, d, rng)
    B = gen_items(n, d, rng)
    gt = gen_ground_truth(d, rng, probe=(A, B))
    pref_a, strength = label(A, B, gt, cfg, rng)
    stratum = rng.integers(0, cfg.num_strata, size=n)
    comps = Comparisons(A, B, np.asarray(pref_a, dtype=bool), np.asarray(strength, dtype=float),
                        stratum)
    if variability:
        comps, mult = apply_stratum_variability(comps, cfg, rng)
    else:
        mult = np.ones(cfg.num_strata)
    return Dataset(comps[np.arange(train_size)], comps[np.arange(train_size, n)], gt, mult,
                   cfg, seed)
