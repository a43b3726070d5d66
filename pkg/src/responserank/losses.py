"""Ranking, pairwise and regression losses with analytic score gradients.

All losses here are functions of *scores* (signed utility differences), not
of network parameters; :mod:`responserank.model` chains them through the
network.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinkConfig:
    rt_min: float = 0.0
    rt_max: float = 10.0

    def __post_init__(self):
        if not self.rt_min < self.rt_max:
            raise ValueError(f"rt_min ({self.rt_min}) must be below rt_max ({self.rt_max})")


DEFAULT_LINK = LinkConfig()


# --------------------------------------------------------------------------
# Anchored Plackett-Luce
# --------------------------------------------------------------------------

def _pl_stage_lse(S: np.ndarray) -> np.ndarray:
    """Log-denominators of every stage, anchor (score 0) included.

    ``S`` is (n_rankings, max_len) with ``-inf`` padding at the tail.
    Entry ``[r, j]`` is ``log(sum_{i >= j} exp(S[r, i]) + 1)``.
    """
    with np.errstate(invalid="ignore"):
        tail = np.logaddexp.accumulate(S[:, ::-1], axis=1)[:, ::-1]
    return np.logaddexp(tail, 0.0)


def pl_nll_batch(S: np.ndarray, mask: np.ndarray) -> tuple[float, np.ndarray]:
    """Summed anchored PL negative log-likelihood of a padded batch of rankings.

    Parameters
    ----------
    S : (n_rankings, max_len) array
        Scores in target order (strongest first). Padded entries are ignored.
    mask : bool array of the same shape
        True for real entries. Each row must be a contiguous prefix.

    Returns
    -------
    loss : float
        Sum over rankings of ``-log P(ranking + anchor)``.
    grad : array shaped like ``S``
        d loss / d S, zero on padding.
    """
    S = np.where(mask, S, -np.inf)
    lse = _pl_stage_lse(S)
    lse_m = np.where(mask, lse, 0.0)
    loss = float(np.sum(np.where(mask, lse_m - np.where(mask, S, 0.0), 0.0)))

    # d/ds_i = -1 + sum_{j <= i} exp(s_i - lse_j); the accumulated term is
    # formed in log space so every summand is <= 1.
    neg = np.where(mask, -lse, -np.inf)
    with np.errstate(invalid="ignore"):
        acc = np.logaddexp.accumulate(neg, axis=1)
    grad = np.where(mask, np.exp(np.where(mask, S + acc, 0.0)) - 1.0, 0.0)
    return loss, grad


def pl_nll(scores) -> float:
    """NLL of the ranking ``[s_1, ..., s_k, anchor]`` with the anchor fixed at 0."""
    s = np.atleast_1d(np.asarray(scores, dtype=float))
    loss, _ = pl_nll_batch(s[None, :], np.ones((1, s.size), dtype=bool))
    return loss


def pl_nll_grad(scores) -> np.ndarray:
    s = np.atleast_1d(np.asarray(scores, dtype=float))
    _, g = pl_nll_batch(s[None, :], np.ones((1, s.size), dtype=bool))
    return g[0]


# --------------------------------------------------------------------------
# Bradley-Terry
# --------------------------------------------------------------------------

def bt_bce(s, win=True):
    """Binary cross-entropy of a BT choice given the score difference ``s``.

    ``-log sigmoid(s)`` when the first item won, ``-log sigmoid(-s)`` otherwise.
    Vectorised over ``s`` and ``win``.
    """
    s = np.asarray(s, dtype=float)
    z = np.where(win, -s, s)
    return np.logaddexp(0.0, z)


def bt_bce_grad(s, win=True):
    s = np.asarray(s, dtype=float)
    sign = np.where(win, 1.0, -1.0)
    # d/ds softplus(-sign*s) = -sign * sigmoid(-sign*s)
    return -sign * _sigmoid(-sign * s)


def _sigmoid(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    r = _sigmoid(np.atleast_1d(x))
    return r.reshape(x.shape) if x.shape else float(r[0])


# --------------------------------------------------------------------------
# Response-time link and regression target
# --------------------------------------------------------------------------

def link(du, cfg: LinkConfig = DEFAULT_LINK):
    """Hyperbolic map from utility difference to expected response time."""
    return cfg.rt_min + (cfg.rt_max - cfg.rt_min) / (np.abs(du) + 1.0)


def link_inverse(rt, cfg: LinkConfig = DEFAULT_LINK):
    """Unsigned utility difference implied by a response time.

    Times above ``rt_max`` are clamped to 0 (indifference); times at or below
    ``rt_min`` are a singularity and raise.
    """
    rt = np.asarray(rt, dtype=float)
    if np.any(rt <= cfg.rt_min):
        bad = rt[rt <= cfg.rt_min].flat[0]
        raise ValueError(f"response time {bad} is not above rt_min={cfg.rt_min}")
    du = (cfg.rt_max - cfg.rt_min) / (rt - cfg.rt_min) - 1.0
    du = np.maximum(du, 0.0)
    return du if du.shape else float(du)


def rt_regression_target(pref_a, rt, cfg: LinkConfig = DEFAULT_LINK):
    """Signed regression target: +link^-1(rt) if A was preferred, else negative."""
    mag = np.asarray(link_inverse(rt, cfg))
    out = np.where(pref_a, mag, -mag)
    return out if out.shape else float(out)


def mse(pred, target):
    d = np.asarray(pred, dtype=float) - np.asarray(target, dtype=float)
    return d * d


def mse_grad(pred, target):
    return 2.0 * (np.asarray(pred, dtype=float) - np.asarray(target, dtype=float))
