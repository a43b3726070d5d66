"""Evaluation metrics and the PDC-vs-TCE degradation experiment."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import sigmoid
from .model import UtilityNet, utility


class UndefinedMetricError(ValueError):
    pass


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need two equal-length 1-d series with at least 2 entries")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = xc @ xc
    syy = yc @ yc
    if not (sxx > 0 and syy > 0):
        raise UndefinedMetricError("correlation undefined for a zero-variance series")
    # sqrt of the product (rather than product of sqrts) keeps corr(x, x) == 1.0
    r = (xc @ yc) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def pdc(true_abs, pred_abs) -> float:
    """Pearson distance correlation between true and predicted |utility differences|."""
    return pearson(np.abs(true_abs), np.abs(pred_abs))


def pdc_from_utilities(u_a, u_b, uhat_a, uhat_b) -> float:
    return pdc(np.abs(np.asarray(u_a) - u_b), np.abs(np.asarray(uhat_a) - uhat_b))


def degrade(signed_diffs, f_sign: float, f_mag: float, rng: np.random.Generator) -> np.ndarray:
    """Flip signs of a random ``f_sign`` fraction of entries, then shuffle the
    magnitudes within a random ``f_mag`` fraction. Signs survive the shuffle."""
    if not (0 <= f_sign <= 1 and 0 <= f_mag <= 1):
        raise ValueError("fractions must lie in [0, 1]")
    out = np.array(signed_diffs, dtype=float)
    n = out.size
    flip = rng.choice(n, size=int(round(f_sign * n)), replace=False)
    out[flip] = -out[flip]
    idx = rng.choice(n, size=int(round(f_mag * n)), replace=False)
    mags = np.abs(out[idx])
    out[idx] = np.sign(out[idx]) * mags[rng.permutation(idx.size)]
    return out


def choice_accuracy(net: UtilityNet, comps) -> float:
    """Fraction of comparisons whose label the net predicts; exact ties count 0.5."""
    if len(comps) == 0:
        raise ValueError("empty test set")
    s = utility(net, comps.a) - utility(net, comps.b)
    hit = np.where(s == 0, 0.5, (s > 0) == comps.pref_a)
    return float(np.mean(hit))


def tce(pred_conf, true_lik) -> float:
    pred_conf = np.asarray(pred_conf, dtype=float)
    true_lik = np.asarray(true_lik, dtype=float)
    if pred_conf.shape != true_lik.shape:
        raise ValueError("length mismatch")
    return float(np.mean(np.abs(pred_conf - true_lik)))


def kendall_tau(xs, ys) -> float:
    """Kendall's tau-b (tie-adjusted). O(n^2) memory; fine for a few thousand points."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("need two equal-length 1-d series with at least 2 entries")
    iu = np.triu_indices(x.size, k=1)
    dx = np.sign(x[:, None] - x[None, :])[iu]
    dy = np.sign(y[:, None] - y[None, :])[iu]
    n0 = dx.size
    n1 = np.count_nonzero(dx == 0)
    n2 = np.count_nonzero(dy == 0)
    denom = np.sqrt(float(n0 - n1) * float(n0 - n2))
    if denom == 0:
        raise UndefinedMetricError("Kendall tau undefined when a series is constant")
    return float(np.sum(dx * dy) / denom)


def confusion_matrix(pref_a, true_a) -> np.ndarray:
    """2x2 counts, rows = label (A, B), columns = true better item (A, B)."""
    pref_a = np.asarray(pref_a, dtype=bool)
    true_a = np.asarray(true_a, dtype=bool)
    return np.array([[np.sum(pref_a & true_a), np.sum(pref_a & ~true_a)],
                     [np.sum(~pref_a & true_a), np.sum(~pref_a & ~true_a)]])


@dataclass(frozen=True)
class DegradeGrid:
    items: int = 1000
    pairs: int = 50_000
    steps: int = 11
    seed: int = 0


def pdc_tce_grid(cfg: DegradeGrid = DegradeGrid()) -> list[dict]:
    """PDC and TCE under sign flips and magnitude shuffles.

    Utilities are standard normal; each cell degrades the perfect prediction
    (for raw ``u`` and for ``2u + 5``) with the same per-cell RNG stream.
    """
    rng = np.random.default_rng(cfg.seed)
    u = rng.standard_normal(cfg.items)
    i = rng.integers(0, cfg.items, cfg.pairs)
    j = rng.integers(0, cfg.items, cfg.pairs)
    du = u[i] - u[j]
    true_lik = sigmoid(du)
    scaled = {"raw": du, "affine": (2 * u[i] + 5) - (2 * u[j] + 5)}
    fracs = np.linspace(0.0, 1.0, cfg.steps)
    cell_seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.steps * cfg.steps)
    rows = []
    for a, fs in enumerate(fracs):
        for b, fm in enumerate(fracs):
            seed = cell_seeds[a * cfg.steps + b]
            for name, pred in scaled.items():
                deg = degrade(pred, fs, fm, np.random.default_rng(seed))
                rows.append({
                    "f_sign": round(float(fs), 10),
                    "f_mag": round(float(fm), 10),
                    "scaling": name,
                    "pdc": pdc(du, deg),
                    "tce": tce(sigmoid(deg), true_lik),
                })
    return rows
