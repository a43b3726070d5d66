"""Seeded trials, dataset-size sweeps, aggregation and CSV/JSONL reporting."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .learners import ALL_LEARNERS, Learner, fit
from .metrics import (UndefinedMetricError, choice_accuracy, confusion_matrix, kendall_tau,
                      pdc_from_utilities)
from .model import TrainConfig, utility
from .synth import LabelerConfig, LabelerKind, build_dataset

FRACTIONS = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
METRICS = ("pdc", "accuracy")
_MASK64 = (1 << 64) - 1


def derive_seed(base_seed: int, trial_index: int) -> int:
    """SplitMix64 finaliser applied to ``base_seed`` advanced by the trial index.

    ``z = base + (index + 1) * 0x9E3779B97F4A7C15`` (mod 2**64), then the usual
    xor-shift/multiply mix. Output is truncated to 63 bits for numpy seeding.
    """
    z = (base_seed + (trial_index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) >> 1


@dataclass(frozen=True)
class ExperimentConfig:
    kind: LabelerKind = LabelerKind.DETERMINISTIC
    variability: bool = True
    fractions: tuple[float, ...] = FRACTIONS
    learners: tuple[Learner, ...] = ALL_LEARNERS
    trials: int = 100
    base_seed: int = 0
    train_size: int = 50
    test_size: int = 200
    features: int = 20
    labeler: LabelerConfig = field(default_factory=LabelerConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    pool_size: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", LabelerKind(self.kind))
        object.__setattr__(self, "learners", tuple(Learner(x) for x in self.learners))
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))
        object.__setattr__(self, "labeler", LabelerConfig(**{**asdict(self.labeler),
                                                             "kind": self.kind}))
        if list(self.fractions) != sorted(self.fractions):
            raise ValueError("fractions must be sorted ascending")
        if any(not 0 < f <= 1 for f in self.fractions):
            raise ValueError("fractions must lie in (0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @property
    def dataset_name(self) -> str:
        return self.kind.value

    def describe(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        d["learners"] = [x.value for x in self.learners]
        d["labeler"]["kind"] = self.kind.value
        return d


def subset_size(fraction: float, n: int) -> int:
    return max(1, math.ceil(round(fraction * n, 9)))


@dataclass
class TrialResult:
    trial: int
    seed: int
    pdc: dict[tuple[str, float], float | None]
    accuracy: dict[tuple[str, float], float]

    def rows(self, cfg: ExperimentConfig) -> list[dict]:
        return [{"dataset": cfg.dataset_name, "variability": cfg.variability,
                 "trial": self.trial, "seed": self.seed, "learner": lr, "fraction": f,
                 "pdc": self.pdc[(lr, f)], "accuracy": self.accuracy[(lr, f)]}
                for (lr, f) in self.accuracy]


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialResult:
    """Generate one dataset and fit every (learner, fraction) cell on it.

    Fraction subsets are prefixes of one per-trial shuffle of the training
    set; all cells share the test set and the initial network weights.
    """
    seed = derive_seed(cfg.base_seed, trial_index)
    ds = trial_dataset(cfg, trial_index)
    order = np.random.default_rng(_trial_streams(seed)[1]).permutation(len(ds.train))
    test = ds.test
    u_a = ds.ground_truth.utility(test.a)
    u_b = ds.ground_truth.utility(test.b)
    pool = cfg.pool_size or math.ceil(cfg.train_size / cfg.labeler.num_strata)
    pdcs, accs = {}, {}
    for lr in cfg.learners:
        for f in cfg.fractions:
            sub = ds.train[order[:subset_size(f, len(ds.train))]]
            net = fit(lr, sub, cfg.train, seed=seed, pool_size=pool,
                      link_cfg=cfg.labeler.link_cfg)
            try:
                p = pdc_from_utilities(u_a, u_b, utility(net, test.a), utility(net, test.b))
            except UndefinedMetricError:
                p = None
            pdcs[(lr.value, f)] = p
            accs[(lr.value, f)] = choice_accuracy(net, test)
    return TrialResult(trial_index, seed, pdcs, accs)


@dataclass(frozen=True)
class Aggregate:
    mean: float
    std: float
    ci: float
    n: int


def aggregate(values: Sequence[float | None]) -> Aggregate:
    """Mean, sample SD and normal-approximation 95% CI half-width of defined values."""
    v = np.array([x for x in values if x is not None], dtype=float)
    if v.size < 2:
        raise ValueError(f"need at least 2 defined values, got {v.size}")
    sd = float(np.std(v, ddof=1))
    return Aggregate(float(np.mean(v)), sd, 1.96 * sd / math.sqrt(v.size), int(v.size))


def breakeven(curve: Sequence[tuple[float, float]], baseline: float) -> float | None:
    """First fraction at which the linearly interpolated curve reaches ``baseline``."""
    if not curve:
        return None
    f0, m0 = curve[0]
    if m0 >= baseline:
        return f0
    for (f1, m1), (f2, m2) in zip(curve, curve[1:]):
        if m1 < baseline <= m2:
            return f1 + (baseline - m1) / (m2 - m1) * (f2 - f1)
    return None


def _run_one(args):
    return run_trial(*args)


def run_trials(cfg: ExperimentConfig, threads: int = 1) -> list[TrialResult]:
    jobs = [(cfg, i) for i in range(cfg.trials)]
    if threads <= 1:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_run_one, jobs))
    return sorted(results, key=lambda r: r.trial)


@dataclass
class ConditionSummary:
    cfg: ExperimentConfig
    results: list[TrialResult]

    def values(self, learner: Learner | str, fraction: float, metric: str) -> list:
        key = (Learner(learner).value, float(fraction))
        return [getattr(r, metric)[key] for r in self.results]

    def agg(self, learner, fraction, metric) -> Aggregate:
        return aggregate(self.values(learner, fraction, metric))

    def curve(self, learner, metric) -> list[tuple[float, float]]:
        return [(f, self.agg(learner, f, metric).mean) for f in self.cfg.fractions]

    def breakeven(self, learner, metric, baseline_learner=Learner.BT) -> float | None:
        base = self.agg(baseline_learner, self.cfg.fractions[-1], metric).mean
        return breakeven(self.curve(learner, metric), base)

    def table_rows(self) -> list[dict]:
        rows = []
        for lr in self.cfg.learners:
            for f in self.cfg.fractions:
                for m in METRICS:
                    try:
                        a = self.agg(lr, f, m)
                        stats = {"mean": a.mean, "std": a.std, "ci": a.ci, "n": a.n}
                    except ValueError:
                        n = sum(v is not None for v in self.values(lr, f, m))
                        stats = {"mean": None, "std": None, "ci": None, "n": n}
                    rows.append({"dataset": self.cfg.dataset_name,
                                 "variability": self.cfg.variability,
                                 "learner": lr.value, "fraction": f, "metric": m, **stats})
        return rows

    def breakeven_rows(self) -> list[dict]:
        if Learner.BT not in self.cfg.learners or self.cfg.trials < 2:
            return []
        rows = []
        for lr in self.cfg.learners:
            for m in METRICS:
                rows.append({"dataset": self.cfg.dataset_name,
                             "variability": self.cfg.variability, "learner": lr.value,
                             "metric": m,
                             "baseline": self.agg(Learner.BT, self.cfg.fractions[-1], m).mean,
                             "breakeven": self.breakeven(lr, m)})
        return rows


def run_condition(cfg: ExperimentConfig, threads: int = 1) -> ConditionSummary:
    return ConditionSummary(cfg, run_trials(cfg, threads))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, rows: list[dict], header: dict | None = None) -> None:
    """CSV with an optional ``#``-prefixed JSON header block."""
    buf = io.StringIO()
    if header is not None:
        for line in json.dumps(header, indent=1, sort_keys=True).splitlines():
            buf.write(f"# {line}\n")
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(v) for k, v in r.items()})
    Path(path).write_text(buf.getvalue())


def write_jsonl(path, rows: list[dict]) -> None:
    with open(path, "w") as f:
        for r in rows:
            f.write(json.dumps(r, sort_keys=True) + "\n")


def report(summaries: list[ConditionSummary], out_dir) -> dict[str, Path]:
    """Write results.csv, breakeven.csv and trials.jsonl for a set of conditions."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = {"conditions": [s.cfg.describe() for s in summaries]}
    paths = {"results": out / "results.csv", "breakeven": out / "breakeven.csv",
             "trials": out / "trials.jsonl"}
    write_csv(paths["results"], [r for s in summaries for r in s.table_rows()], header)
    write_csv(paths["breakeven"], [r for s in summaries for r in s.breakeven_rows()], header)
    write_jsonl(paths["trials"], [row for s in summaries for r in s.results for row in r.rows(s.cfg)])
    return paths


def run_sweep(cfgs: Sequence[ExperimentConfig], out_dir=None, threads: int = 1):
    summaries = [run_condition(c, threads) for c in cfgs]
    if out_dir is not None:
        report(summaries, out_dir)
    return summaries


def dataset_diagnostics(cfg: ExperimentConfig, trials: int | None = None) -> list[dict]:
    """Per-trial label confusion counts and RT-vs-strength Kendall tau.

    Tau is taken over all comparisons of the dataset between the response
    times and the true |utility difference|; -1 means the RT order is exactly
    the reverse of the strength order.
    """
    rows = []
    for t in range(trials or cfg.trials):
        ds = trial_dataset(cfg, t)
        a = np.concatenate([ds.train.a, ds.test.a])
        b = np.concatenate([ds.train.b, ds.test.b])
        pref = np.concatenate([ds.train.pref_a, ds.test.pref_a])
        rt = np.concatenate([ds.train.strength, ds.test.strength])
        du = ds.ground_truth.diff(a, b)
        cm = confusion_matrix(pref, du >= 0)
        try:
            tau = kendall_tau(rt, np.abs(du))
        except UndefinedMetricError:
            tau = None
        rows.append({"dataset": cfg.dataset_name, "variability": cfg.variability, "trial": t,
                     "label_a_true_a": int(cm[0, 0]), "label_a_true_b": int(cm[0, 1]),
                     "label_b_true_a": int(cm[1, 0]), "label_b_true_b": int(cm[1, 1]),
                     "error_rate": float((cm[0, 1] + cm[1, 0]) / cm.sum()), "kendall_tau": tau})
    return rows


def _trial_streams(seed: int):
    """(dataset seed, subset-order stream) for one trial."""
    data_ss, order_ss = np.random.SeedSequence(seed).spawn(2)
    return int(data_ss.generate_state(1, np.uint64)[0] >> 1), order_ss


def trial_dataset(cfg: ExperimentConfig, trial_index: int):
    """The dataset :func:`run_trial` generates for ``trial_index``."""
    data_seed, _ = _trial_streams(derive_seed(cfg.base_seed, trial_index))
    return build_dataset(cfg.labeler, cfg.train_size, cfg.test_size, cfg.features,
                         cfg.variability, seed=data_seed)
