"""Command line entry point: ``responserank <command> [options]``.

Commands
--------
generate       write one synthetic dataset as JSON lines (+ utilities sidecar)
run            one dataset condition, all requested learners and fractions
sweep          every dataset kind x variability setting (the full grid)
pdc-validate   PDC vs TCE under sign flips / magnitude shuffles
analyze        label confusion, RT-strength Kendall tau, partition statistics
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness, io
from .harness import ExperimentConfig
from .learners import ALL_LEARNERS, Learner, fit, parse_learners
from .metrics import DegradeGrid, pdc_tce_grid
from .ranking import partition_stats
from .synth import LabelerConfig, LabelerKind, build_dataset

log = logging.getLogger("responserank")


def _fractions(text: str) -> tuple[float, ...]:
    return tuple(sorted(float(x) for x in text.split(",") if x.strip()))


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _data_args(p: argparse.ArgumentParser, kind_default="deterministic"):
    p.add_argument("--kind", choices=[k.value for k in LabelerKind], default=kind_default)
    p.add_argument("--variability", action=argparse.BooleanOptionalAction, default=True,
                   help="per-stratum response-time multipliers")
    p.add_argument("--train-size", type=int, default=50)
    p.add_argument("--test-size", type=int, default=200)
    p.add_argument("--features", type=int, default=20)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="responserank", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write a synthetic dataset")
    _data_args(g)
    g.add_argument("--out", type=Path, required=True)

    learner_help = "comma list from " + ",".join(lr.value for lr in ALL_LEARNERS)
    r = sub.add_parser("run", parents=[common], help="one dataset condition")
    _data_args(r)
    r.add_argument("--learners", default=",".join(lr.value for lr in ALL_LEARNERS),
                   help=learner_help)
    r.add_argument("--fractions", default="0.5,0.6,0.7,0.8,0.9,1.0")
    r.add_argument("--dump-model", type=Path,
                   help="write trial-0 full-data models of every learner as JSON")

    s = sub.add_parser("sweep", parents=[common], help="full kinds x variability grid")
    s.add_argument("--kinds", default="deterministic,stochastic,ddm")
    s.add_argument("--variability", choices=["both", "on", "off"], default="both")
    s.add_argument("--learners", default=",".join(lr.value for lr in ALL_LEARNERS),
                   help=learner_help)
    s.add_argument("--fractions", default="0.5,0.6,0.7,0.8,0.9,1.0")
    s.add_argument("--train-size", type=int, default=50)
    s.add_argument("--test-size", type=int, default=200)
    s.add_argument("--features", type=int, default=20)

    v = sub.add_parser("pdc-validate", parents=[common], help="PDC/TCE degradation grid")
    v.add_argument("--items", type=int, default=1000)
    v.add_argument("--pairs", type=int, default=50_000)
    v.add_argument("--grid-steps", type=int, default=11)
    v.add_argument("--out", type=Path, help="CSV path (default: <out-dir>/pdc_validate.csv)")

    a = sub.add_parser("analyze", parents=[common], help="dataset diagnostics")
    _data_args(a)
    a.add_argument("--max-size", type=int, default=None,
                   help="partition size cap for the partition statistics")
    return parser


def _experiment(args, kind, variability, learners, fractions) -> ExperimentConfig:
    return ExperimentConfig(kind=kind, variability=variability, fractions=fractions,
                            learners=learners, trials=args.trials, base_seed=args.seed,
                            train_size=args.train_size, test_size=args.test_size,
                            features=args.features)


def cmd_generate(args) -> int:
    cfg = LabelerConfig(kind=args.kind)
    ds = build_dataset(cfg, args.train_size, args.test_size, args.features, args.variability,
                       seed=args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    side = io.write_dataset(ds, args.out, {"variability": args.variability,
                                           "features": args.features})
    print(f"wrote {args.out} and {side}")
    return 0


def cmd_run(args) -> int:
    cfg = _experiment(args, args.kind, args.variability, parse_learners(args.learners),
                      _fractions(args.fractions))
    summary = harness.run_condition(cfg, args.threads)
    paths = harness.report([summary], args.out_dir)
    if args.dump_model:
        ds = harness.trial_dataset(cfg, 0)
        seed = harness.derive_seed(cfg.base_seed, 0)
        models = {lr.value: fit(lr, ds.train, cfg.train, seed=seed,
                                link_cfg=cfg.labeler.link_cfg).to_dict()
                  for lr in cfg.learners}
        args.dump_model.write_text(json.dumps(models))
    _print_summary([summary])
    print("wrote", ", ".join(str(p) for p in paths.values()))
    return 0


def cmd_sweep(args) -> int:
    kinds = [k.strip() for k in args.kinds.split(",") if k.strip()]
    var = {"both": [True, False], "on": [True], "off": [False]}[args.variability]
    cfgs = [_experiment(args, k, v, parse_learners(args.learners), _fractions(args.fractions))
            for v in var for k in kinds]
    summaries = harness.run_sweep(cfgs, args.out_dir, args.threads)
    _print_summary(summaries)
    return 0


def cmd_pdc_validate(args) -> int:
    rows = pdc_tce_grid(DegradeGrid(args.items, args.pairs, args.grid_steps, args.seed))
    out = args.out or args.out_dir / "pdc_validate.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    harness.write_csv(out, rows, {"items": args.items, "pairs": args.pairs,
                                  "grid_steps": args.grid_steps, "seed": args.seed})
    print(f"wrote {out}")
    return 0


def cmd_analyze(args) -> int:
    cfg = _experiment(args, args.kind, args.variability, [Learner.BT], (1.0,))
    args.out_dir.mkdir(parents=True, exist_ok=True)
    diag = harness.dataset_diagnostics(cfg)
    header = cfg.describe()
    harness.write_csv(args.out_dir / "diagnostics.csv", diag, header)
    parts = []
    for t in range(cfg.trials):
        ds = harness.trial_dataset(cfg, t)
        parts += [{"trial": t, **row} for row in partition_stats(ds.train, args.max_size)]
    harness.write_csv(args.out_dir / "partitions.csv", parts, header)
    taus = [r["kendall_tau"] for r in diag if r["kendall_tau"] is not None]
    err = sum(r["error_rate"] for r in diag) / len(diag)
    print(f"{cfg.dataset_name} variability={cfg.variability}: mean error rate {err:.4f}, "
          f"mean Kendall tau {sum(taus) / max(len(taus), 1):.4f}")
    return 0


def _print_summary(summaries) -> None:
    for s in summaries:
        print(f"\n{s.cfg.dataset_name} (variability={s.cfg.variability}, "
              f"{s.cfg.trials} trials), fraction {s.cfg.fractions[-1]}")
        for lr in s.cfg.learners:
            cells = []
            for m in ("pdc", "accuracy"):
                try:
                    a = s.agg(lr, s.cfg.fractions[-1], m)
                    cells.append(f"{m} {a.mean:.3f} +- {a.std:.3f}")
                except ValueError:
                    cells.append(f"{m} n/a")
            print(f"  {lr.label:20s} " + "  ".join(cells))


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "sweep": cmd_sweep,
            "pdc-validate": cmd_pdc_validate, "analyze": cmd_analyze}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValueError, RuntimeError) as e:
        log.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
