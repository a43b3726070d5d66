"""JSON-lines dataset files written by ``responserank generate``.

Layout: the first line is a header ``{"header": {...config..., "seed": s}}``;
each following line is one comparison::

    {"a": [...], "b": [...], "pref": "A"|"B", "strength": 1.23, "stratum": 0,
     "split": "train"|"test"}

Ground-truth utilities of the test pairs go to a sidecar JSON file
(``<stem>.utilities.json``) with keys ``u_a``, ``u_b``, ``diff_scale`` and
``util_scale``.
"""
from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .synth import Comparisons, Dataset


def sidecar_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".utilities.json")


def _rows(comps: Comparisons, split: str):
    for c in comps:
        yield {"a": c.a.tolist(), "b": c.b.tolist(), "pref": "A" if c.pref_a else "B",
               "strength": c.strength, "stratum": c.stratum, "split": split}


def write_dataset(ds: Dataset, path, extra_header: dict | None = None) -> Path:
    cfg = asdict(ds.config)
    cfg["kind"] = ds.config.kind.value
    header = {"config": cfg, "seed": ds.seed,
              "stratum_multipliers": ds.stratum_multipliers.tolist(), **(extra_header or {})}
    with open(path, "w") as f:
        f.write(json.dumps({"header": header}) + "\n")
        for split, comps in (("train", ds.train), ("test", ds.test)):
            for row in _rows(comps, split):
                f.write(json.dumps(row) + "\n")
    gt = ds.ground_truth
    side = sidecar_path(path)
    side.write_text(json.dumps({
        "u_a": gt.utility(ds.test.a).tolist(),
        "u_b": gt.utility(ds.test.b).tolist(),
        "diff_scale": gt.diff_scale,
        "util_scale": gt.util_scale,
    }))
    return side


def read_dataset(path) -> tuple[dict, dict[str, Comparisons]]:
    """Parse a dataset file into its header and per-split comparisons."""
    with open(path) as f:
        lines = [json.loads(line) for line in f if line.strip()]
    if not lines or "header" not in lines[0]:
        raise ValueError(f"{path}: missing header line")
    header = lines[0]["header"]
    splits: dict[str, list] = {"train": [], "test": []}
    for row in lines[1:]:
        if row["pref"] not in ("A", "B"):
            raise ValueError(f"bad preference label {row['pref']!r}")
        splits[row["split"]].append(row)
    out = {}
    for name, rows in splits.items():
        if not rows:
            continue
        out[name] = Comparisons(
            np.array([r["a"] for r in rows], dtype=float),
            np.array([r["b"] for r in rows], dtype=float),
            np.array([r["pref"] == "A" for r in rows]),
            np.array([r["strength"] for r in rows], dtype=float),
            np.array([r["stratum"] for r in rows], dtype=np.int64),
        )
    return header, out


def read_utilities(path) -> dict:
    return json.loads(Path(path).read_text())
