#!/usr/bin/env python3
"""Heatmaps of PDC and TCE over the sign-flip x magnitude-shuffle grid.

    python3 scripts/pdc_heatmap.py --out pdc_tce.png

Needs matplotlib (``pip install .[plots]``).
"""
import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from responserank.metrics import DegradeGrid, pdc_tce_grid  # noqa: E402


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--items", type=int, default=1000)
    p.add_argument("--pairs", type=int, default=50_000)
    p.add_argument("--grid-steps", type=int, default=11)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scaling", choices=["raw", "affine"], default="raw")
    p.add_argument("--out", default="pdc_tce.png")
    args = p.parse_args()

    n = args.grid_steps
    rows = [r for r in pdc_tce_grid(DegradeGrid(args.items, args.pairs, n, args.seed))
            if r["scaling"] == args.scaling]
    grids = {m: np.zeros((n, n)) for m in ("pdc", "tce")}
    for r in rows:
        i, j = round(r["f_sign"] * (n - 1)), round(r["f_mag"] * (n - 1))
        for m in grids:
            grids[m][i, j] = r[m]

    fig, axes = plt.subplots(1, 2, figsize=(10, 4.2))
    for ax, (m, g) in zip(axes, grids.items()):
        im = ax.imshow(g, origin="lower", extent=(0, 1, 0, 1), cmap="viridis", aspect="auto")
        ax.set_xlabel("fraction of magnitudes shuffled")
        ax.set_ylabel("fraction of signs flipped")
        ax.set_title(m.upper())
        fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
