"""Render CSVs written by the twophoton CLI.

    python scripts/plot.py OUTDIR [--save]

Each known file in OUTDIR gets one figure. With --save the figures are
written next to the CSVs as PNG instead of being shown.
"""

import argparse
import csv
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np


def read(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    cols = {}
    for key in rows[0]:
        vals = []
        for r in rows:
            v = r[key]
            vals.append(float("nan") if v == "" else float(v == "true") if v in ("true", "false") else float(v))
        cols[key] = np.array(vals)
    return cols


def grid(c, value):
    ds = np.unique(c["delta"])
    gs = np.unique(c["g"])
    z = np.full((len(gs), len(ds)), np.nan)
    z[np.searchsorted(gs, c["g"]), np.searchsorted(ds, c["delta"])] = c[value]
    return ds, gs, z


def trajectory(ax, c, label):
    ax.plot(c["t"], c["abs_psi"], label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("|psi|")
    ax.legend()


def heatmap(ax, c, value):
    ds, gs, z = grid(c, value)
    m = ax.pcolormesh(ds, gs, z, shading="nearest")
    ax.figure.colorbar(m, ax=ax, label=value)
    ax.set_xlabel("delta")
    ax.set_ylabel("g")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--save", action="store_true")
    args = ap.parse_args()
    d = args.outdir
    figs = []

    traj = [p for p in ("evolve_master.csv", "evolve_meanfield.csv") if (d / p).exists()]
    if traj:
        fig, ax = plt.subplots()
        for p in traj:
            trajectory(ax, read(d / p), p[len("evolve_"):-4])
        figs.append(("evolve", fig))
    if (d / "sweep.csv").exists():
        c = read(d / "sweep.csv")
        fig, ax = plt.subplots()
        if len(np.unique(c["g"])) == 1 or len(np.unique(c["delta"])) == 1:
            x = "delta" if len(np.unique(c["delta"])) > 1 else "g"
            ax.plot(c[x], c["abs_psi"], ".-")
            ax.set_xlabel(x)
            ax.set_ylabel("|psi|")
        else:
            heatmap(ax, c, "abs_psi")
        figs.append(("sweep", fig))
    if (d / "susceptibility.csv").exists():
        fig, ax = plt.subplots()
        heatmap(ax, read(d / "susceptibility.csv"), "chi_norm")
        if (d / "ridge.csv").exists():
            r = read(d / "ridge.csv")
            ax.plot(r["delta_max"], r["g"], "w-", lw=1)
        figs.append(("susceptibility", fig))
    if (d / "exponent.csv").exists():
        c = read(d / "exponent.csv")
        fig, ax = plt.subplots()
        ax.plot(c["log_g"], c["log_psi"], "o")
        k, b = np.polyfit(c["log_g"], c["log_psi"], 1)
        ax.plot(c["log_g"], k * c["log_g"] + b, "-", label=f"slope {k:.4f}")
        ax.set_xlabel("ln g")
        ax.set_ylabel("ln |psi|")
        ax.legend()
        figs.append(("exponent", fig))
    if (d / "curvature.csv").exists():
        c = read(d / "curvature.csv")
        fig, ax = plt.subplots()
        ax.plot(c["g"], c["curvature"], label="finite difference")
        ax.plot(c["g"], c["closed_form"], "--", label="closed form")
        ax.set_xlabel("g")
        ax.set_ylabel("d2|psi|/ddelta2 at delta=0")
        ax.legend()
        figs.append(("curvature", fig))

    if not figs:
        raise SystemExit(f"no known CSVs in {d}")
    if args.save:
        for name, fig in figs:
            fig.savefig(d / f"{name}.png", dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
