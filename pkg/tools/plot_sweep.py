#!/usr/bin/env python3
"""Plot quality and diversity from a sweep_summary.csv.

Usage:
    python tools/plot_sweep.py runs/sweep/sweep_summary.csv [--x lambda1] [--y lambda2] [-o plot.png]

With --y, each metric is drawn as a heat map over the (x, y) grid; otherwise
as a line over x. Diversity is shown as 1 - mean pairwise NMI.
"""

from __future__ import annotations

import argparse
import csv
import math
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

METRICS = [("di", "mean DI"), ("sc", "mean SC"), ("diversity", "1 - mean NMI")]


def read_summary(path: str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        nmi = row.get("nmi")
        row["diversity"] = str(1.0 - float(nmi)) if nmi else ""
    return rows


def _value(row: dict, key: str) -> float:
    raw = row.get(key, "")
    return float(raw) if raw not in ("", None) else math.nan


def plot_lines(rows: list[dict], x: str, ax_list) -> None:
    points = sorted(rows, key=lambda r: _value(r, x))
    xs = [_value(r, x) for r in points]
    for ax, (metric, label) in zip(ax_list, METRICS):
        ax.plot(xs, [_value(r, metric) for r in points], marker="o")
        ax.set_xscale("log" if min(xs) > 0 else "linear")
        ax.set_xlabel(x)
        ax.set_title(label)


def plot_grid(rows: list[dict], x: str, y: str, ax_list, fig) -> None:
    xs = sorted({_value(r, x) for r in rows})
    ys = sorted({_value(r, y) for r in rows})
    cells = defaultdict(dict)
    for r in rows:
        cells[_value(r, y)][_value(r, x)] = r
    for ax, (metric, label) in zip(ax_list, METRICS):
        grid = [[_value(cells[yv].get(xv, {}), metric) for xv in xs] for yv in ys]
        im = ax.imshow(grid, origin="lower", aspect="auto")
        ax.set_xticks(range(len(xs)), [f"{v:g}" for v in xs], rotation=45)
        ax.set_yticks(range(len(ys)), [f"{v:g}" for v in ys])
        ax.set_xlabel(x)
        ax.set_ylabel(y)
        ax.set_title(label)
        fig.colorbar(im, ax=ax)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("summary")
    parser.add_argument("--x", default="lambda1")
    parser.add_argument("--y", default=None)
    parser.add_argument("-o", "--output", default="sweep.png")
    args = parser.parse_args()

    rows = [r for r in read_summary(args.summary) if r.get("status") in ("ok", "not_converged")]
    if not rows:
        raise SystemExit("no finished runs in the summary")
    fig, axes = plt.subplots(1, len(METRICS), figsize=(5 * len(METRICS), 4))
    if args.y:
        plot_grid(rows, args.x, args.y, axes, fig)
    else:
        plot_lines(rows, args.x, axes)
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)
    print(f"Wrote {args.output}")


if __name__ == "__main__":
    main()
