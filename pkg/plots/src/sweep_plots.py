"""Render the family sweep figure from an emverify sweep CSV.

Top panel: the normalized total scalar curvature (column ``yamabe``) against
the factor ratio ``b/a`` on a log axis, with dashed reference lines at
12 pi sqrt(2) and 8 pi sqrt(6); every valid sweep stays strictly between
them, and the renderer refuses to draw a curve that does not.  Bottom panel:
the per-row verification residual on a log scale.

Usage: ``plots <sweep.csv> <out.png|out.svg>``; exit 0 on success.
"""
from __future__ import annotations

import csv
import math
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["SweepTable", "SweepDataError", "load_sweep", "render", "main"]

REQUIRED_COLUMNS = ("ratio", "yamabe", "max_residual")

LOWER_REFERENCE = 12.0 * math.pi * math.sqrt(2.0)
UPPER_REFERENCE = 8.0 * math.pi * math.sqrt(6.0)


class SweepDataError(Exception):
    pass


@dataclass(frozen=True)
class SweepTable:
    ratio: np.ndarray
    yamabe: np.ndarray
    max_residual: np.ndarray

    def __len__(self) -> int:
        return len(self.ratio)


def load_sweep(csv_path: str) -> SweepTable:
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in REQUIRED_COLUMNS:
            if col not in header:
                raise SweepDataError(f"missing column: {col}")
        rows = list(reader)
    if not rows:
        raise SweepDataError("sweep CSV has no data rows")
    try:
        cols = {
            c: np.array([float(r[c]) for r in rows]) for c in REQUIRED_COLUMNS
        }
    except (TypeError, ValueError) as exc:
        raise SweepDataError(f"non-numeric value in sweep CSV: {exc}") from exc
    table = SweepTable(cols["ratio"], cols["yamabe"], cols["max_residual"])
    if len(table) > 1 and not np.all(np.diff(table.ratio) > 0):
        raise SweepDataError("ratio column not increasing")
    return table


def render(csv_path: str, out_path: str) -> None:
    table = load_sweep(csv_path)
    # a valid sweep lies strictly between the two bounds; refuse to draw otherwise
    if not (np.all(table.yamabe > LOWER_REFERENCE) and np.all(table.yamabe < UPPER_REFERENCE)):
        raise SweepDataError(
            "yamabe values cross a reference line: "
            f"range [{table.yamabe.min():.6f}, {table.yamabe.max():.6f}] vs "
            f"({LOWER_REFERENCE:.6f}, {UPPER_REFERENCE:.6f})"
        )

    fig, (ax_top, ax_bottom) = plt.subplots(
        2, 1, figsize=(7.0, 6.5), sharex=True,
        gridspec_kw={"height_ratios": (3, 1)},
    )
    style = {"marker": "o", "ms": 3} if len(table) == 1 else {}
    ax_top.plot(table.ratio, table.yamabe, color="tab:blue", **style)
    ax_top.set_xscale("log")
    ax_top.axhline(LOWER_REFERENCE, ls="--", color="tab:gray")
    ax_top.axhline(UPPER_REFERENCE, ls="--", color="tab:gray")
    ax_top.annotate(
        f"12π√2 = {LOWER_REFERENCE:.4f}",
        xy=(1.0, LOWER_REFERENCE), xycoords=("axes fraction", "data"),
        xytext=(-4, 4), textcoords="offset points", ha="right", fontsize=9,
    )
    ax_top.annotate(
        f"8π√6 = {UPPER_REFERENCE:.4f}",
        xy=(1.0, UPPER_REFERENCE), xycoords=("axes fraction", "data"),
        xytext=(-4, -12), textcoords="offset points", ha="right", fontsize=9,
    )
    ax_top.set_ylabel("normalized total scalar curvature")
    ax_top.set_title("Sweep of the conformally Kahler Einstein-Maxwell family")

    ax_bottom.plot(table.ratio, np.maximum(table.max_residual, 1e-300),
                   color="tab:red", **style)
    ax_bottom.set_yscale("log")
    ax_bottom.set_xlabel("factor ratio b/a")
    ax_bottom.set_ylabel("max residual")

    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if len(argv) != 2:
        print("usage: plots <sweep.csv> <out.png|out.svg>", file=sys.stderr)
        return 2
    csv_path, out_path = argv
    try:
        render(csv_path, out_path)
    except SweepDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
