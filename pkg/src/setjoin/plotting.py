"""Figures for sweep results, rendered off-screen to image files."""

from __future__ import annotations

import os
from collections import defaultdict
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PANELS = (
    ("join_ms", "join time [ms]"),
    ("n_intersections", "list intersections"),
    ("n_candidates_verified", "verified candidates"),
    ("peak_logical_bytes", "peak logical memory [bytes]"),
)

AXIS_LABELS = {
    "limit": "limit ℓ",
    "cardinality": "cardinality",
    "domain": "domain size",
    "wavg_len": "weighted avg. object length",
    "zipf": "Zipf exponent",
}


def _series(rows: Sequence[dict], metric: str) -> dict[str, tuple[list[float], list[float]]]:
    by_label: dict[str, list[tuple[float, float]]] = defaultdict(list)
    for row in rows:
        by_label[row["label"]].append((float(row["value"]), float(row[metric])))
    return {label: tuple(map(list, zip(*sorted(pts)))) for label, pts in by_label.items()}


def plot_sweep(rows: Sequence[dict], path: str | os.PathLike, title: str | None = None) -> str:
    """One 2x2 figure: a panel per metric, a line per configuration label."""
    if not rows:
        raise ValueError("nothing to plot")
    axis = rows[0]["axis"]
    fig, axes = plt.subplots(2, 2, figsize=(9, 6.5), constrained_layout=True)
    for ax, (metric, ylabel) in zip(axes.flat, PANELS):
        for label, (xs, ys) in sorted(_series(rows, metric).items()):
            ax.plot(xs, ys, marker="o", ms=4, lw=1.4, label=label)
        ax.set_xlabel(AXIS_LABELS.get(axis, axis))
        ax.set_ylabel(ylabel)
        if all(y > 0 for _, ys in _series(rows, metric).values() for y in ys):
            ax.set_yscale("log")
        ax.grid(True, which="major", alpha=0.3)
    axes.flat[0].legend(frameon=False, fontsize=8)
    if title:
        fig.suptitle(title)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)
