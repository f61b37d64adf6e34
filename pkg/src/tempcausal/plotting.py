"""Figures for experiment reports, written next to the JSON/CSV output."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
    "svg.hashsalt": "tempcausal",
}

COLORS = ("#4c72b0", "#dd8452", "#55a868", "#c44e52")


def _bars(ax, names, series: dict[str, list], ylabel: str):
    x = np.arange(len(names))
    width = 0.8 / max(1, len(series))
    for k, (label, values) in enumerate(series.items()):
        vals = [np.nan if v is None else 100 * v for v in values]
        ax.bar(x + (k - (len(series) - 1) / 2) * width, vals, width, label=label, color=COLORS[k % 4])
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel(ylabel)
    # headroom above 100 keeps the legend clear of the bars
    ax.set_ylim(0, 122)
    ax.set_yticks(range(0, 101, 20))
    ax.legend(frameon=False, ncol=len(series), loc="upper left", fontsize=8)


def plot_metrics(rows: Sequence, path, title: str = "") -> Path:
    """Grouped bars of P/R/F1 and causal accuracy per system.

    ``rows`` holds ``(name, MetricsReport)`` pairs.
    """
    path = Path(path)
    names = [name for name, _ in rows]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(names) + 1.5), 3.2))
        series = {
            "P": [m.precision for _, m in rows],
            "R": [m.recall for _, m in rows],
            "F1": [m.f1 for _, m in rows],
        }
        if any(m.causal_accuracy is not None for _, m in rows):
            series["causal acc"] = [m.causal_accuracy for _, m in rows]
        _bars(ax, names, series, "score (%)")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)
    return path


def plot_f1_distribution(results: Sequence, path) -> Path:
    """Per-document F1 spread for each preset (box plot)."""
    path = Path(path)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(results) + 1.5), 3.0))
        data = [[100 * f for f in r.per_doc_f1] for r in results]
        ax.boxplot(data, showmeans=True)
        ax.set_xticks(range(1, len(results) + 1))
        ax.set_xticklabels([r.name for r in results], rotation=20, ha="right")
        ax.set_ylabel("per-document F1 (%)")
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)
    return path
