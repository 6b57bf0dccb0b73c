"""Matplotlib renderings of the report outputs.

Each function writes one PNG next to the delimited files the CLI emits:
a hypothesis-vs-reference scatter per discourse feature, a heatmap of
the rating-aspect intercorrelation, and system-level correlation bars.
The engine modules stay plotting-free; everything here consumes their
plain data structures.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .features import FeatureRow
from .harness import CorrelationReport


def feature_scatter(rows: Sequence[FeatureRow], feature: str, path: str) -> None:
    """Scatter of per-pair feature values, hypothesis on x, reference on y,
    with the y=x line; points below the line are pairs where the
    hypothesis side is larger."""
    xs = [r.hyp_value for r in rows
          if r.feature == feature and r.hyp_value is not None and r.ref_value is not None]
    ys = [r.ref_value for r in rows
          if r.feature == feature and r.hyp_value is not None and r.ref_value is not None]
    fig, ax = plt.subplots(figsize=(5, 5))
    if xs:
        ax.scatter(xs, ys, s=12, alpha=0.6, edgecolors="none")
        lo = min(min(xs), min(ys))
        hi = max(max(xs), max(ys))
        pad = 0.05 * (hi - lo) if hi > lo else 0.5
        ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], color="gray", lw=1, ls="--")
        ax.set_xlim(lo - pad, hi + pad)
        ax.set_ylim(lo - pad, hi + pad)
    ax.set_xlabel(f"{feature} (hypothesis)")
    ax.set_ylabel(f"{feature} (reference)")
    ax.set_title(f"{feature}: hypothesis vs reference")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def aspect_heatmap(aspects: Sequence[str], matrix: np.ndarray, path: str) -> None:
    """Heatmap of pairwise Pearson between rating aspects (system level)."""
    fig, ax = plt.subplots(figsize=(1.2 * len(aspects) + 2, 1.2 * len(aspects) + 1.5))
    image = ax.imshow(matrix, vmin=-1.0, vmax=1.0, cmap="RdBu_r")
    ax.set_xticks(range(len(aspects)), labels=aspects, rotation=45, ha="right")
    ax.set_yticks(range(len(aspects)), labels=aspects)
    for i in range(len(aspects)):
        for j in range(len(aspects)):
            ax.text(j, i, f"{matrix[i, j]:.2f}", ha="center", va="center", fontsize=8)
    fig.colorbar(image, ax=ax, shrink=0.8)
    ax.set_title("Aspect intercorrelation (Pearson, system level)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def system_correlation_bars(reports: Sequence[CorrelationReport], path: str) -> None:
    """Grouped bars of system-level Kendall correlation per metric/aspect."""
    rows = [r for r in reports if r.level == "system"]
    metrics = sorted({r.metric for r in rows})
    aspects = sorted({r.aspect for r in rows})
    fig, ax = plt.subplots(figsize=(max(6.0, 1.6 * len(metrics)), 4))
    width = 0.8 / max(1, len(aspects))
    base = np.arange(len(metrics), dtype=float)
    lookup = {(r.metric, r.aspect): r.kendall for r in rows}
    for k, aspect in enumerate(aspects):
        values = [lookup.get((m, aspect), np.nan) for m in metrics]
        ax.bar(base + k * width, values, width=width, label=aspect)
    ax.set_xticks(base + 0.4 - width / 2, labels=metrics, rotation=20, ha="right")
    ax.set_ylabel("Kendall correlation")
    ax.set_title("System-level correlation with human ratings")
    ax.axhline(0.0, color="black", lw=0.8)
    if aspects:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
