"""Figure rendering for the report paths: benchmark timings and Pareto fronts."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["save_bench_plot", "save_pareto_plot"]


def save_bench_plot(rows: Sequence[dict], path: str) -> None:
    """Runtime versus trace length, one panel per balance factor."""
    alphas = sorted({row["alpha"] for row in rows})
    fig, axes = plt.subplots(len(alphas), 1, figsize=(7, 2.4 * max(len(alphas), 1)), squeeze=False)
    for ax, alpha in zip(axes[:, 0], alphas):
        xs = [row["trace_length"] for row in rows if row["alpha"] == alpha]
        ys = [row["runtime_ms"] for row in rows if row["alpha"] == alpha]
        ax.scatter(xs, ys, s=12, alpha=0.6)
        ax.set_ylabel("runtime [ms]")
        ax.set_title(f"alpha = {alpha:g}", fontsize=9)
        ax.grid(True, linewidth=0.3)
    axes[-1, 0].set_xlabel("trace length")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_pareto_plot(entries: Sequence[tuple[int, Fraction]], path: str) -> None:
    """Edit distance versus path probability for the non-dominated model paths."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    xs = [d for d, _ in entries]
    ys = [float(p) for _, p in entries]
    ax.plot(xs, ys, "o--", markersize=6)
    ax.set_xlabel("edit distance")
    ax.set_ylabel("path probability")
    ax.grid(True, linewidth=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
