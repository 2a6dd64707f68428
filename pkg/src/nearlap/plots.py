"""Box-plot rendering for benchmark reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def timing_box_plot(times_by_method: dict[str, list[float]], path, title: str = ""):
    """One box per method (median, quartiles, 1.5 IQR whiskers, outlier
    marks), wall time on a log axis."""
    labels = list(times_by_method)
    data = [times_by_method[m] for m in labels]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.boxplot(data, tick_labels=labels, whis=1.5, sym="r+")
    ax.set_ylabel("wall time [ms]")
    ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def convergence_plot(objectives: list[float], path, title: str = ""):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(range(len(objectives)), objectives, marker=".", lw=1)
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective")
    ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
