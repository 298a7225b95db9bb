"""CSV and figure writers for CLI artifacts.

Every report path gets the delimited file plus a rendered PNG next to it,
so a run's numbers and their picture travel together.  CSV cells for
floats use repr() of the Python float, which is the shortest exact
round-trip form and keeps reruns byte-identical.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGSIZE = (7.0, 4.5)
DPI = 150


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def line_figure(path: str, x, series: dict, xlabel: str, ylabel: str,
                title: str, logy: bool = False) -> None:
    """One axes, one line per series entry (label -> y values)."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for label, ys in series.items():
        ax.plot(x, ys, marker="o", markersize=3, linewidth=1.5, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(alpha=0.3)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def training_figure(path: str, records) -> None:
    """Reward and loss trajectories over episodes, stacked."""
    episodes = [r.episode for r in records]
    fig, (ax_r, ax_l) = plt.subplots(2, 1, figsize=(FIGSIZE[0], 6.0), sharex=True)
    ax_r.plot(episodes, [r.cumulative_reward for r in records], linewidth=1.2)
    ax_r.set_ylabel("cumulative reward")
    ax_r.grid(alpha=0.3)
    ax_l.plot(episodes, [r.mean_loss for r in records], linewidth=1.2, color="tab:red")
    ax_l.set_ylabel("mean loss")
    ax_l.set_xlabel("episode")
    ax_l.grid(alpha=0.3)
    fig.suptitle("training trajectory")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def score_histogram(path: str, scores, labels, title: str) -> None:
    """Score distributions of the two classes, overlaid."""
    scores = np.asarray(scores)
    labels = np.asarray(labels)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    bins = np.linspace(0.0, 1.0, 31)
    ax.hist(scores[labels == 0], bins=bins, alpha=0.6, label="negative pairs",
            color="tab:blue")
    ax.hist(scores[labels == 1], bins=bins, alpha=0.6, label="positive pairs",
            color="tab:orange")
    ax.axvline(0.5, color="black", linewidth=1.0, linestyle="--")
    ax.set_xlabel("predicted match probability")
    ax.set_ylabel("pairs")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def convergence_figure(path: str, per_function: dict, title: str) -> None:
    """Per-function subplots of mean best objective vs iteration per mode.

    per_function: {function name: {mode: list of per-seed history arrays}}.
    Histories may differ in length by an iteration or two; curves are
    truncated to the shortest before averaging.
    """
    names = list(per_function)
    fig, axes = plt.subplots(1, len(names), figsize=(4.0 * len(names), 4.0),
                             squeeze=False)
    for ax, name in zip(axes[0], names):
        for mode, histories in per_function[name].items():
            shortest = min(len(h) for h in histories)
            stacked = np.stack([np.asarray(h[:shortest]) for h in histories])
            ax.plot(np.arange(shortest), stacked.mean(axis=0),
                    linewidth=1.5, label=mode)
        ax.set_yscale("log")
        ax.set_title(name)
        ax.set_xlabel("iteration")
        ax.grid(alpha=0.3, which="both")
        ax.legend()
    axes[0][0].set_ylabel("best objective (mean over seeds)")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
