"""Figure rendering for evaluation reports.

Each helper writes a single matplotlib figure to a file, meant to sit next to
the JSON/CSV the CLI emits.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .perception import PRReport  # noqa: E402
from .planning import PlanningReport  # noqa: E402


def save_planning_figure(report: PlanningReport, path: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    if report.ade_at:
        hs = sorted(report.ade_at)
        ax.plot(hs, [report.ade_at[h] for h in hs], "o-", label="ADE (mean to t)")
    if report.l2_at:
        hs = sorted(report.l2_at)
        ax.plot(hs, [report.l2_at[h] for h in hs], "s--", label="L2 (at t)")
    ax.set_xlabel("horizon (s)")
    ax.set_ylabel("error (m)")
    ax.set_title(f"planning error over {report.n_examples} examples")
    ax.grid(ls="--", lw=0.5)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_pr_figure(reports: Mapping[str, PRReport], path: str) -> None:
    names = list(reports)
    metrics = ("precision", "recall", "f1")
    fig, ax = plt.subplots(figsize=(6, 4))
    width = 0.8 / len(metrics)
    for mi, metric in enumerate(metrics):
        xs = [i + mi * width for i in range(len(names))]
        ys = [getattr(reports[n], metric) for n in names]
        ax.bar(xs, ys, width=width, label=metric)
    ax.set_xticks([i + width for i in range(len(names))])
    ax.set_xticklabels(names)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.grid(axis="y", ls="--", lw=0.5)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_ablation_figure(curve: Mapping[int, float], path: str) -> None:
    ks = sorted(curve)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, [curve[k] for k in ks], "o-")
    ax.set_xlabel("samples aggregated (k)")
    ax.set_ylabel("ADE at full horizon (m)")
    ax.set_title("trajectory sampling ablation")
    ax.grid(ls="--", lw=0.5)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def sparkline(values: Sequence[float], width: int = 40) -> str:
    """Compact one-line chart of a curve using block characters."""
    if not values:
        return ""
    blocks = "▁▂▃▄▅▆▇█"
    lo, hi = min(values), max(values)
    span = hi - lo
    if span <= 0:
        return blocks[0] * len(values)
    return "".join(blocks[min(7, int((v - lo) / span * 8))] for v in values)
