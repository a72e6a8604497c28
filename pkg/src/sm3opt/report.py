"""Figure rendering for the CLI report path.

Renders PNG files next to the CSV output: loss/regret curves for runs,
overlaid loss curves for comparisons, and the sorted top-accumulator
comparison for dumps. Everything goes through the Agg backend so runs
stay headless.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import DumpRow, RunRecord


def _new_axes(xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_run_figures(out_dir: Path, records: Sequence[RunRecord]) -> list[Path]:
    written = []
    steps = [r.step for r in records]

    fig, ax = _new_axes("step", "loss")
    ax.plot(steps, [r.loss for r in records], lw=0.9)
    ax.set_title("per-step loss")
    written.append(_save(fig, out_dir / "loss.png"))

    regrets = [r.regret for r in records]
    if all(r is not None for r in regrets) and records:
        fig, ax = _new_axes("step", "cumulative regret")
        ax.plot(steps, regrets, lw=0.9, color="tab:orange")
        ax.set_title("cumulative regret")
        written.append(_save(fig, out_dir / "regret.png"))
    return written


def render_compare_figure(
    out_dir: Path, labels: Sequence[str], losses: Sequence[Sequence[float]]
) -> Path:
    fig, ax = _new_axes("step", "loss")
    for label, column in zip(labels, losses):
        ax.plot(range(1, len(column) + 1), column, lw=0.9, label=label)
    ax.legend()
    ax.set_title("per-step loss by optimizer")
    return _save(fig, out_dir / "compare_loss.png")


def render_dump_figure(out_dir: Path, rows: Sequence[DumpRow]) -> Path:
    """Top accumulators sorted by exact magnitude, with the two
    cover-compressed estimates aligned rank by rank."""
    fig, ax = _new_axes("rank (by exact accumulator)", "accumulator value")
    ranks = range(1, len(rows) + 1)
    ax.plot(ranks, [r.sm3_i for r in rows], lw=0.9, label="sm3-i")
    ax.plot(ranks, [r.sm3_ii for r in rows], lw=0.9, label="sm3-ii")
    ax.plot(ranks, [r.adagrad for r in rows], lw=0.9, label="adagrad (exact)")
    if all(r.adagrad > 0 for r in rows):
        ax.set_yscale("log")
    ax.legend()
    ax.set_title("largest second-moment accumulators")
    return _save(fig, out_dir / "accumulators.png")
