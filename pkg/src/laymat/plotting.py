"""Figures for the CLI report paths.  Uses the Agg canvas directly, so no
display or global pyplot state is involved."""

from __future__ import annotations

from collections import defaultdict

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

__all__ = ["plot_bench", "plot_scores", "plot_validation"]


def _save(fig: Figure, path) -> None:
    FigureCanvasAgg(fig)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})


def plot_bench(rows, path) -> None:
    """Median search time against circuit width, one line per ordering."""
    fig = Figure(figsize=(5, 3.5))
    ax = fig.add_subplot()
    series = defaultdict(list)
    for r in rows:
        series[r.ordering].append((r.width, r.median_s, r.min_s, r.max_s))
    for name, pts in sorted(series.items()):
        pts.sort()
        w = [p[0] for p in pts]
        med = [p[1] for p in pts]
        lo = [p[1] - p[2] for p in pts]
        hi = [p[3] - p[1] for p in pts]
        ax.errorbar(w, med, yerr=[lo, hi], marker="o", capsize=3, label=name)
    ax.set_yscale("log")
    ax.set_xlabel("circuit width (qubits)")
    ax.set_ylabel("search time (s)")
    if rows:
        ax.set_title(f"all embeddings on {rows[0].target_qubits}-qubit heavy-hex")
    ax.legend()
    _save(fig, path)


def plot_scores(scored, path, title: str = "") -> None:
    """Sorted layout scores; the lowest is the one that would be chosen."""
    fig = Figure(figsize=(5, 3.5))
    ax = fig.add_subplot()
    ax.plot(range(len(scored)), [s.score for s in scored], marker=".", linestyle="-")
    ax.set_xlabel("layout rank")
    ax.set_ylabel("score (estimated error)")
    if title:
        ax.set_title(title)
    _save(fig, path)


def plot_validation(scores, fidelities, stderrs, path) -> None:
    """Predicted success (1 - score) against simulated fidelity."""
    fig = Figure(figsize=(4.5, 4))
    ax = fig.add_subplot()
    ax.errorbar([1 - s for s in scores], fidelities, yerr=stderrs, fmt="o", ms=4, capsize=2)
    ax.set_xlabel("1 - score")
    ax.set_ylabel("simulated fidelity")
    _save(fig, path)
