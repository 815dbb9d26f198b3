"""Timing harness for the embedding search: vf2 versus vf2pp node ordering."""

from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from .generate import random_routed_circuit
from .interaction import build_interaction_graph
from .subiso import ORDERINGS, find_embeddings
from .topology import heavy_hex

__all__ = ["BenchRow", "run_bench", "rows_to_csv"]


@dataclass(frozen=True)
class BenchRow:
    width: int
    ordering: str
    target_qubits: int
    runs: int
    median_s: float
    min_s: float
    max_s: float
    num_layouts: int
    visits: int
    regression: bool


def run_bench(
    widths=(5, 10, 15),
    distance: int = 23,
    depth: int = 5,
    runs: int = 10,
    seed: int = 0,
    orderings=ORDERINGS,
) -> list[BenchRow]:
    """Time unbudgeted loose-mode searches, one random routed circuit per width.

    Orderings are interleaved inside each repetition so drift in machine load
    hits both alike.  ``regression`` is set on every row of a width where the
    vf2pp median exceeds the vf2 median.
    """
    if runs < 1:
        raise ValueError("runs must be positive")
    target = heavy_hex(distance)
    rows: list[BenchRow] = []
    for width in widths:
        rng = np.random.default_rng([seed, width])
        circuit, _ = random_routed_circuit(target, width, depth, rng, measure=False)
        pattern = build_interaction_graph(circuit, "loose")
        times: dict[str, list[float]] = {o: [] for o in orderings}
        found: dict[str, tuple[int, int]] = {}
        for _ in range(runs):
            for o in orderings:
                t0 = time.perf_counter()
                res = find_embeddings(pattern, target, "loose", o)
                times[o].append(time.perf_counter() - t0)
                found[o] = (len(res.layouts), res.visits_used)
        med = {o: statistics.median(ts) for o, ts in times.items()}
        slow = "vf2" in med and "vf2pp" in med and med["vf2pp"] > med["vf2"]
        for o in orderings:
            rows.append(BenchRow(width, o, target.num_qubits, runs, med[o], min(times[o]),
                                 max(times[o]), found[o][0], found[o][1], slow))
    return rows


def rows_to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=[f.name for f in fields(BenchRow)], lineterminator="\n")
    writer.writeheader()
    for r in rows:
        d = asdict(r)
        for k in ("median_s", "min_s", "max_s"):
            d[k] = f"{d[k]:.6f}"
        writer.writerow(d)
    return buf.getvalue()
