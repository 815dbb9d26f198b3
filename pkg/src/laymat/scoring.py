"""Layout cost functions and ranking.

A score estimates the probability that a circuit suffers at least one error
when run on a given layout, ``1 - prod(1 - e_i)`` over its instructions.
Lower is better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Protocol

from .calibration import CalibrationSnapshot, ErrorMap, idle_error
from .circuit import QuantumCircuit
from .subiso import Layout

__all__ = [
    "DEFAULT_TOL",
    "CostFunction",
    "ScoredLayout",
    "score_default",
    "score_with_idle",
    "asap_schedule",
    "idle_gaps",
    "rank_layouts",
    "recoverable_fraction",
    "COST_FUNCTIONS",
    "register_cost",
    "get_cost",
]

DEFAULT_TOL = 1e-10


class CostCallable(Protocol):
    def __call__(self, circuit: QuantumCircuit, layout: Layout, em: ErrorMap,
                 snap: CalibrationSnapshot | None) -> float: ...


@dataclass(frozen=True)
class CostFunction:
    name: str
    fn: CostCallable

    def __call__(self, circuit, layout, em, snap=None) -> float:
        return self.fn(circuit, layout, em, snap)


@dataclass(frozen=True)
class ScoredLayout:
    layout: Layout
    score: float
    tied_with: int = 1

    @property
    def fidelity_estimate(self) -> float:
        return 1.0 - self.score


def _mapper(layout: Layout) -> Callable[[tuple[int, ...]], tuple[int, ...]]:
    m = layout.as_dict()

    def apply(qubits: tuple[int, ...]) -> tuple[int, ...]:
        try:
            return tuple(m[q] for q in qubits)
        except KeyError as exc:
            raise ValueError(f"layout does not cover virtual qubit {exc.args[0]}") from None

    return apply


def _instruction_factors(circuit: QuantumCircuit, layout: Layout, em: ErrorMap) -> list[float]:
    phys = _mapper(layout)
    return [1.0 - em.error(inst.name, phys(inst.qubits))
            for inst in circuit.instructions if inst.kind != "barrier"]


def _product(factors: list[float]) -> float:
    # sorted so that equal multisets give bit-identical scores
    return math.prod(sorted(factors))


def score_default(circuit: QuantumCircuit, layout: Layout, em: ErrorMap,
                  snap: CalibrationSnapshot | None = None) -> float:
    """Product-of-fidelities cost over every non-barrier instruction."""
    return 1.0 - _product(_instruction_factors(circuit, layout, em))


def asap_schedule(circuit: QuantumCircuit, layout: Layout, snap: CalibrationSnapshot,
                  exact: bool = True) -> list[tuple[float, float]]:
    """(start, stop) times per instruction, barriers given zero width.

    Each instruction starts as soon as all of its qubits are free.  Barriers
    do not synchronize anything.
    """
    phys = _mapper(layout)
    ready: dict[int, float] = {}
    times = []
    for inst in circuit.instructions:
        if inst.kind == "barrier":
            times.append((math.nan, math.nan))
            continue
        qs = phys(inst.qubits)
        dur = snap.duration(inst.name, qs, exact=exact)
        start = max((ready.get(q, 0.0) for q in qs), default=0.0)
        stop = start + dur
        for q in qs:
            ready[q] = stop
        times.append((start, stop))
    return times


def idle_gaps(circuit: QuantumCircuit, layout: Layout, snap: CalibrationSnapshot,
              exact: bool = True) -> list[tuple[int, float]]:
    """(physical qubit, gap length) for every gap between consecutive
    instructions on the same qubit.  Zero-length gaps are included."""
    phys = _mapper(layout)
    times = asap_schedule(circuit, layout, snap, exact)
    last_stop: dict[int, float] = {}
    gaps = []
    for inst, (start, stop) in zip(circuit.instructions, times):
        if inst.kind == "barrier":
            continue
        for q in phys(inst.qubits):
            if q in last_stop:
                gaps.append((q, start - last_stop[q]))
            last_stop[q] = stop
    return gaps


def score_with_idle(circuit: QuantumCircuit, layout: Layout, em: ErrorMap,
                    snap: CalibrationSnapshot) -> float:
    """:func:`score_default` with T1/T2 decay charged on every idle gap.

    Needs per-instruction durations in ``snap``; in a loose error map missing
    durations fall back to device means.  Raises :class:`LookupMiss` when no
    duration can be found, and ``ValueError`` when a qubit lacks T1/T2.
    """
    if snap is None:
        raise ValueError("score_with_idle needs a calibration snapshot")
    factors = _instruction_factors(circuit, layout, em)
    for q, dt in idle_gaps(circuit, layout, snap, exact=em.mode == "strict"):
        if dt > 0:
            props = snap.qubits[q]
            if props.t1 is None or props.t2 is None:
                raise ValueError(f"qubit {q} has no T1/T2 data")
            factors.append(1.0 - idle_error(props.t1, props.t2, dt))
    return 1.0 - _product(factors)


COST_FUNCTIONS: dict[str, CostFunction] = {
    "default": CostFunction("default", score_default),
    "idle": CostFunction("idle", score_with_idle),
}


def register_cost(name: str, fn: CostCallable) -> CostFunction:
    """Make a user cost function selectable by name (e.g. from the CLI)."""
    cf = CostFunction(name, fn)
    COST_FUNCTIONS[name] = cf
    return cf


def get_cost(cost: str | CostFunction | CostCallable) -> CostFunction:
    if isinstance(cost, CostFunction):
        return cost
    if isinstance(cost, str):
        try:
            return COST_FUNCTIONS[cost]
        except KeyError:
            raise ValueError(f"unknown cost function {cost!r}; have {sorted(COST_FUNCTIONS)}") from None
    return CostFunction(getattr(cost, "__name__", "custom"), cost)


def rank_layouts(
    circuit: QuantumCircuit,
    layouts: Iterable[Layout],
    cost: str | CostFunction | CostCallable,
    em: ErrorMap,
    snap: CalibrationSnapshot | None = None,
    tol: float = DEFAULT_TOL,
) -> list[ScoredLayout]:
    """Score every layout and sort ascending.

    Scores within ``tol`` of the first score of a run are a tie group; each
    member gets ``tied_with`` = group size and the group is ordered by the
    physical-qubit tuple.  The result does not depend on input order.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    cf = get_cost(cost)
    scored = []
    for lay in layouts:
        s = cf(circuit, lay, em, snap)
        if not 0.0 <= s <= 1.0:
            if -1e-15 < s < 0.0:
                s = 0.0
            else:
                raise ValueError(f"cost {cf.name!r} returned {s} outside [0, 1]")
        scored.append((s, lay.physical, lay))
    scored.sort(key=lambda t: (t[0], t[1]))
    out: list[ScoredLayout] = []
    i = 0
    while i < len(scored):
        anchor = scored[i][0]
        j = i
        while j < len(scored) and scored[j][0] - anchor <= tol:
            j += 1
        group = sorted(scored[i:j], key=lambda t: t[1])
        out.extend(ScoredLayout(lay, s, j - i) for s, _, lay in group)
        i = j
    return out


def recoverable_fraction(f: float, f_base: float) -> float:
    """Share of the fidelity missing from ``f_base`` that ``f`` wins back.

    Negative when ``f < f_base``.
    """
    if f_base == 1:
        raise ZeroDivisionError("baseline fidelity of 1 leaves nothing to recover")
    return (f - f_base) / (1 - f_base)

