"""End-to-end layout selection on one device or across a fleet, and remapping."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .calibration import (CalibrationError, CalibrationSnapshot, calibration_to_json, error_map,
                          load_calibration)
from .circuit import Instruction, QuantumCircuit
from .interaction import build_interaction_graph, check_mode
from .scoring import DEFAULT_TOL, ScoredLayout, get_cost, rank_layouts
from .subiso import Layout, SearchBudget, SearchResult, find_embeddings
from .topology import CouplingMap, coupling_map_to_json, load_coupling_map

__all__ = [
    "NoEmbeddingError",
    "DeviceCandidate",
    "DeviceResult",
    "SelectionReport",
    "best_layout",
    "ranked_layouts",
    "select_device",
    "remap",
    "complete_layout",
    "load_device",
    "device_to_json",
]


class NoEmbeddingError(RuntimeError):
    """The circuit's interaction graph does not embed into the device."""

    def __init__(self, message: str, exhausted: bool = True, visits_used: int = 0):
        super().__init__(message)
        self.exhausted = exhausted
        self.visits_used = visits_used


@dataclass(frozen=True)
class DeviceCandidate:
    name: str
    coupling_map: CouplingMap
    calibration: CalibrationSnapshot

    def __post_init__(self):
        if self.calibration.num_qubits != self.coupling_map.num_qubits:
            raise ValueError(
                f"{self.name}: calibration has {self.calibration.num_qubits} qubits, "
                f"coupling map has {self.coupling_map.num_qubits}"
            )


@dataclass
class DeviceResult:
    device: str
    best: ScoredLayout | None
    exhausted: bool
    num_layouts: int
    skip_reason: str | None = None


@dataclass
class SelectionReport:
    devices: list[DeviceResult] = field(default_factory=list)
    winner: tuple[str, ScoredLayout] | None = None

    def to_json(self, num_qubits: int) -> dict:
        def scored(s: ScoredLayout | None):
            if s is None:
                return None
            return {"layout": s.layout.to_list(num_qubits), "score": s.score,
                    "fidelity_estimate": s.fidelity_estimate, "tied_with": s.tied_with}

        return {
            "devices": [
                {"device": r.device, "best": scored(r.best), "exhausted": r.exhausted,
                 "num_layouts": r.num_layouts, "skip_reason": r.skip_reason}
                for r in self.devices
            ],
            "winner": None if self.winner is None else
            {"device": self.winner[0], **scored(self.winner[1])},
        }


def ranked_layouts(
    circuit: QuantumCircuit,
    device: DeviceCandidate,
    mode: str = "loose",
    cost="default",
    budget: SearchBudget | None = None,
    ordering: str = "vf2pp",
    tol: float = DEFAULT_TOL,
    _search: SearchResult | None = None,
) -> tuple[list[ScoredLayout], SearchResult]:
    """Every embedding of ``circuit`` on ``device``, scored and sorted."""
    check_mode(mode)
    if _search is None:
        pattern = build_interaction_graph(circuit, mode)
        _search = find_embeddings(pattern, device.coupling_map, mode, ordering, budget)
    em = error_map(device.calibration, mode)
    ranked = rank_layouts(circuit, _search.layouts, get_cost(cost), em, device.calibration, tol)
    return ranked, _search


def best_layout(
    circuit: QuantumCircuit,
    device: DeviceCandidate,
    mode: str = "loose",
    cost="default",
    budget: SearchBudget | None = None,
    ordering: str = "vf2pp",
    tol: float = DEFAULT_TOL,
) -> ScoredLayout:
    """Lowest-cost layout of ``circuit`` on ``device``.

    Raises :class:`NoEmbeddingError` when the search returns nothing; its
    ``exhausted`` attribute tells whether the search was complete.
    """
    ranked, search = ranked_layouts(circuit, device, mode, cost, budget, ordering, tol)
    if not ranked:
        why = "no embedding exists" if search.exhausted else "search budget ran out before any embedding"
        raise NoEmbeddingError(f"{device.name}: {why}", search.exhausted, search.visits_used)
    return ranked[0]


def select_device(
    circuit: QuantumCircuit,
    fleet: list[DeviceCandidate],
    mode: str = "loose",
    cost="default",
    budget: SearchBudget | None = None,
    ordering: str = "vf2pp",
    tol: float = DEFAULT_TOL,
    workers: int = 1,
) -> SelectionReport:
    """Best device and layout over ``fleet``.

    Searches are shared between devices with identical connectivity (and, in
    strict mode, identical instruction availability).  Devices without any
    embedding are skipped.  The winner is the lowest best score; equal scores
    go to the device listed first.
    """
    if not fleet:
        raise ValueError("fleet is empty")
    check_mode(mode)
    pattern = build_interaction_graph(circuit, mode)
    searches: dict[tuple, SearchResult] = {}
    for dev in fleet:
        key = dev.coupling_map.edge_key(directed=mode == "strict")
        if key not in searches:
            searches[key] = find_embeddings(pattern, dev.coupling_map, mode, ordering, budget)

    def evaluate(dev: DeviceCandidate) -> DeviceResult:
        search = searches[dev.coupling_map.edge_key(directed=mode == "strict")]
        if not search.layouts:
            reason = "insufficient embedding" if search.exhausted else "search budget exhausted"
            return DeviceResult(dev.name, None, search.exhausted, 0, reason)
        ranked, _ = ranked_layouts(circuit, dev, mode, cost, tol=tol, _search=search)
        return DeviceResult(dev.name, ranked[0], search.exhausted, len(ranked))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, fleet))
    else:
        results = [evaluate(d) for d in fleet]
    report = SelectionReport(results)
    live = [r for r in results if r.best is not None]
    if not live:
        raise NoEmbeddingError("no device in the fleet admits an embedding")
    win = min(live, key=lambda r: r.best.score)
    report.winner = (win.device, win.best)
    return report


def complete_layout(circuit: QuantumCircuit, layout: Layout, num_physical: int) -> list[int]:
    """Physical qubit for every declared virtual qubit.

    Idle wires take the unused physical qubits in ascending order.
    """
    if circuit.num_qubits > num_physical:
        raise ValueError(f"circuit has {circuit.num_qubits} qubits, device only {num_physical}")
    m = layout.as_dict()
    active = circuit.active_qubits()
    missing = [q for q in active if q not in m]
    if missing:
        raise ValueError(f"layout does not cover active qubits {missing}")
    if any(not 0 <= p < num_physical for p in m.values()):
        raise ValueError("layout references a qubit outside the device")
    if any(v >= circuit.num_qubits for v in m):
        raise ValueError("layout references a virtual qubit the circuit lacks")
    free = iter(sorted(set(range(num_physical)) - set(m.values())))
    return [m[v] if v in m else next(free) for v in range(circuit.num_qubits)]


def remap(circuit: QuantumCircuit, layout: Layout, num_physical: int | None = None) -> QuantumCircuit:
    """Rewrite ``circuit`` onto physical qubits.

    The result has ``num_physical`` qubits (default: just enough for the
    largest image).  Names, parameters, clbits and order are untouched.
    """
    if num_physical is None:
        num_physical = max([*layout.physical, circuit.num_qubits - 1], default=-1) + 1
    full = complete_layout(circuit, layout, num_physical)
    insts = [Instruction(i.name, tuple(full[q] for q in i.qubits), i.params, i.clbits)
             for i in circuit.instructions]
    return QuantumCircuit(num_physical, insts, circuit.num_clbits, circuit.registry)


def load_device(text: str | dict, default_name: str = "") -> DeviceCandidate:
    """Read a device bundle ``{"name", "coupling_map": {..}, "calibration": {..}}``."""
    data = json.loads(text) if isinstance(text, str) else text
    if not isinstance(data, dict) or "coupling_map" not in data or "calibration" not in data:
        raise CalibrationError("device bundle needs 'coupling_map' and 'calibration' objects")
    cm = load_coupling_map(data["coupling_map"])
    snap = load_calibration(data["calibration"])
    name = str(data.get("name") or snap.device_name or default_name)
    try:
        return DeviceCandidate(name, cm, snap)
    except ValueError as exc:
        raise CalibrationError(str(exc)) from None


def device_to_json(device: DeviceCandidate, exact: bool = False) -> dict:
    """Device bundle dict; ``exact`` as in :func:`calibration_to_json`."""
    return {"name": device.name, "coupling_map": coupling_map_to_json(device.coupling_map),
            "calibration": calibration_to_json(device.calibration, exact)}
