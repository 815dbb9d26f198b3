"""Device coupling maps and synthetic topologies."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

__all__ = [
    "TopologyError",
    "CouplingMap",
    "undirected_view",
    "heavy_hex",
    "heavy_hex_size",
    "load_coupling_map",
    "coupling_map_to_json",
    "nairobi",
    "line",
    "from_undirected",
]


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class CouplingMap:
    """Directed connectivity graph of a device's physical qubits.

    ``supported_ops`` maps an instruction name to the physical qubit tuples it
    is calibrated on.  ``None`` means every registered instruction exists on
    every qubit and on every edge in its listed direction.
    """

    num_qubits: int
    edges: frozenset[tuple[int, int]]
    supported_ops: Mapping[str, frozenset[tuple[int, ...]]] | None = None
    _adj: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = frozenset((int(a), int(b)) for a, b in self.edges)
        object.__setattr__(self, "edges", edges)
        for a, b in edges:
            if a == b:
                raise TopologyError(f"self-loop on qubit {a}")
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise TopologyError(f"edge ({a}, {b}) references a qubit outside [0, {self.num_qubits})")
        if self.supported_ops is not None:
            ops = {name: frozenset(tuple(int(q) for q in qs) for qs in locs)
                   for name, locs in self.supported_ops.items()}
            for name, locs in ops.items():
                for qs in locs:
                    if any(not 0 <= q < self.num_qubits for q in qs):
                        raise TopologyError(f"supported op {name}{qs} references a missing qubit")
            object.__setattr__(self, "supported_ops", ops)
        succ = [set() for _ in range(self.num_qubits)]
        pred = [set() for _ in range(self.num_qubits)]
        for a, b in edges:
            succ[a].add(b)
            pred[b].add(a)
        object.__setattr__(self, "_adj", (
            tuple(frozenset(s) for s in succ),
            tuple(frozenset(p) for p in pred),
            tuple(frozenset(s | p) for s, p in zip(succ, pred)),
        ))

    @property
    def successors(self) -> tuple[frozenset[int], ...]:
        return self._adj[0]

    @property
    def predecessors(self) -> tuple[frozenset[int], ...]:
        return self._adj[1]

    @property
    def neighbors(self) -> tuple[frozenset[int], ...]:
        return self._adj[2]

    def undirected_edges(self) -> list[tuple[int, int]]:
        return sorted({(min(a, b), max(a, b)) for a, b in self.edges})

    def is_symmetric(self) -> bool:
        return all((b, a) in self.edges for a, b in self.edges)

    def supports(self, name: str, qubits: tuple[int, ...]) -> bool:
        """Whether instruction ``name`` is available on physical ``qubits``."""
        if len(qubits) == 2 and qubits not in self.edges:
            return False
        if self.supported_ops is None:
            return True
        return qubits in self.supported_ops.get(name, ())

    def edge_key(self, directed: bool) -> tuple:
        """Hashable identity of the connectivity, used to share searches."""
        if directed:
            ops = None if self.supported_ops is None else tuple(
                sorted((n, tuple(sorted(l))) for n, l in self.supported_ops.items()))
            return (self.num_qubits, tuple(sorted(self.edges)), ops)
        return (self.num_qubits, tuple(self.undirected_edges()))


def undirected_view(cm: CouplingMap) -> CouplingMap:
    """Symmetrize edges; two-qubit availability is merged across orientations."""
    edges = set(cm.edges) | {(b, a) for a, b in cm.edges}
    ops = None
    if cm.supported_ops is not None:
        ops = {}
        for name, locs in cm.supported_ops.items():
            merged = set(locs)
            merged |= {tuple(reversed(qs)) for qs in locs if len(qs) == 2}
            ops[name] = frozenset(merged)
    return CouplingMap(cm.num_qubits, frozenset(edges), ops)


def heavy_hex_size(distance: int) -> int:
    """Qubit count of :func:`heavy_hex` without building it."""
    rows, width = distance, 2 * distance - 1
    total = rows * width
    for gap in range(-1, rows):
        offset = 1 if gap % 2 == 0 else 3
        total += sum(1 for c in range(width) if c % 4 == offset)
    return total


def heavy_hex(distance: int) -> CouplingMap:
    """Heavy-hex lattice with ``distance`` rows of ``2*distance - 1`` qubits.

    Rows are chains.  Between consecutive rows, and above the first and below
    the last, sits a layer of bridge qubits attached to the odd columns, the
    layers alternating between columns ``1 mod 4`` and ``3 mod 4`` so that
    every face is a 12-qubit heavy hexagon.  Odd distances give the familiar
    ``(5d^2 - 2d - 1) / 2`` qubits (``heavy_hex(23)`` has 1299); ``distance=2``
    is the 7-qubit H-shaped device.

    Numbering is row-major over the lattice: bridge layer, row, bridge layer,
    ... each left to right.  Edges are bidirectional.
    """
    if not isinstance(distance, int) or distance < 2:
        raise TopologyError("heavy_hex distance must be an integer >= 2")
    rows, width = distance, 2 * distance - 1
    index = 0
    row_ids: list[list[int]] = []
    bridges: list[tuple[int, int, int]] = []  # (qubit, gap, column)
    for gap in range(-1, rows):
        if gap >= 0:
            row_ids.append(list(range(index, index + width)))
            index += width
        offset = 1 if gap % 2 == 0 else 3
        for col in range(width):
            if col % 4 == offset:
                bridges.append((index, gap, col))
                index += 1
    edges = set()
    for r in row_ids:
        for a, b in zip(r, r[1:]):
            edges.update({(a, b), (b, a)})
    for q, gap, col in bridges:
        if gap >= 0:
            above = row_ids[gap][col]
            edges.update({(q, above), (above, q)})
        if gap + 1 < rows:
            below = row_ids[gap + 1][col]
            edges.update({(q, below), (below, q)})
    return CouplingMap(index, frozenset(edges))


def nairobi() -> CouplingMap:
    """The 7-qubit H-shaped map (0-1-2, 1-3, 3-5, 4-5-6), bidirectional."""
    und = [(0, 1), (1, 2), (1, 3), (3, 5), (4, 5), (5, 6)]
    return CouplingMap(7, frozenset(und) | frozenset((b, a) for a, b in und))


def line(n: int) -> CouplingMap:
    und = [(i, i + 1) for i in range(n - 1)]
    return CouplingMap(n, frozenset(und) | frozenset((b, a) for a, b in und))


def load_coupling_map(text: str | Mapping) -> CouplingMap:
    """Read the coupling-map JSON format.

    ``{"num_qubits": N, "edges": [[a, b], ...], "supported_ops": {"cx": [[a, b], ...]}}``
    with ``supported_ops`` optional.
    """
    if isinstance(text, str):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TopologyError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from None
    else:
        data = text
    if not isinstance(data, Mapping):
        raise TopologyError("coupling map must be a JSON object")
    n = data.get("num_qubits")
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise TopologyError("num_qubits must be a non-negative integer")
    raw_edges = data.get("edges", [])
    if not isinstance(raw_edges, list):
        raise TopologyError("edges must be a list")
    edges = []
    for e in raw_edges:
        if (not isinstance(e, list) or len(e) != 2
                or not all(isinstance(q, int) and not isinstance(q, bool) for q in e)):
            raise TopologyError(f"malformed edge {e!r}")
        edges.append(tuple(e))
    ops = data.get("supported_ops")
    if ops is not None:
        if not isinstance(ops, Mapping):
            raise TopologyError("supported_ops must be an object")
        try:
            ops = {str(k): [tuple(q) for q in v] for k, v in ops.items()}
        except TypeError:
            raise TopologyError("supported_ops entries must be lists of qubit lists") from None
    cm = CouplingMap(n, frozenset(edges), ops)
    if len(set(edges)) != len(edges):
        raise TopologyError("duplicate edge in edge list")
    return cm


def coupling_map_to_json(cm: CouplingMap) -> dict:
    out: dict = {"num_qubits": cm.num_qubits, "edges": [list(e) for e in sorted(cm.edges)]}
    if cm.supported_ops is not None:
        out["supported_ops"] = {name: [list(q) for q in sorted(locs)]
                                for name, locs in sorted(cm.supported_ops.items())}
    return out


def from_undirected(num_qubits: int, pairs: Iterable[tuple[int, int]]) -> CouplingMap:
    pairs = list(pairs)
    return CouplingMap(num_qubits, frozenset(pairs) | frozenset((b, a) for a, b in pairs))
