"""Circuit interaction graphs: the pattern side of the layout search."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .circuit import QuantumCircuit

__all__ = ["MODES", "InteractionGraph", "build_interaction_graph"]

MODES = ("loose", "strict")


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


@dataclass(frozen=True)
class InteractionGraph:
    """Which virtual qubits interact, and through which instructions.

    ``nodes`` are the active virtual qubits in ascending order; qubits that
    appear in no instruction at all are left out.  In loose mode ``edges``
    holds sorted pairs, in strict mode ordered (control, target) pairs.
    """

    num_qubits: int
    nodes: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    mode: str = "loose"
    node_ops: dict[int, Counter] = field(default_factory=dict, compare=False)
    edge_ops: dict[tuple[int, int], Counter] = field(default_factory=dict, compare=False)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def directed(self) -> bool:
        return self.mode == "strict"

    def adjacency(self) -> dict[int, set[int]]:
        """Undirected neighbour sets keyed by node."""
        adj = {n: set() for n in self.nodes}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def degree(self, node: int) -> int:
        """Number of distinct neighbours, ignoring direction."""
        return len({b if a == node else a for a, b in self.edges if node in (a, b)})

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "num_qubits": self.num_qubits,
            "nodes": list(self.nodes),
            "edges": [list(e) for e in sorted(self.edges)],
            "node_ops": {str(n): dict(sorted(self.node_ops.get(n, Counter()).items()))
                         for n in self.nodes},
            "edge_ops": [{"edge": list(e), "ops": dict(sorted(self.edge_ops[e].items()))}
                         for e in sorted(self.edge_ops)],
        }


def build_interaction_graph(circuit: QuantumCircuit, mode: str = "loose") -> InteractionGraph:
    """Collect the interaction graph of a routed circuit.

    Barriers are ignored.  Every other one-qubit instruction (gates, measure,
    reset) is tallied on its node; two-qubit gates become edges, deduplicated
    as undirected pairs in loose mode and kept with their orientation in
    strict mode.
    """
    check_mode(mode)
    node_ops: dict[int, Counter] = {}
    edge_ops: dict[tuple[int, int], Counter] = {}
    for inst in circuit.instructions:
        if inst.kind == "barrier":
            continue
        for q in inst.qubits:
            node_ops.setdefault(q, Counter())
        if len(inst.qubits) == 1:
            node_ops[inst.qubits[0]][inst.name] += 1
        else:
            a, b = inst.qubits
            key = (a, b) if mode == "strict" else (min(a, b), max(a, b))
            edge_ops.setdefault(key, Counter())[inst.name] += 1
    return InteractionGraph(
        num_qubits=circuit.num_qubits,
        nodes=tuple(sorted(node_ops)),
        edges=frozenset(edge_ops),
        mode=mode,
        node_ops=node_ops,
        edge_ops=edge_ops,
    )
