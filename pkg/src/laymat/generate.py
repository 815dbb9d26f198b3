"""Random circuits for tests and benchmarks."""

from __future__ import annotations

import math

import numpy as np

from .circuit import Instruction, QuantumCircuit
from .topology import CouplingMap

__all__ = ["random_circuit", "random_region", "random_routed_circuit", "inverse", "mirror"]

_ONE_Q = ("rz", "sx", "x")

_SELF_INVERSE = {"x", "y", "z", "h", "id", "cx", "cy", "cz", "ch", "swap"}
_DAGGER = {"s": "sdg", "sdg": "s", "t": "tdg", "tdg": "t", "sx": "sxdg", "sxdg": "sx"}
_NEGATE = {"rz", "rx", "ry", "p", "u1", "cp", "cu1", "crx", "cry", "crz", "rxx", "ryy", "rzz", "rzx"}


def inverse(inst: Instruction) -> Instruction:
    """Inverse of a unitary instruction (same qubits)."""
    if inst.name in _SELF_INVERSE:
        return inst
    if inst.name in _DAGGER:
        return Instruction(_DAGGER[inst.name], inst.qubits)
    if inst.name in _NEGATE:
        return Instruction(inst.name, inst.qubits, tuple(-x for x in inst.params))
    if inst.name in ("u3", "u"):
        t, p, l = inst.params
        return Instruction(inst.name, inst.qubits, (-t, -l, -p))
    raise ValueError(f"no inverse known for {inst.name!r}")


def mirror(circuit: QuantumCircuit) -> QuantumCircuit:
    """``U`` followed by ``U^-1``, then every qubit measured into its own clbit.

    The ideal output is the all-zeros bitstring, which makes the result a
    sensitive probe of accumulated error.  Input must be measurement-free
    apart from terminal measures, which are dropped.
    """
    body = [i for i in circuit.instructions if i.kind != "measure"]
    if any(i.kind != "gate" for i in body):
        raise ValueError("mirror needs a circuit of unitary gates")
    insts = body + [inverse(i) for i in reversed(body)]
    insts += [Instruction("measure", (q,), clbits=(q,)) for q in circuit.active_qubits()]
    return QuantumCircuit(circuit.num_qubits, insts, circuit.num_qubits, circuit.registry)


def random_circuit(num_qubits: int, num_instructions: int, rng: np.random.Generator,
                   num_clbits: int | None = None, barriers: bool = True) -> QuantumCircuit:
    """Unstructured random circuit over the default gate names (no routing implied)."""
    num_clbits = num_qubits if num_clbits is None else num_clbits
    names_1q = ("h", "x", "sx", "rz", "u3", "t")
    insts = []
    for _ in range(num_instructions):
        roll = rng.random()
        if roll < 0.35 and num_qubits >= 2:
            a, b = rng.choice(num_qubits, 2, replace=False)
            insts.append(Instruction(str(rng.choice(("cx", "cz", "ecr"))), (int(a), int(b))))
        elif roll < 0.8 or num_qubits == 0:
            name = str(rng.choice(names_1q))
            nparams = {"rz": 1, "u3": 3}.get(name, 0)
            params = tuple(float(x) for x in rng.uniform(-math.pi, math.pi, nparams))
            insts.append(Instruction(name, (int(rng.integers(num_qubits)),), params))
        elif roll < 0.9 and num_clbits:
            insts.append(Instruction("measure", (int(rng.integers(num_qubits)),),
                                     clbits=(int(rng.integers(num_clbits)),)))
        elif roll < 0.95 or not barriers:
            insts.append(Instruction("reset", (int(rng.integers(num_qubits)),)))
        else:
            k = int(rng.integers(1, num_qubits + 1))
            qs = rng.choice(num_qubits, k, replace=False)
            insts.append(Instruction("barrier", tuple(int(q) for q in qs)))
    return QuantumCircuit(num_qubits, insts, num_clbits)


def random_region(cm: CouplingMap, size: int, rng: np.random.Generator) -> list[int]:
    """A connected set of ``size`` physical qubits grown from a random seed."""
    if size > cm.num_qubits:
        raise ValueError("region larger than device")
    for _ in range(100):
        start = int(rng.integers(cm.num_qubits))
        region = [start]
        members = {start}
        frontier = set(cm.neighbors[start])
        while len(region) < size and frontier:
            pick = int(rng.choice(sorted(frontier)))
            region.append(pick)
            members.add(pick)
            frontier.discard(pick)
            frontier.update(w for w in cm.neighbors[pick] if w not in members)
        if len(region) == size:
            return region
    raise ValueError(f"no connected region of {size} qubits found")


def random_routed_circuit(
    cm: CouplingMap,
    width: int,
    depth: int,
    rng: np.random.Generator,
    measure: bool = True,
    one_qubit_gates: tuple[str, ...] = _ONE_Q,
    relabel: bool = True,
) -> tuple[QuantumCircuit, list[int]]:
    """A fixed-depth random circuit already routed onto a region of ``cm``.

    Each layer puts a random one-qubit gate on every qubit and ``cx`` on a
    random matching of the region's directed edges.  Layers are followed by
    ``cx`` gates on spanning-tree edges only where needed to keep the
    interaction graph connected.  Returns the circuit over ``width`` virtual
    qubits and the physical qubit each virtual qubit was routed to.
    """
    region = random_region(cm, width, rng)
    perm = list(rng.permutation(width)) if relabel else list(range(width))
    virt = {p: int(perm[i]) for i, p in enumerate(region)}
    local_edges = sorted((a, b) for a, b in cm.edges if a in virt and b in virt)
    insts: list[Instruction] = []
    parent = {q: q for q in region}

    def find(q):
        while parent[q] != q:
            parent[q] = parent[parent[q]]
            q = parent[q]
        return q

    for _ in range(depth):
        for p in region:
            name = str(rng.choice(one_qubit_gates))
            params = (float(rng.uniform(-math.pi, math.pi)),) if name in ("rz", "rx", "ry", "p") else ()
            insts.append(Instruction(name, (virt[p],), params))
        busy: set[int] = set()
        for idx in rng.permutation(len(local_edges)):
            a, b = local_edges[idx]
            if a in busy or b in busy or rng.random() < 0.5:
                continue
            busy.update((a, b))
            insts.append(Instruction("cx", (virt[a], virt[b])))
            parent[find(a)] = find(b)
    for a, b in local_edges:
        if find(a) != find(b):
            insts.append(Instruction("cx", (virt[a], virt[b])))
            parent[find(a)] = find(b)
    if measure:
        insts.extend(Instruction("measure", (virt[p],), clbits=(virt[p],)) for p in region)
    routed = [0] * width
    for p, v in virt.items():
        routed[v] = p
    return QuantumCircuit(width, insts, width if measure else 0), routed
