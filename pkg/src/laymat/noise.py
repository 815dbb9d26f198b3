"""Small stochastic simulator used to check that low scores mean high fidelity.

Each trajectory runs the circuit ideally on a dense state vector; after every
instruction with error probability ``e`` a uniformly random non-identity
Pauli hits its qubits with probability ``e``.  Readout flips are applied to
the output distribution as independent bit-flip channels.  The fidelity is
the Bhattacharyya overlap ``sum_x sqrt(p_ideal(x) p_noisy(x))`` between the
ideal and the trajectory-averaged output distributions.

Trajectories are drawn in fixed-size blocks, each with its own child seed,
so estimates depend only on the seed and never on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .calibration import ErrorMap
from .circuit import QuantumCircuit

__all__ = ["NoiseModel", "FidelityEstimate", "simulate_fidelity", "gate_matrix",
           "hellinger_fidelity", "MAX_QUBITS"]

MAX_QUBITS = 10
BLOCK = 1000

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_PAULIS = (_I, _X, _Y, _Z)


def _rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def _rx(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _u3(t, p, l):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -np.exp(1j * l) * s],
                     [np.exp(1j * p) * s, np.exp(1j * (p + l)) * c]])


def _phase(t):
    return np.diag([1, np.exp(1j * t)])


def _controlled(u):
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = u
    return m


def _exp_pauli2(p, t):
    pp = np.kron(p, p)
    return math.cos(t / 2) * np.eye(4) - 1j * math.sin(t / 2) * pp


_SX = np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2
_S = np.diag([1, 1j])
_T = np.diag([1, np.exp(0.25j * math.pi)])

_FIXED = {
    "id": _I, "x": _X, "y": _Y, "z": _Z, "h": _H, "s": _S, "sdg": _S.conj().T,
    "t": _T, "tdg": _T.conj().T, "sx": _SX, "sxdg": _SX.conj().T,
    "cx": _controlled(_X), "cy": _controlled(_Y), "cz": _controlled(_Z), "ch": _controlled(_H),
    "swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
    "iswap": np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]]),
    "ecr": np.array([[0, 1, 0, 1j], [1, 0, -1j, 0], [0, 1j, 0, 1], [-1j, 0, 1, 0]]) / math.sqrt(2),
}
_PARAM = {
    "rz": lambda p: _rz(p[0]), "rx": lambda p: _rx(p[0]), "ry": lambda p: _ry(p[0]),
    "p": lambda p: _phase(p[0]), "u1": lambda p: _phase(p[0]),
    "u2": lambda p: _u3(math.pi / 2, p[0], p[1]), "u3": lambda p: _u3(*p[:3]),
    "u": lambda p: _u3(*p[:3]),
    "cp": lambda p: _controlled(_phase(p[0])), "cu1": lambda p: _controlled(_phase(p[0])),
    "crx": lambda p: _controlled(_rx(p[0])), "cry": lambda p: _controlled(_ry(p[0])),
    "crz": lambda p: _controlled(_rz(p[0])),
    "rxx": lambda p: _exp_pauli2(_X, p[0]), "ryy": lambda p: _exp_pauli2(_Y, p[0]),
    "rzz": lambda p: _exp_pauli2(_Z, p[0]),
    "rzx": lambda p: math.cos(p[0] / 2) * np.eye(4) - 1j * math.sin(p[0] / 2) * np.kron(_Z, _X),
}


def gate_matrix(name: str, params: tuple[float, ...] = ()) -> np.ndarray:
    """Unitary of ``name``; two-qubit matrices use the first qubit as the high bit."""
    if name in _FIXED:
        return _FIXED[name]
    if name in _PARAM:
        return np.asarray(_PARAM[name](params), dtype=complex)
    raise ValueError(f"no matrix for gate {name!r}")


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing + readout noise read off an :class:`ErrorMap`."""

    error_map: ErrorMap
    seed: int = 0

    def gate_error(self, name: str, qubits: tuple[int, ...]) -> float:
        return self.error_map.error(name, qubits)

    def readout_error(self, qubit: int) -> float:
        return self.error_map.readout[qubit]


@dataclass(frozen=True)
class FidelityEstimate:
    fidelity: float
    stderr: float
    shots: int


def hellinger_fidelity(p: np.ndarray, q: np.ndarray) -> float:
    """Bhattacharyya overlap of two distributions, clipped to [0, 1]."""
    if p.shape == q.shape and np.array_equal(p, q):
        return 1.0
    return float(min(1.0, max(0.0, np.sum(np.sqrt(p * q)))))


class _Program:
    def __init__(self, circuit: QuantumCircuit, noise: NoiseModel):
        active = circuit.active_qubits()
        if len(active) > MAX_QUBITS:
            raise ValueError(f"noise oracle handles at most {MAX_QUBITS} active qubits, got {len(active)}")
        local = {q: i for i, q in enumerate(active)}
        self.n = len(active)
        self.ops: list[tuple[np.ndarray | None, tuple[int, ...], float]] = []
        measured: dict[int, int] = {}  # clbit -> local qubit
        readout: dict[int, float] = {}
        touched: set[int] = set()
        done: set[int] = set()
        for inst in circuit.instructions:
            if inst.kind == "barrier":
                continue
            qs = tuple(local[q] for q in inst.qubits)
            if any(q in done for q in qs):
                raise ValueError("noise oracle only supports terminal measurements")
            if inst.kind == "measure":
                if inst.clbits[0] in measured:
                    raise ValueError(f"clbit {inst.clbits[0]} written twice")
                measured[inst.clbits[0]] = qs[0]
                readout[inst.clbits[0]] = noise.readout_error(inst.qubits[0])
                done.add(qs[0])
                continue
            err = noise.gate_error(inst.name, inst.qubits)
            if inst.kind == "reset":
                if qs[0] in touched:
                    raise ValueError("noise oracle only supports reset on fresh qubits")
                self.ops.append((None, qs, err))
            else:
                self.ops.append((gate_matrix(inst.name, inst.params), qs, err))
            touched.update(qs)
        if not measured:
            raise ValueError("circuit has no measurements")
        self.clbits = sorted(measured)
        self.meas_axes = [measured[c] for c in self.clbits]
        self.readout = np.array([readout[c] for c in self.clbits])
        self.errors = np.array([e for _, _, e in self.ops])
        self.arity = np.array([len(q) for _, q, _ in self.ops])
        self._prefix = self._ideal_prefix()
        self.ideal = self._distribution(self._prefix[-1])

    def _apply(self, psi, u, qs):
        k = len(qs)
        u = u.reshape((2,) * (2 * k))
        psi = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), list(qs)))
        return np.moveaxis(psi, list(range(k)), list(qs))

    def _apply_pauli(self, psi, qs, pid):
        # pid in 1 .. 4^k - 1, base-4 digits per qubit (first qubit high)
        for j, q in enumerate(qs):
            d = (pid >> (2 * (len(qs) - 1 - j))) & 3
            if d:
                psi = self._apply(psi, _PAULIS[d], (q,))
        return psi

    def _ideal_prefix(self):
        psi = np.zeros((2,) * self.n, dtype=complex)
        psi[(0,) * self.n] = 1.0
        states = [psi]
        for u, qs, _ in self.ops:
            if u is not None:
                psi = self._apply(psi, u, qs)
            states.append(psi)
        return states

    def run(self, pattern: tuple[tuple[int, int], ...]) -> np.ndarray:
        if not pattern:
            return self.ideal
        first = pattern[0][0]
        psi = self._prefix[first + 1]
        errs = dict(pattern)
        for i in range(first, len(self.ops)):
            u, qs, _ = self.ops[i]
            if i > first and u is not None:
                psi = self._apply(psi, u, qs)
            if i in errs:
                psi = self._apply_pauli(psi, qs, errs[i])
        return self._distribution(psi)

    def _distribution(self, psi) -> np.ndarray:
        probs = np.abs(psi) ** 2
        others = tuple(a for a in range(self.n) if a not in self.meas_axes)
        if others:
            probs = probs.sum(axis=others)
        kept = [a for a in range(self.n) if a in self.meas_axes]
        probs = np.moveaxis(probs, [kept.index(a) for a in self.meas_axes], list(range(len(kept))))
        return probs.reshape(-1)

    def with_readout(self, dist: np.ndarray) -> np.ndarray:
        m = len(self.meas_axes)
        d = dist.reshape((2,) * m)
        for axis, r in enumerate(self.readout):
            if r:
                d = (1 - r) * d + r * np.flip(d, axis=axis)
        return d.reshape(-1)


def _block(prog: _Program, seed_seq: np.random.SeedSequence, shots: int,
           cache: dict) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    n_ops = len(prog.ops)
    hits = rng.random((shots, n_ops)) < prog.errors
    pids = rng.integers(1, 4 ** prog.arity, size=(shots, n_ops)) if n_ops else np.zeros((shots, 0), int)
    counts: dict[tuple, int] = {}
    for row_hits, row_pids in zip(hits, pids):
        idx = np.flatnonzero(row_hits)
        key = tuple((int(i), int(row_pids[i])) for i in idx)
        counts[key] = counts.get(key, 0) + 1
    acc = np.zeros_like(prog.ideal)
    for key in sorted(counts):
        dist = cache.get(key)
        if dist is None:
            dist = prog.run(key)
            cache[key] = dist
        acc += counts[key] * dist
    return acc / shots


def simulate_fidelity(circuit: QuantumCircuit, noise: NoiseModel, shots: int = 10_000,
                      workers: int = 1) -> FidelityEstimate:
    """Estimate the output fidelity of ``circuit`` (physical qubits) under ``noise``."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    prog = _Program(circuit, noise)
    sizes = [BLOCK] * (shots // BLOCK) + ([shots % BLOCK] if shots % BLOCK else [])
    seqs = np.random.SeedSequence(noise.seed).spawn(len(sizes))
    cache: dict = {}
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda a: _block(prog, a[0], a[1], {}), zip(seqs, sizes)))
    else:
        blocks = [_block(prog, s, n, cache) for s, n in zip(seqs, sizes)]
    noisy = sum(b * n for b, n in zip(blocks, sizes)) / shots
    ideal = prog.ideal
    fid = hellinger_fidelity(ideal, prog.with_readout(noisy))
    if len(blocks) > 1:
        per = [hellinger_fidelity(ideal, prog.with_readout(b)) for b in blocks]
        stderr = float(np.std(per, ddof=1) / math.sqrt(len(per)))
    else:
        stderr = 0.0
    return FidelityEstimate(fid, stderr, shots)
