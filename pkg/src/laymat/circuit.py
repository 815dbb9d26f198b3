"""Routed quantum circuits: in-memory model, QASM-subset parser and serializers.

Circuits handled here are post-routing, i.e. already written in a device's
native basis with every two-qubit gate on a coupling-map edge.  Only a small
OpenQASM 2 subset is accepted:

    OPENQASM 2.0;            (optional)
    include "qelib1.inc";    (ignored)
    qreg q[n];  creg c[m];
    <gate>(<params>) q[i], q[j];
    measure q[i] -> c[j];
    reset q[i];
    barrier q[i], q[j];  /  barrier q;

Classical control (``if``) and custom ``gate`` definitions are rejected.
"""

from __future__ import annotations

import ast
import json
import math
import operator
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "CircuitError",
    "CircuitParseError",
    "GateRegistry",
    "DEFAULT_REGISTRY",
    "Instruction",
    "QuantumCircuit",
    "parse_circuit",
    "serialize_circuit",
    "circuit_from_json",
    "circuit_to_json",
    "load_circuit",
    "from_gates",
]

NON_UNITARY = ("measure", "reset", "barrier")


class CircuitError(ValueError):
    """Raised when a circuit violates a structural invariant."""


class CircuitParseError(CircuitError):
    """Syntax or semantic error while reading circuit text."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class GateRegistry:
    """Name -> arity table for the gates a circuit may use.

    The default table covers the usual native bases (IBM ``rz/sx/x/cx/ecr``
    and the common ``qelib1`` one- and two-qubit gates).  Extra gates can be
    added with :meth:`register` or by building a registry from a mapping.
    """

    _DEFAULTS = {
        **{g: 1 for g in ("id", "x", "y", "z", "h", "s", "sdg", "t", "tdg", "sx", "sxdg",
                          "rx", "ry", "rz", "p", "u", "u1", "u2", "u3")},
        **{g: 2 for g in ("cx", "cy", "cz", "ch", "cp", "crx", "cry", "crz", "cu1",
                          "swap", "ecr", "iswap", "rxx", "ryy", "rzz", "rzx")},
    }

    def __init__(self, arities: dict[str, int] | None = None, include_defaults: bool = True):
        self._arity: dict[str, int] = dict(self._DEFAULTS) if include_defaults else {}
        for name, arity in (arities or {}).items():
            self.register(name, arity)

    def register(self, name: str, arity: int) -> None:
        if arity not in (1, 2):
            raise ValueError(f"gate {name!r}: only one- and two-qubit gates are supported")
        if name in NON_UNITARY:
            raise ValueError(f"{name!r} is a reserved instruction name")
        self._arity[name] = arity

    def arity(self, name: str) -> int:
        try:
            return self._arity[name]
        except KeyError:
            raise CircuitError(f"unknown gate {name!r}") from None

    def __contains__(self, name: object) -> bool:
        return name in self._arity

    def names(self, arity: int | None = None) -> list[str]:
        return sorted(n for n, a in self._arity.items() if arity is None or a == arity)


DEFAULT_REGISTRY = GateRegistry()


@dataclass(frozen=True)
class Instruction:
    """A single circuit operation over virtual qubits."""

    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    clbits: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "clbits", tuple(int(c) for c in self.clbits))
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{self.name}: repeated qubit in {self.qubits}")
        if not self.qubits:
            raise CircuitError(f"{self.name}: no qubits")
        if self.name == "barrier" and self.params:
            raise CircuitError("barrier takes no parameters")
        if self.name == "measure" and (len(self.qubits) != 1 or len(self.clbits) != 1):
            raise CircuitError("measure needs exactly one qubit and one clbit")
        if self.name != "measure" and self.clbits:
            raise CircuitError(f"{self.name}: only measure writes classical bits")

    @property
    def kind(self) -> str:
        return self.name if self.name in NON_UNITARY else "gate"


@dataclass(frozen=True)
class QuantumCircuit:
    """Immutable ordered instruction list over ``num_qubits`` virtual qubits."""

    num_qubits: int
    instructions: tuple[Instruction, ...] = ()
    num_clbits: int = 0
    registry: GateRegistry = field(default=DEFAULT_REGISTRY, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if self.num_qubits < 0 or self.num_clbits < 0:
            raise CircuitError("register sizes must be non-negative")
        for inst in self.instructions:
            if inst.kind == "gate" and self.registry.arity(inst.name) != len(inst.qubits):
                raise CircuitError(
                    f"{inst.name} expects {self.registry.arity(inst.name)} qubit(s), "
                    f"got {len(inst.qubits)}"
                )
            if inst.kind in ("measure", "reset") and len(inst.qubits) != 1:
                raise CircuitError(f"{inst.name} acts on exactly one qubit")
            for q in inst.qubits:
                if not 0 <= q < self.num_qubits:
                    raise CircuitError(f"{inst.name}: qubit {q} out of range [0, {self.num_qubits})")
            for c in inst.clbits:
                if not 0 <= c < self.num_clbits:
                    raise CircuitError(f"{inst.name}: clbit {c} out of range [0, {self.num_clbits})")

    @property
    def basis(self) -> frozenset[str]:
        return frozenset(i.name for i in self.instructions if i.kind == "gate")

    def active_qubits(self) -> list[int]:
        """Qubits touched by at least one non-barrier instruction, ascending."""
        seen = {q for i in self.instructions if i.kind != "barrier" for q in i.qubits}
        return sorted(seen)

    def without_barriers(self) -> "QuantumCircuit":
        return QuantumCircuit(
            self.num_qubits,
            [i for i in self.instructions if i.kind != "barrier"],
            self.num_clbits,
            self.registry,
        )

    def __len__(self) -> int:
        return len(self.instructions)


# ---------------------------------------------------------------------------
# parameter expressions

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
          "ln": math.log, "sqrt": math.sqrt}


def _eval_param(text: str) -> float:
    try:
        tree = ast.parse(text.strip().replace("^", "**"), mode="eval")
    except SyntaxError:
        raise CircuitError(f"bad parameter expression {text!r}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise CircuitError(f"unsupported parameter expression {text!r}")

    return ev(tree)


def _split_top_level(text: str, sep: str = ",") -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p.strip() for p in parts]


# ---------------------------------------------------------------------------
# QASM subset parser

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_RE_HEADER = re.compile(r"OPENQASM\s+2(\.0)?$")
_RE_INCLUDE = re.compile(r'include\s+"[^"]*"$')
_RE_REG = re.compile(rf"(qreg|creg)\s+({_IDENT})\s*\[\s*(\d+)\s*\]$")
_RE_MEASURE = re.compile(rf"measure\s+(.+?)\s*->\s*(.+)$")
_RE_GATE = re.compile(rf"({_IDENT})\s*(?:\((.*)\))?\s*(.*)$", re.S)
_RE_ARG = re.compile(rf"({_IDENT})\s*(?:\[\s*(\d+)\s*\])?$")


def _strip_comments(text: str) -> str:
    # keep offsets stable so error columns stay meaningful
    return re.sub(r"//[^\n]*", lambda m: " " * len(m.group(0)), text)


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


class _Registers:
    def __init__(self):
        self.q: dict[str, tuple[int, int]] = {}
        self.c: dict[str, tuple[int, int]] = {}
        self.nq = 0
        self.nc = 0

    def declare(self, kind: str, name: str, size: int):
        table = self.q if kind == "qreg" else self.c
        if name in self.q or name in self.c:
            raise CircuitError(f"register {name!r} declared twice")
        if kind == "qreg":
            table[name] = (self.nq, size)
            self.nq += size
        else:
            table[name] = (self.nc, size)
            self.nc += size

    def resolve(self, arg: str, quantum: bool) -> list[int]:
        m = _RE_ARG.match(arg)
        if not m:
            raise CircuitError(f"bad argument {arg!r}")
        table = self.q if quantum else self.c
        name, idx = m.group(1), m.group(2)
        if name not in table:
            kind = "quantum" if quantum else "classical"
            raise CircuitError(f"unknown {kind} register {name!r}")
        base, size = table[name]
        if idx is None:
            return list(range(base, base + size))
        if int(idx) >= size:
            raise CircuitError(f"index {name}[{idx}] out of range (size {size})")
        return [base + int(idx)]


def parse_circuit(text: str, registry: GateRegistry = DEFAULT_REGISTRY) -> QuantumCircuit:
    """Parse QASM-subset source into a :class:`QuantumCircuit`.

    Raises :class:`CircuitParseError` carrying the 1-based line/column of the
    offending statement.
    """
    clean = _strip_comments(text)
    regs = _Registers()
    instructions: list[Instruction] = []
    first = True
    for m in re.finditer(r"[^;]*;|[^;]+$", clean):
        raw = m.group(0)
        stmt = raw.rstrip(";").strip()
        start = m.start() + (len(raw) - len(raw.lstrip()))
        if not stmt:
            continue
        if not raw.endswith(";"):
            raise CircuitParseError("missing ';'", *_position(clean, start))
        try:
            _parse_statement(stmt, regs, instructions, registry, first)
        except CircuitParseError:
            raise
        except CircuitError as exc:
            raise CircuitParseError(str(exc), *_position(clean, start)) from None
        first = False
    try:
        return QuantumCircuit(regs.nq, instructions, regs.nc, registry)
    except CircuitError as exc:
        raise CircuitParseError(str(exc)) from None


def _parse_statement(stmt, regs, out, registry, first):
    stmt = " ".join(stmt.split())
    if _RE_HEADER.match(stmt):
        if not first:
            raise CircuitError("OPENQASM header must come first")
        return
    if _RE_INCLUDE.match(stmt):
        return
    if stmt.startswith("if") and re.match(r"if\s*\(", stmt):
        raise CircuitError("classical control flow is not supported")
    if re.match(r"(gate|opaque)\s", stmt):
        raise CircuitError("custom gate definitions are not supported")
    m = _RE_REG.match(stmt)
    if m:
        regs.declare(m.group(1), m.group(2), int(m.group(3)))
        return
    m = _RE_MEASURE.match(stmt)
    if m:
        qs = regs.resolve(m.group(1).strip(), True)
        cs = regs.resolve(m.group(2).strip(), False)
        if len(qs) != len(cs):
            raise CircuitError("measure register sizes differ")
        out.extend(Instruction("measure", (q,), clbits=(c,)) for q, c in zip(qs, cs))
        return
    m = _RE_GATE.match(stmt)
    if not m:
        raise CircuitError(f"cannot parse statement {stmt!r}")
    name, ptext, atext = m.group(1), m.group(2), m.group(3).strip()
    if not atext:
        raise CircuitError(f"{name}: missing qubit arguments")
    args = [regs.resolve(a, True) for a in _split_top_level(atext)]
    if name == "barrier":
        if ptext is not None:
            raise CircuitError("barrier takes no parameters")
        qubits = [q for a in args for q in a]
        out.append(Instruction("barrier", tuple(dict.fromkeys(qubits))))
        return
    if name == "reset":
        out.extend(Instruction("reset", (q,)) for a in args for q in a)
        return
    if name not in registry:
        raise CircuitError(f"unknown gate {name!r}")
    arity = registry.arity(name)
    if len(args) != arity:
        raise CircuitError(f"{name} expects {arity} qubit argument(s), got {len(args)}")
    params = tuple(_eval_param(p) for p in _split_top_level(ptext)) if ptext and ptext.strip() else ()
    if arity == 1 and len(args[0]) > 1:
        out.extend(Instruction(name, (q,), params) for q in args[0])
        return
    if any(len(a) != 1 for a in args):
        raise CircuitError(f"{name}: register broadcast is only supported for one-qubit gates")
    out.append(Instruction(name, tuple(a[0] for a in args), params))


# ---------------------------------------------------------------------------
# serializers

def _qasm(circuit: QuantumCircuit) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    if circuit.num_qubits:
        lines.append(f"qreg q[{circuit.num_qubits}];")
    if circuit.num_clbits:
        lines.append(f"creg c[{circuit.num_clbits}];")
    for inst in circuit.instructions:
        qargs = ",".join(f"q[{q}]" for q in inst.qubits)
        if inst.name == "measure":
            lines.append(f"measure q[{inst.qubits[0]}] -> c[{inst.clbits[0]}];")
        elif inst.params:
            ps = ",".join(repr(p) for p in inst.params)
            lines.append(f"{inst.name}({ps}) {qargs};")
        else:
            lines.append(f"{inst.name} {qargs};")
    return "\n".join(lines) + "\n"


def circuit_to_json(circuit: QuantumCircuit) -> dict:
    insts = []
    for inst in circuit.instructions:
        d = {"name": inst.name, "qubits": list(inst.qubits), "params": list(inst.params)}
        if inst.clbits:
            d["clbits"] = list(inst.clbits)
        insts.append(d)
    return {"num_qubits": circuit.num_qubits, "num_clbits": circuit.num_clbits,
            "instructions": insts}


def circuit_from_json(data: dict | str, registry: GateRegistry = DEFAULT_REGISTRY) -> QuantumCircuit:
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise CircuitParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    try:
        nq = data["num_qubits"]
        raw = data.get("instructions", [])
        insts = []
        for d in raw:
            name = d["name"]
            if name not in NON_UNITARY and name not in registry:
                raise CircuitError(f"unknown gate {name!r}")
            insts.append(Instruction(name, d["qubits"], d.get("params", ()), d.get("clbits", ())))
        return QuantumCircuit(int(nq), insts, int(data.get("num_clbits", 0)), registry)
    except (KeyError, TypeError) as exc:
        raise CircuitParseError(f"circuit JSON schema violation: {exc}") from None


def serialize_circuit(circuit: QuantumCircuit, format: str = "qasm") -> str:
    """Render ``circuit`` as QASM-subset text or JSON."""
    if format == "qasm":
        return _qasm(circuit)
    if format == "json":
        return json.dumps(circuit_to_json(circuit), indent=2) + "\n"
    raise ValueError(f"unknown circuit format {format!r}")


def load_circuit(text: str, registry: GateRegistry = DEFAULT_REGISTRY) -> QuantumCircuit:
    """Parse either format, sniffing JSON by its leading brace."""
    if text.lstrip().startswith("{"):
        return circuit_from_json(text, registry)
    return parse_circuit(text, registry)


def from_gates(num_qubits: int, gates: Iterable[Sequence], num_clbits: int = 0) -> QuantumCircuit:
    """Shorthand builder: ``from_gates(2, [("h", 0), ("cx", 0, 1), ("measure", 0, 0)])``.

    For ``measure`` the trailing integer is the clbit.  Parameters go in a
    tuple right after the name: ``("rz", (0.5,), 0)``.
    """
    insts = []
    for g in gates:
        name, rest = g[0], list(g[1:])
        params = ()
        if rest and isinstance(rest[0], (tuple, list)):
            params = tuple(rest.pop(0))
        if name == "measure":
            insts.append(Instruction("measure", (rest[0],), clbits=(rest[1],)))
        else:
            insts.append(Instruction(name, tuple(rest), params))
    return QuantumCircuit(num_qubits, insts, num_clbits)
