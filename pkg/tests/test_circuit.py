import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from laymat.circuit import (CircuitError, CircuitParseError, GateRegistry, Instruction,
                            QuantumCircuit, circuit_from_json, from_gates, load_circuit,
                            parse_circuit, serialize_circuit)
from laymat.generate import random_circuit
from laymat.interaction import build_interaction_graph
from laymat.topology import nairobi

from .oracles import hand_ghz_on_nairobi


def test_minimal_program():
    c = parse_circuit("qreg q[2]; cx q[0],q[1];")
    assert c.num_qubits == 2
    assert c.instructions == (Instruction("cx", (0, 1)),)


def test_single_qubit_path():
    c = parse_circuit("qreg q[1]; creg c[1]; h q[0]; measure q[0] -> c[0];")
    assert len(c) == 2
    assert c.instructions[1].kind == "measure"
    assert c.instructions[1].clbits == (0,)


def test_hand_routed_ghz_uses_coupling_edges():
    c = parse_circuit(hand_ghz_on_nairobi())
    edges = nairobi().edges
    two_q = [i for i in c.instructions if i.kind == "gate" and len(i.qubits) == 2]
    assert len(two_q) == 2
    assert all(i.qubits in edges for i in two_q)
    assert c.instructions[0].params == (pytest.approx(math.pi / 2),)


def test_whitespace_and_comments():
    src = """
    // leading comment
    OPENQASM 2.0;
    qreg   q [ 3 ] ;   creg c[3];
    rz( -pi / 4 )   q[2];  // trailing
    cx q[2] , q[0];
    """
    c = parse_circuit(src)
    assert [i.name for i in c.instructions] == ["rz", "cx"]
    assert c.instructions[0].params[0] == -math.pi / 4


@pytest.mark.parametrize("src, fragment, line", [
    ("qreg q[2];\ncx q[0],q[2];", "out of range", 2),
    ("qreg q[2];\nfoo q[0];", "unknown gate", 2),
    ("qreg q[2];\ncx q[0];", "expects 2", 2),
    ("qreg q[2];\n\nh q[0]", "missing ';'", 3),
    ("qreg q[1];\ncreg c[1];\nif (c==1) x q[0];", "control flow", 3),
    ("qreg q[1];\ngate foo a { x a; }", "custom gate", 2),
    ("qreg q[2];\ncx q[0],q[0];", "repeated qubit", 2),
])
def test_parse_errors_carry_position(src, fragment, line):
    with pytest.raises(CircuitParseError) as info:
        parse_circuit(src)
    assert fragment in str(info.value)
    assert info.value.line == line
    assert info.value.column is not None


def test_register_broadcast_and_barrier():
    c = parse_circuit("qreg q[3]; creg c[3]; h q; barrier q; measure q -> c;")
    names = [i.name for i in c.instructions]
    assert names == ["h"] * 3 + ["barrier"] + ["measure"] * 3
    assert c.instructions[3].qubits == (0, 1, 2)


def test_multiple_registers_are_flattened():
    c = parse_circuit("qreg a[2]; qreg b[2]; cx a[1],b[0];")
    assert c.instructions[0].qubits == (1, 2)


def test_empty_circuit_serializes_to_header_only():
    text = serialize_circuit(QuantumCircuit(0))
    assert text == 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'
    assert parse_circuit(text) == QuantumCircuit(0)


def test_one_instruction_round_trip():
    c = from_gates(2, [("cx", 1, 0)])
    assert parse_circuit(serialize_circuit(c)) == c
    assert circuit_from_json(serialize_circuit(c, "json")) == c


@pytest.mark.parametrize("seed", range(5))
def test_random_200_instruction_round_trip_is_bit_identical(seed):
    c = random_circuit(6, 200, np.random.default_rng(seed))
    text = serialize_circuit(c)
    again = parse_circuit(text)
    assert again == c
    assert serialize_circuit(again) == text
    js = serialize_circuit(c, "json")
    assert serialize_circuit(load_circuit(js), "json") == js


angles = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def circuits(draw):
    n = draw(st.integers(1, 5))
    insts = []
    for _ in range(draw(st.integers(0, 25))):
        kind = draw(st.sampled_from(["rz", "sx", "cx", "measure", "reset", "barrier"]))
        if kind == "cx" and n >= 2:
            a, b = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
            insts.append(Instruction("cx", (a, b)))
        elif kind == "rz":
            insts.append(Instruction("rz", (draw(st.integers(0, n - 1)),), (draw(angles),)))
        elif kind == "measure":
            q = draw(st.integers(0, n - 1))
            insts.append(Instruction("measure", (q,), clbits=(q,)))
        elif kind == "barrier":
            qs = draw(st.lists(st.integers(0, n - 1), min_size=1, unique=True))
            insts.append(Instruction("barrier", tuple(qs)))
        else:
            insts.append(Instruction(kind if kind != "cx" else "sx", (draw(st.integers(0, n - 1)),)))
    return QuantumCircuit(n, insts, n)


@given(circuits())
def test_round_trip_property(c):
    assert parse_circuit(serialize_circuit(c, "qasm")) == c
    assert load_circuit(serialize_circuit(c, "json")) == c


@given(circuits())
def test_barriers_do_not_change_interaction_graph(c):
    for mode in ("loose", "strict"):
        a = build_interaction_graph(c, mode)
        b = build_interaction_graph(c.without_barriers(), mode)
        assert (a.nodes, a.edges) == (b.nodes, b.edges)


def test_instruction_invariants():
    with pytest.raises(CircuitError):
        Instruction("barrier", (0,), (1.0,))
    with pytest.raises(CircuitError):
        Instruction("x", (0,), clbits=(0,))
    with pytest.raises(CircuitError):
        QuantumCircuit(2, [Instruction("cx", (0,))])
    with pytest.raises(CircuitError):
        QuantumCircuit(1, [Instruction("measure", (0,), clbits=(3,))], 1)


def test_registry_is_extensible():
    reg = GateRegistry()
    reg.register("fsim", 2)
    c = parse_circuit("qreg q[2]; fsim(0.1, 0.2) q[0],q[1];", reg)
    assert c.instructions[0].params == (0.1, 0.2)
    with pytest.raises(CircuitParseError):
        parse_circuit("qreg q[2]; fsim q[0],q[1];")


def test_basis_and_active_qubits():
    c = from_gates(4, [("h", 0), ("cx", 0, 2), ("measure", 2, 0)], 1)
    assert c.basis == {"h", "cx"}
    assert c.active_qubits() == [0, 2]


def test_json_schema_violation():
    with pytest.raises(CircuitParseError):
        circuit_from_json('{"instructions": []}')
    with pytest.raises(CircuitError):
        circuit_from_json({"num_qubits": 1, "instructions": [{"name": "nope", "qubits": [0]}]})
