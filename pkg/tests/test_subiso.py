import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from networkx.algorithms import isomorphism

from laymat.circuit import Instruction, QuantumCircuit, from_gates
from laymat.interaction import build_interaction_graph
from laymat.subiso import (Layout, SearchBudget, find_embeddings, verify_layout,
                           vf2_node_order, vf2pp_node_order)
from laymat.topology import CouplingMap, heavy_hex, line, nairobi

from .oracles import brute_force_embeddings


def pattern_from_edges(n, edges, mode="loose", singles=()):
    gates = [("cx", a, b) for a, b in edges] + [("x", q) for q in singles]
    return build_interaction_graph(from_gates(n, gates), mode)


def oracle(pattern, target, mode):
    strict = mode == "strict"
    return brute_force_embeddings(
        pattern.nodes, pattern.edges, target.num_qubits, target.edges, strict,
        pattern.node_ops if strict else None, pattern.edge_ops if strict else None,
        target.supported_ops if strict and target.supported_ops is not None else None,
    )


def layout_set(result):
    return {lay.physical for lay in result.layouts}


def random_instance(rng, strict_ops=False):
    k = int(rng.integers(1, 6))
    n = int(rng.integers(k, 9))
    pairs = [p for p in itertools.permutations(range(k), 2)]
    pedges = [pairs[i] for i in np.flatnonzero(rng.random(len(pairs)) < 0.3)] if pairs else []
    singles = [q for q in range(k) if rng.random() < 0.5 or not any(q in e for e in pedges)]
    tpairs = list(itertools.permutations(range(n), 2))
    tedges = frozenset(tpairs[i] for i in np.flatnonzero(rng.random(len(tpairs)) < 0.35))
    ops = None
    if strict_ops:
        ops = {"cx": [e for e in tedges if rng.random() < 0.8],
               "x": [(q,) for q in range(n) if rng.random() < 0.8]}
    circ = QuantumCircuit(k, [Instruction("cx", e) for e in pedges] + [Instruction("x", (q,)) for q in singles])
    return circ, CouplingMap(n, tedges, ops)


# -- counting fixtures ----------------------------------------------------------

@pytest.mark.parametrize("ordering", ["vf2", "vf2pp"])
def test_single_edge_on_nairobi(ordering):
    res = find_embeddings(pattern_from_edges(2, [(0, 1)]), nairobi(), "loose", ordering)
    assert len(res) == 12
    assert res.exhausted


@pytest.mark.parametrize("ordering", ["vf2", "vf2pp"])
def test_three_path_on_nairobi(ordering):
    res = find_embeddings(pattern_from_edges(3, [(0, 1), (1, 2)]), nairobi(), "loose", ordering)
    assert len(res) == 14
    degrees = [len(nairobi().neighbors[v]) for v in range(7)]
    assert len(res) == 2 * sum(d * (d - 1) // 2 for d in degrees)


@pytest.mark.parametrize("cm", [nairobi(), heavy_hex(3), line(5)])
def test_self_embedding_includes_identity(cm):
    gates = [("cx", a, b) for a, b in sorted(cm.edges)]
    pattern = build_interaction_graph(from_gates(cm.num_qubits, gates), "strict")
    res = find_embeddings(pattern, cm, "strict")
    assert tuple(range(cm.num_qubits)) in layout_set(res)


def test_pigeonhole_returns_empty_exhausted():
    res = find_embeddings(pattern_from_edges(4, [(0, 1), (2, 3)]), line(3), "loose")
    assert res.layouts == [] and res.exhausted and res.visits_used == 0


def test_empty_pattern_has_one_empty_layout():
    res = find_embeddings(build_interaction_graph(QuantumCircuit(2)), line(2))
    assert res.layouts == [Layout((), ())]


def test_isolated_nodes_map_anywhere():
    res = find_embeddings(pattern_from_edges(2, [], singles=(0, 1)), line(3))
    assert len(res) == 6


def test_edgeless_target():
    res = find_embeddings(pattern_from_edges(2, [(0, 1)]), CouplingMap(4, frozenset()))
    assert res.layouts == [] and res.exhausted


def test_mode_mismatch_rejected():
    with pytest.raises(ValueError):
        find_embeddings(pattern_from_edges(2, [(0, 1)], "strict"), line(2), "loose")
    with pytest.raises(ValueError):
        find_embeddings(pattern_from_edges(2, [(0, 1)]), line(2), ordering="random")


# -- strict mode ---------------------------------------------------------------

def test_strict_respects_direction():
    cm = CouplingMap(3, frozenset({(0, 1), (1, 2)}))
    res = find_embeddings(pattern_from_edges(2, [(0, 1)], "strict"), cm, "strict")
    assert layout_set(res) == {(0, 1), (1, 2)}
    loose = find_embeddings(pattern_from_edges(2, [(0, 1)]), cm, "loose")
    assert layout_set(loose) == {(0, 1), (1, 0), (1, 2), (2, 1)}


def test_strict_checks_instruction_availability():
    cm = CouplingMap(3, frozenset({(0, 1), (1, 0), (1, 2), (2, 1)}),
                     {"cx": [(0, 1), (1, 2), (2, 1)], "x": [(1,), (2,)]})
    pattern = pattern_from_edges(2, [(0, 1)], "strict", singles=(0,))
    res = find_embeddings(pattern, cm, "strict")
    assert layout_set(res) == {(1, 2), (2, 1)}
    # loose mode ignores supported_ops
    loose = find_embeddings(pattern_from_edges(2, [(0, 1)], singles=(0,)), cm, "loose")
    assert len(loose) == 4


def test_strict_measure_needs_listing_when_ops_given():
    c = from_gates(1, [("measure", 0, 0)], 1)
    cm = CouplingMap(2, frozenset(), {"measure": [(1,)]})
    res = find_embeddings(build_interaction_graph(c, "strict"), cm, "strict")
    assert layout_set(res) == {(1,)}


# -- orderings -----------------------------------------------------------------

def test_vf2pp_star_center_first():
    star = pattern_from_edges(4, [(1, 0), (1, 2), (1, 3)])
    assert vf2pp_node_order(star)[0] == 1


def test_vf2pp_path_middle_first():
    assert vf2pp_node_order(pattern_from_edges(3, [(0, 1), (1, 2)]))[0] == 1


def test_vf2pp_disconnected_components_deterministic():
    g = pattern_from_edges(4, [(2, 3), (0, 1)])
    orders = {tuple(vf2pp_node_order(g)) for _ in range(100)}
    assert orders == {(0, 1, 2, 3)}


def test_vf2pp_layers_sorted_by_degree():
    # 0 is the hub; among its neighbours 3 has the larger degree
    g = pattern_from_edges(6, [(0, 1), (0, 2), (0, 3), (3, 4), (3, 5), (4, 5), (0, 5)])
    order = vf2pp_node_order(g)
    assert order[0] == 0
    assert order[1:5] == [3, 5, 1, 2]
    assert order[5] == 4


def test_vf2_order_is_connected_first():
    g = pattern_from_edges(5, [(4, 0), (0, 3), (1, 2)])
    assert vf2_node_order(g) == [0, 3, 4, 1, 2]


# -- oracle equivalence ----------------------------------------------------------

@pytest.mark.parametrize("seed", range(60))
@pytest.mark.parametrize("mode", ["loose", "strict"])
def test_matches_brute_force(seed, mode):
    rng = np.random.default_rng(seed)
    circ, target = random_instance(rng, strict_ops=(mode == "strict" and seed % 2 == 0))
    pattern = build_interaction_graph(circ, mode)
    want = oracle(pattern, target, mode)
    for ordering in ("vf2", "vf2pp"):
        res = find_embeddings(pattern, target, mode, ordering)
        got = [lay.physical for lay in res.layouts]
        assert len(got) == len(set(got))
        assert set(got) == want
        assert res.exhausted
        assert all(verify_layout(pattern, target, lay) for lay in res.layouts)


@pytest.mark.parametrize("seed", range(20))
def test_matches_networkx_monomorphisms(seed):
    rng = np.random.default_rng(1000 + seed)
    cm = heavy_hex(3)
    k = int(rng.integers(2, 7))
    g = nx.random_labeled_tree(k, seed=int(rng.integers(1 << 30))) if k > 1 else nx.empty_graph(1)
    pattern = pattern_from_edges(k, list(g.edges))
    target = nx.Graph(cm.undirected_edges())
    gm = isomorphism.GraphMatcher(target, nx.Graph(list(g.edges)))
    want = {tuple(inv[v] for v in range(k))
            for inv in ({p: t for t, p in m.items()} for m in gm.subgraph_monomorphisms_iter())}
    got = layout_set(find_embeddings(pattern, cm))
    assert got == want


# -- budgets -------------------------------------------------------------------

def test_budget_of_one_visit():
    res = find_embeddings(pattern_from_edges(3, [(0, 1), (1, 2)]), nairobi(),
                          budget=SearchBudget(max_state_visits=1))
    assert res.visits_used == 1
    assert not res.exhausted
    assert res.layouts == []


def test_max_layouts_truncates():
    res = find_embeddings(pattern_from_edges(2, [(0, 1)]), nairobi(), budget=SearchBudget(max_layouts=3))
    assert len(res) == 3 and not res.exhausted
    full = find_embeddings(pattern_from_edges(2, [(0, 1)]), nairobi())
    assert res.layouts == full.layouts[:3]


def test_budget_exactly_sufficient_is_exhausted():
    pattern = pattern_from_edges(3, [(0, 1), (1, 2)])
    full = find_embeddings(pattern, nairobi())
    again = find_embeddings(pattern, nairobi(), budget=SearchBudget(max_state_visits=full.visits_used))
    assert again.exhausted and again.layouts == full.layouts


@pytest.mark.parametrize("bad", [0, -1])
def test_budget_must_be_positive(bad):
    with pytest.raises(ValueError):
        SearchBudget(max_state_visits=bad)
    with pytest.raises(ValueError):
        SearchBudget(max_layouts=bad)


@given(st.integers(0, 10_000), st.integers(1, 60), st.integers(1, 60))
def test_budget_monotone(seed, b1, extra):
    rng = np.random.default_rng(seed)
    circ, target = random_instance(rng)
    pattern = build_interaction_graph(circ)
    small = find_embeddings(pattern, target, budget=SearchBudget(b1))
    big = find_embeddings(pattern, target, budget=SearchBudget(b1 + extra))
    full = find_embeddings(pattern, target)
    assert layout_set(small) <= layout_set(big) <= layout_set(full)
    assert big.layouts[:len(small.layouts)] == small.layouts


def test_deterministic_results():
    pattern = pattern_from_edges(4, [(0, 1), (1, 2), (2, 3)])
    a = find_embeddings(pattern, heavy_hex(5))
    b = find_embeddings(pattern, heavy_hex(5))
    assert a.layouts == b.layouts and a.visits_used == b.visits_used


def test_verify_layout_rejects_bad_maps():
    pattern = pattern_from_edges(2, [(0, 1)])
    cm = line(3)
    assert verify_layout(pattern, cm, Layout((0, 1), (1, 2)))
    assert not verify_layout(pattern, cm, Layout((0, 1), (0, 2)))
    assert not verify_layout(pattern, cm, Layout((0, 1), (2, 5)))
    assert not verify_layout(pattern, cm, Layout((0,), (1,)))


def test_layout_helpers():
    lay = Layout.from_dict({2: 5, 0: 1})
    assert lay.virtual == (0, 2) and lay.physical == (1, 5)
    assert lay.to_list(4) == [1, None, 5, None]
    assert lay[2] == 5
    with pytest.raises(ValueError):
        Layout((0, 1), (3, 3))
