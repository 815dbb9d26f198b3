"""Subgraph monomorphism search of an interaction graph into a coupling map.

A VF2-style depth-first search.  Pattern nodes are matched one at a time in
a static order, either plain VF2 order (lowest index first, growing through
neighbours) or the VF2++ degree-first BFS order.  Each candidate pair is
checked for

* degree feasibility (target degree >= pattern degree, per direction in
  strict mode),
* edge preservation towards every already-matched pattern neighbour,
* instruction availability (strict mode only),
* the VF2 terminal-set look-ahead.

Every such check counts as one *state visit*, which is the unit of
:attr:`SearchBudget.max_state_visits`.  Candidates are tried in ascending
physical index, so results are deterministic and a smaller budget always
explores a prefix of a larger one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .interaction import InteractionGraph, check_mode
from .topology import CouplingMap, undirected_view

__all__ = [
    "ORDERINGS",
    "Layout",
    "SearchBudget",
    "SearchResult",
    "find_embeddings",
    "vf2_node_order",
    "vf2pp_node_order",
    "verify_layout",
]

ORDERINGS = ("vf2", "vf2pp")


@dataclass(frozen=True)
class Layout:
    """Injective map from active virtual qubits to physical qubits.

    ``virtual`` is ascending; ``physical[i]`` is the image of ``virtual[i]``.
    Layouts compare lexicographically by their physical tuple.
    """

    virtual: tuple[int, ...]
    physical: tuple[int, ...]

    def __post_init__(self):
        if len(self.virtual) != len(self.physical):
            raise ValueError("virtual and physical tuples differ in length")
        if len(set(self.physical)) != len(self.physical):
            raise ValueError(f"layout is not injective: {self.physical}")

    def __getitem__(self, virtual_qubit: int) -> int:
        return self.as_dict()[virtual_qubit]

    def __len__(self) -> int:
        return len(self.virtual)

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.virtual, self.physical))

    def to_list(self, num_qubits: int) -> list[int | None]:
        """Array indexed by virtual qubit; idle wires are ``None``."""
        out: list[int | None] = [None] * num_qubits
        for v, p in zip(self.virtual, self.physical):
            out[v] = p
        return out

    @classmethod
    def from_dict(cls, mapping: dict[int, int]) -> "Layout":
        items = sorted(mapping.items())
        return cls(tuple(v for v, _ in items), tuple(p for _, p in items))

    @classmethod
    def identity(cls, qubits: Sequence[int]) -> "Layout":
        qs = tuple(sorted(qubits))
        return cls(qs, qs)


@dataclass(frozen=True)
class SearchBudget:
    max_state_visits: int | None = None
    max_layouts: int | None = None

    def __post_init__(self):
        for name in ("max_state_visits", "max_layouts"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def unbounded(self) -> bool:
        return self.max_state_visits is None and self.max_layouts is None


@dataclass
class SearchResult:
    layouts: list[Layout] = field(default_factory=list)
    exhausted: bool = True
    visits_used: int = 0

    def __len__(self) -> int:
        return len(self.layouts)


def vf2pp_node_order(pattern: InteractionGraph) -> list[int]:
    """VF2++ matching order.

    BFS from the highest-degree unordered node; each BFS layer is sorted by
    descending degree.  Ties go to the lower node index, and disconnected
    components are started in the same way once the previous one is done.
    """
    adj = pattern.adjacency()
    deg = {n: len(adj[n]) for n in pattern.nodes}
    remaining = set(pattern.nodes)
    order: list[int] = []
    while remaining:
        root = min(remaining, key=lambda n: (-deg[n], n))
        remaining.discard(root)
        order.append(root)
        layer = [root]
        while layer:
            nxt = {w for n in layer for w in adj[n] if w in remaining}
            layer = sorted(nxt, key=lambda n: (-deg[n], n))
            remaining.difference_update(layer)
            order.extend(layer)
    return order


def vf2_node_order(pattern: InteractionGraph) -> list[int]:
    """Plain VF2 order: the smallest node adjacent to the matched set, else
    the smallest remaining node."""
    adj = pattern.adjacency()
    remaining = set(pattern.nodes)
    frontier: set[int] = set()
    order: list[int] = []
    while remaining:
        pick = min(frontier) if frontier else min(remaining)
        order.append(pick)
        remaining.discard(pick)
        frontier.discard(pick)
        frontier.update(w for w in adj[pick] if w in remaining)
    return order


_ORDER_FUNCS = {"vf2": vf2_node_order, "vf2pp": vf2pp_node_order}


def _prepare_target(target: CouplingMap, mode: str):
    if mode == "loose":
        und = undirected_view(target) if not target.is_symmetric() else target
        nbrs = und.neighbors
        return und, nbrs, nbrs, nbrs
    return target, target.successors, target.predecessors, target.neighbors


def find_embeddings(
    pattern: InteractionGraph,
    target: CouplingMap,
    mode: str | None = None,
    ordering: str = "vf2pp",
    budget: SearchBudget | None = None,
) -> SearchResult:
    """All layouts embedding ``pattern`` into ``target`` (within ``budget``).

    In loose mode both graphs are treated as undirected and instruction
    availability is ignored.  In strict mode pattern edges must map onto
    directed target edges, and every instruction recorded on a pattern node
    or edge must be available at its image (``CouplingMap.supports``).
    """
    mode = check_mode(mode or pattern.mode)
    if pattern.mode != mode:
        raise ValueError(f"pattern was built in {pattern.mode} mode, search requested {mode}")
    if ordering not in _ORDER_FUNCS:
        raise ValueError(f"ordering must be one of {ORDERINGS}")
    budget = budget or SearchBudget()
    result = SearchResult()
    for layout in _search(pattern, target, mode, ordering, budget, result):
        result.layouts.append(layout)
    return result


def _search(pattern, target, mode, ordering, budget, result) -> Iterator[Layout]:
    k = pattern.num_nodes
    if k > target.num_qubits:
        return
    if k == 0:
        yield Layout((), ())
        return
    strict = mode == "strict"
    tmap, tsucc, tpred, tnbr = _prepare_target(target, mode)
    n_t = target.num_qubits

    order = _ORDER_FUNCS[ordering](pattern)
    pos_of = {u: i for i, u in enumerate(order)}
    padj = pattern.adjacency()
    # per depth: constraints against earlier nodes, as (earlier depth, target adjacency table)
    checks: list[list[tuple[int, tuple]]] = []
    edge_ops: list[list[tuple[int, bool, tuple[str, ...]]]] = []
    node_ops: list[tuple[str, ...]] = []
    parent: list[tuple[int, tuple] | None] = []
    p_out = [0] * k
    p_in = [0] * k
    p_deg = [len(padj[u]) for u in order]
    for i, u in enumerate(order):
        c, eo = [], []
        for w in sorted(padj[u], key=pos_of.get):
            j = pos_of[w]
            if not strict:
                if j < i:
                    c.append((j, tnbr))
                continue
            if (u, w) in pattern.edges:
                p_out[i] += 1
                if j < i:
                    c.append((j, tsucc))
                    eo.append((j, True, tuple(pattern.edge_ops[(u, w)])))
            if (w, u) in pattern.edges:
                p_in[i] += 1
                if j < i:
                    c.append((j, tpred))
                    eo.append((j, False, tuple(pattern.edge_ops[(w, u)])))
        checks.append(c)
        edge_ops.append(eo)
        node_ops.append(tuple(pattern.node_ops.get(u, ())) if strict else ())
        if c:
            j, table = c[0]
            inverse = tpred if table is tsucc and strict else tsucc if table is tpred and strict else table
            parent.append((j, inverse))
        else:
            parent.append(None)
    p_nbr_depths = [[pos_of[w] for w in padj[u]] for u in order]

    t_deg = [len(tnbr[v]) for v in range(n_t)]
    t_out = [len(tsucc[v]) for v in range(n_t)]
    t_in = [len(tpred[v]) for v in range(n_t)]
    all_targets = list(range(n_t))

    mapped = [-1] * k          # depth -> physical
    used = [False] * n_t
    p_count = [0] * k          # matched neighbours of each pattern node
    t_count = [0] * n_t        # matched neighbours of each target node

    max_visits = budget.max_state_visits
    max_layouts = budget.max_layouts
    visits = 0
    found = 0

    def feasible(i: int, v: int) -> bool:
        if t_deg[v] < p_deg[i]:
            return False
        if strict and (t_out[v] < p_out[i] or t_in[v] < p_in[i]):
            return False
        for j, table in checks[i]:
            if mapped[j] not in table[v]:
                return False
        if strict:
            for name in node_ops[i]:
                if not tmap.supports(name, (v,)):
                    return False
            for j, outgoing, names in edge_ops[i]:
                pair = (v, mapped[j]) if outgoing else (mapped[j], v)
                for name in names:
                    if not tmap.supports(name, pair):
                        return False
        # terminal-set look-ahead
        a1 = b1 = 0
        for j in p_nbr_depths[i]:
            if mapped[j] < 0:
                if p_count[j]:
                    a1 += 1
                else:
                    b1 += 1
        if a1 + b1 == 0:
            return True
        a2 = b2 = 0
        for x in tnbr[v]:
            if not used[x]:
                if t_count[x]:
                    a2 += 1
                else:
                    b2 += 1
        return a1 <= a2 and a1 + b1 <= a2 + b2

    def assign(i: int, v: int, delta: int) -> None:
        for j in p_nbr_depths[i]:
            p_count[j] += delta
        for x in tnbr[v]:
            t_count[x] += delta

    def candidates(i: int) -> list[int]:
        par = parent[i]
        if par is None:
            return [v for v in all_targets if not used[v]]
        j, table = par
        return sorted(v for v in table[mapped[j]] if not used[v])

    virtual = tuple(pattern.nodes)
    slot = [pos_of[u] for u in virtual]
    cand_stack: list[list[int]] = [candidates(0)]
    ptr = [0] * k
    depth = 0
    complete = True
    while depth >= 0:
        cands = cand_stack[depth]
        if ptr[depth] < len(cands):
            v = cands[ptr[depth]]
            ptr[depth] += 1
            if max_visits is not None and visits >= max_visits:
                complete = False
                break
            visits += 1
            if not feasible(depth, v):
                continue
            if depth == k - 1:
                mapped[depth] = v
                yield Layout(virtual, tuple(mapped[s] for s in slot))
                mapped[depth] = -1
                found += 1
                if max_layouts is not None and found >= max_layouts:
                    complete = False
                    break
                continue
            mapped[depth] = v
            used[v] = True
            assign(depth, v, 1)
            depth += 1
            ptr[depth] = 0
            if len(cand_stack) <= depth:
                cand_stack.append(candidates(depth))
            else:
                cand_stack[depth] = candidates(depth)
        else:
            depth -= 1
            if depth >= 0:
                v = mapped[depth]
                assign(depth, v, -1)
                used[v] = False
                mapped[depth] = -1
    result.visits_used = visits
    result.exhausted = complete


def verify_layout(pattern: InteractionGraph, target: CouplingMap, layout: Layout,
                  mode: str | None = None) -> bool:
    """Independent re-check of a layout: injective, in range, edges preserved
    (and, in strict mode, instructions available)."""
    mode = mode or pattern.mode
    m = layout.as_dict()
    if set(m) != set(pattern.nodes) or len(set(m.values())) != len(m):
        return False
    if any(not 0 <= p < target.num_qubits for p in m.values()):
        return False
    tgt = undirected_view(target) if mode == "loose" else target
    for a, b in pattern.edges:
        if (m[a], m[b]) not in tgt.edges:
            return False
    if mode == "strict":
        for (a, b), ops in pattern.edge_ops.items():
            if any(not target.supports(n, (m[a], m[b])) for n in ops):
                return False
        for q, ops in pattern.node_ops.items():
            if any(not target.supports(n, (m[q],)) for n in ops):
                return False
    return True
