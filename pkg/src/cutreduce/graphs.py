"""Weighted graph instances, edge labelings and the structural queries shared by all modules.

A problem instance is an undirected simple graph with finite float edge weights
plus a problem kind: "multicut" (minimum weight multicut over all node
partitions) or "maxcut" (minimum weight cut, i.e. the max-cut problem stated in
min form).  Edge labelings are plain tuples of 0/1 ints indexed like
``inst.edges``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import math

MULTICUT = "multicut"
MAXCUT = "maxcut"
KINDS = (MULTICUT, MAXCUT)

# Conservative slack for criterion inequalities: a criterion fires only on
# plain `lhs >= rhs`; EPS is used where a quantity must be certified zero
# (dual bounds) or strictly positive (reduced-cost gaps).
EPS = 1e-9

Labeling = tuple[int, ...]


class ContractViolation(Exception):
    """An operation was called outside its contract."""


class ParseError(ValueError):
    """Malformed instance input."""


class ProblemInstance:
    """Immutable weighted simple graph with a problem kind.

    Edges are canonicalized to u < v and sorted; edge ids are indices into
    ``edges``/``weights``.  ``objective_constant`` accumulates shifts produced
    by shrinking (switching, component splits) and starts at 0.
    """

    __slots__ = ("kind", "node_count", "edges", "weights", "objective_constant",
                 "__dict__")

    def __init__(self, kind: str, node_count: int,
                 edges: Iterable[tuple[int, int, float]],
                 objective_constant: float = 0.0):
        if kind not in KINDS:
            raise ContractViolation(f"unknown problem kind: {kind!r}")
        if node_count < 0:
            raise ContractViolation("node_count must be >= 0")
        canon = []
        for u, v, w in edges:
            if u == v:
                raise ContractViolation(f"self-loop at node {u}")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ContractViolation(f"edge ({u},{v}) out of range [0,{node_count})")
            if not math.isfinite(w):
                raise ContractViolation(f"non-finite weight on edge ({u},{v})")
            if u > v:
                u, v = v, u
            canon.append((u, v, float(w)))
        canon.sort(key=lambda t: (t[0], t[1]))
        for i in range(1, len(canon)):
            if canon[i][:2] == canon[i - 1][:2]:
                raise ContractViolation(f"parallel edge ({canon[i][0]},{canon[i][1]})")
        self.kind = kind
        self.node_count = node_count
        self.edges = tuple((u, v) for u, v, _ in canon)
        self.weights = tuple(w for _, _, w in canon)
        self.objective_constant = float(objective_constant)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {uv: i for i, uv in enumerate(self.edges)}

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per node: sorted tuple of (neighbor, edge id)."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.node_count)]
        for e, (u, v) in enumerate(self.edges):
            adj[u].append((v, e))
            adj[v].append((u, e))
        return tuple(tuple(sorted(a)) for a in adj)

    def weight(self, u: int, v: int) -> float:
        if u > v:
            u, v = v, u
        return self.weights[self.edge_index[(u, v)]]

    def replace(self, **kw) -> "ProblemInstance":
        args = dict(kind=self.kind, node_count=self.node_count,
                    edges=[(u, v, w) for (u, v), w in zip(self.edges, self.weights)],
                    objective_constant=self.objective_constant)
        args.update(kw)
        return ProblemInstance(**args)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ProblemInstance)
                and self.kind == other.kind
                and self.node_count == other.node_count
                and self.edges == other.edges
                and self.weights == other.weights
                and self.objective_constant == other.objective_constant)

    def __repr__(self) -> str:
        return (f"ProblemInstance({self.kind}, n={self.node_count}, "
                f"m={self.edge_count}, const={self.objective_constant})")


@dataclass(frozen=True)
class Subgraph:
    """Node set plus the edge ids living inside it.

    The subgraph criteria require connected *induced* subgraphs; use
    ``Subgraph.induced`` for those.
    """
    nodes: frozenset[int]
    edge_ids: tuple[int, ...]

    @classmethod
    def induced(cls, inst: ProblemInstance, nodes: Iterable[int]) -> "Subgraph":
        ns = frozenset(nodes)
        eids = tuple(e for e, (u, v) in enumerate(inst.edges) if u in ns and v in ns)
        return cls(ns, eids)

    def is_induced(self, inst: ProblemInstance) -> bool:
        want = sum(1 for u, v in inst.edges if u in self.nodes and v in self.nodes)
        return want == len(self.edge_ids)


@dataclass(frozen=True)
class MergeRecord:
    """Bookkeeping emitted by contract_edge so the contraction can be undone."""
    contracted_edge: int
    kept_node: int
    removed_node: int
    node_map: tuple[int, ...]            # old node id -> new node id
    edge_map: tuple[int | None, ...]     # old edge id -> new edge id (None: dropped self-loop)
    dropped_weight: float                # total weight of dropped self-loops


def objective(inst: ProblemInstance, x: Sequence[int]) -> float:
    """Plain <weights, x>; the instance's objective_constant is NOT added."""
    if len(x) != inst.edge_count:
        raise ContractViolation("labeling size mismatch")
    return sum(w for w, xi in zip(inst.weights, x) if xi)


def total_objective(inst: ProblemInstance, x: Sequence[int]) -> float:
    return objective(inst, x) + inst.objective_constant


def delta(inst: ProblemInstance, a: Iterable[int], b: Iterable[int] | str = "rest"
          ) -> list[int]:
    """Edge ids with one endpoint in `a` and the other in `b` ("rest" = complement of a)."""
    sa = set(a)
    if b == "rest":
        sb = None
    else:
        sb = set(b)
        if sa & sb:
            raise ContractViolation("delta: node sets overlap")
    out = []
    for e, (u, v) in enumerate(inst.edges):
        ua, va = u in sa, v in sa
        if ua == va:
            continue
        other = v if ua else u
        if sb is None or other in sb:
            out.append(e)
    return out


def zero_components(inst: ProblemInstance, x: Sequence[int]) -> list[int]:
    """Component label per node of the subgraph of edges with x_e = 0."""
    return component_labels(inst, lambda e: x[e] == 0)


def component_labels(inst: ProblemInstance, edge_filter: Callable[[int], bool]
                     ) -> list[int]:
    """Component label per node (label = smallest node id in the component)."""
    label = [-1] * inst.node_count
    adj = inst.adjacency
    for start in range(inst.node_count):
        if label[start] >= 0:
            continue
        label[start] = start
        stack = [start]
        while stack:
            u = stack.pop()
            for v, e in adj[u]:
                if label[v] < 0 and edge_filter(e):
                    label[v] = start
                    stack.append(v)
    return label


def connected_components(inst: ProblemInstance,
                         edge_filter: Callable[[int], bool] | None = None
                         ) -> list[list[int]]:
    """Partition of V into components of the filtered edge set, sorted by representative."""
    if edge_filter is None:
        edge_filter = lambda e: True
    label = component_labels(inst, edge_filter)
    groups: dict[int, list[int]] = {}
    for v, l in enumerate(label):
        groups.setdefault(l, []).append(v)
    return [sorted(groups[k]) for k in sorted(groups)]


def is_connected(inst: ProblemInstance, nodes: Iterable[int]) -> bool:
    """BFS reachability inside the induced subgraph on `nodes`."""
    ns = set(nodes)
    if not ns:
        return False
    start = next(iter(ns))
    seen = {start}
    stack = [start]
    adj = inst.adjacency
    while stack:
        u = stack.pop()
        for v, _ in adj[u]:
            if v in ns and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen == ns


def cut_side_from_labeling(inst: ProblemInstance, x: Sequence[int]) -> set[int] | None:
    """Node set U with delta(U) = x, or None if x is not a cut.

    Nodes are 2-colored along a spanning forest (component roots get color 0)
    and every edge is verified against the coloring.
    """
    if len(x) != inst.edge_count:
        raise ContractViolation("labeling size mismatch")
    color = [-1] * inst.node_count
    adj = inst.adjacency
    for start in range(inst.node_count):
        if color[start] >= 0:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            u = stack.pop()
            for v, e in adj[u]:
                want = color[u] ^ (1 if x[e] else 0)
                if color[v] < 0:
                    color[v] = want
                    stack.append(v)
                elif color[v] != want:
                    return None
    return {v for v in range(inst.node_count) if color[v] == 1}


def is_multicut_feasible(inst: ProblemInstance, x: Sequence[int]) -> bool:
    comp = zero_components(inst, x)
    return all(comp[u] != comp[v] for e, (u, v) in enumerate(inst.edges) if x[e])


def is_cut_feasible(inst: ProblemInstance, x: Sequence[int]) -> bool:
    return cut_side_from_labeling(inst, x) is not None


def is_feasible(inst: ProblemInstance, x: Sequence[int]) -> bool:
    """Multicut: x is the incidence vector of the partition induced by its 0-edges.
    Max-cut: x = delta(U) for some U (parity-consistent 2-coloring exists)."""
    if len(x) != inst.edge_count:
        raise ContractViolation("labeling size mismatch")
    if any(xi not in (0, 1) for xi in x):
        raise ContractViolation("labeling entries must be 0/1")
    if inst.kind == MULTICUT:
        return is_multicut_feasible(inst, x)
    return is_cut_feasible(inst, x)


def labeling_from_partition(inst: ProblemInstance, part_label: Sequence[int]) -> Labeling:
    return tuple(1 if part_label[u] != part_label[v] else 0 for u, v in inst.edges)


def labeling_from_cut(inst: ProblemInstance, side: Iterable[int]) -> Labeling:
    s = set(side)
    return tuple(1 if (u in s) != (v in s) else 0 for u, v in inst.edges)


def contract_edge(inst: ProblemInstance, e: int) -> tuple[ProblemInstance, MergeRecord]:
    """Merge the endpoints of edge e; parallel edges sum, self-loops drop.

    Returns a fresh instance (nodes renumbered densely, removed node's slot
    spliced out) plus the record needed to undo the renumbering.
    """
    if not (0 <= e < inst.edge_count):
        raise ContractViolation(f"no edge {e}")
    a, b = inst.edges[e]            # a < b; b merges into a
    node_map = []
    for v in range(inst.node_count):
        if v == b:
            node_map.append(a)
        else:
            node_map.append(v - 1 if v > b else v)
    merged: dict[tuple[int, int], float] = {}
    owner: dict[tuple[int, int], list[int]] = {}
    dropped = 0.0
    for eid, ((u, v), w) in enumerate(zip(inst.edges, inst.weights)):
        nu, nv = node_map[u], node_map[v]
        if nu == nv:
            dropped += w
            continue
        if nu > nv:
            nu, nv = nv, nu
        merged[(nu, nv)] = merged.get((nu, nv), 0.0) + w
        owner.setdefault((nu, nv), []).append(eid)
    new_edges = sorted(merged)
    new_index = {uv: i for i, uv in enumerate(new_edges)}
    edge_map: list[int | None] = [None] * inst.edge_count
    for uv, eids in owner.items():
        for eid in eids:
            edge_map[eid] = new_index[uv]
    out = ProblemInstance(inst.kind, inst.node_count - 1,
                          [(u, v, merged[(u, v)]) for u, v in new_edges],
                          inst.objective_constant)
    rec = MergeRecord(contracted_edge=e, kept_node=a, removed_node=b,
                      node_map=tuple(node_map), edge_map=tuple(edge_map),
                      dropped_weight=dropped)
    return out, rec


def enumerate_triangles(inst: ProblemInstance) -> list[tuple[int, int, int]]:
    """All triangles as (edge_uv, edge_uw, edge_vw) for node triples u < v < w.

    Degree-ordered neighbor intersection; each triangle is reported once, in
    ascending (u, v, w) order.
    """
    adj = inst.adjacency
    deg = [len(a) for a in adj]
    rank = sorted(range(inst.node_count), key=lambda v: (deg[v], v))
    pos = [0] * inst.node_count
    for i, v in enumerate(rank):
        pos[v] = i
    higher = [set() for _ in range(inst.node_count)]
    for u in range(inst.node_count):
        for v, _ in adj[u]:
            if pos[v] > pos[u]:
                higher[u].add(v)
    idx = inst.edge_index
    tris = []
    for u, v in inst.edges:
        lo, hi = (u, v) if pos[u] < pos[v] else (v, u)
        for w in higher[lo] & higher[hi]:
            a, b, c = sorted((u, v, w))
            tris.append((idx[(a, b)], idx[(a, c)], idx[(b, c)]))
    tris.sort(key=lambda t: inst.edges[t[0]] + (inst.edges[t[2]][1],))
    return tris
