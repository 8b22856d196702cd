"""Greedy packing of conflicted cycles: a combinatorial dual lower bound.

A conflicted cycle has exactly one negative edge.  Packing multipliers
lambda_C >= 0 subject to per-edge budgets |theta_e| yields the lower bound
sum(lambda) + sum(negative weights) on the multicut optimum (and hence on the
min-form max-cut optimum).  The residual weights after packing, sign-adjusted,
lower-bound cut weights on any subgraph whose packing certifies a zero
optimum.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .graphs import (EPS, ContractViolation, ProblemInstance, Subgraph)


@dataclass
class DualPacking:
    """Cycles (edge-id tuples, each with exactly one negative edge) with
    multipliers, per-edge load and the implied lower bound."""
    cycles: list[tuple[tuple[int, ...], float]]
    load: dict[int, float]
    dual_bound: float
    edge_ids: tuple[int, ...] = field(default=())     # scope of the packing

    def restricted_to(self, inst: ProblemInstance, sub: Subgraph) -> "DualPacking":
        """Keep only cycles entirely inside `sub`; recompute load and bound."""
        inside = set(sub.edge_ids)
        cycles = [(c, lam) for c, lam in self.cycles if all(e in inside for e in c)]
        return _assemble(inst, cycles, tuple(sorted(inside)))


def _assemble(inst: ProblemInstance, cycles, edge_ids) -> DualPacking:
    load: dict[int, float] = {}
    for c, lam in cycles:
        for e in c:
            load[e] = load.get(e, 0.0) + lam
    neg = sum(inst.weights[e] for e in edge_ids if inst.weights[e] < 0)
    bound = sum(lam for _, lam in cycles) + neg
    return DualPacking(cycles, load, bound, tuple(edge_ids))


def validate_packing(inst: ProblemInstance, packing: DualPacking,
                     tol: float = EPS) -> None:
    """Raise unless every cycle is a conflicted cycle of the instance and all
    edge budgets are respected."""
    scope = set(packing.edge_ids)
    load: dict[int, float] = {}
    for cyc, lam in packing.cycles:
        if lam < -tol:
            raise ContractViolation("negative multiplier")
        if not _is_cycle(inst, cyc):
            raise ContractViolation(f"not a cycle: {cyc}")
        negatives = sum(1 for e in cyc if inst.weights[e] < 0)
        if negatives != 1:
            raise ContractViolation(f"cycle has {negatives} negative edges, needs 1")
        for e in cyc:
            if scope and e not in scope:
                raise ContractViolation("cycle leaves the packing's edge scope")
            load[e] = load.get(e, 0.0) + lam
    for e, l in load.items():
        if l > abs(inst.weights[e]) + tol:
            raise ContractViolation(f"edge {e} over budget: {l} > |{inst.weights[e]}|")


def _is_cycle(inst: ProblemInstance, edges: Sequence[int]) -> bool:
    if len(edges) < 3 or len(set(edges)) != len(edges):
        return False
    deg: dict[int, int] = {}
    for e in edges:
        u, v = inst.edges[e]
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    if any(d != 2 for d in deg.values()) or len(deg) != len(edges):
        return False
    # connectivity of the cycle edge set
    nodes = list(deg)
    adj: dict[int, list[int]] = {v: [] for v in nodes}
    for e in edges:
        u, v = inst.edges[e]
        adj[u].append(v)
        adj[v].append(u)
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(nodes)


def icp(inst: ProblemInstance, sub: Subgraph | None = None) -> DualPacking:
    """Iterative cycle packing on the instance (or on an edge-induced subgraph).

    Triangles through each negative edge are packed first (common-neighbour
    scan, ascending edge id), then shortest conflicted cycles found by BFS
    from each unsaturated negative edge over positive edges with remaining
    slack, until no conflicted cycle survives in the residual graph.
    """
    if sub is None:
        edge_ids = tuple(range(inst.edge_count))
        nodes = set(range(inst.node_count))
    else:
        edge_ids = tuple(sorted(sub.edge_ids))
        nodes = set(sub.nodes)
    w = inst.weights
    slack = {e: abs(w[e]) for e in edge_ids}
    neg_edges = [e for e in edge_ids if w[e] < 0]
    pos_adj: dict[int, list[tuple[int, int]]] = {v: [] for v in nodes}
    for e in edge_ids:
        if w[e] >= 0:
            u, v = inst.edges[e]
            pos_adj[u].append((v, e))
            pos_adj[v].append((u, e))
    for v in pos_adj:
        pos_adj[v].sort()
    pos_index: dict[tuple[int, int], int] = {}
    for e in edge_ids:
        if w[e] >= 0:
            pos_index[inst.edges[e]] = e

    cycles: list[tuple[tuple[int, ...], float]] = []

    def pack(cyc: tuple[int, ...]) -> None:
        lam = min(slack[e] for e in cyc)
        if lam <= EPS:
            return
        for e in cyc:
            slack[e] -= lam
        cycles.append((cyc, lam))

    # phase 1: triangles
    for f in neg_edges:
        if slack[f] <= EPS:
            continue
        u, v = inst.edges[f]
        nbrs_u = {z: e for z, e in pos_adj[u]}
        for z, ev in pos_adj[v]:
            if slack[f] <= EPS:
                break
            eu = nbrs_u.get(z)
            if eu is None or slack[eu] <= EPS or slack[ev] <= EPS:
                continue
            pack((f, eu, ev))

    # phase 2: shortest conflicted cycles via BFS over slack-positive edges
    progress = True
    while progress:
        progress = False
        for f in neg_edges:
            while slack[f] > EPS:
                u, v = inst.edges[f]
                path = _bfs_positive_path(u, v, pos_adj, slack)
                if path is None:
                    break
                pack((f, *path))
                progress = True
    return _assemble(inst, cycles, edge_ids)


def _bfs_positive_path(src: int, dst: int,
                       pos_adj: dict[int, list[tuple[int, int]]],
                       slack: dict[int, float]) -> tuple[int, ...] | None:
    """Shortest src-dst path over positive edges with slack > EPS, as edge ids."""
    prev: dict[int, tuple[int, int]] = {src: (-1, -1)}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            break
        for z, e in pos_adj[u]:
            if z not in prev and slack[e] > EPS:
                prev[z] = (u, e)
                queue.append(z)
    if dst not in prev:
        return None
    path = []
    node = dst
    while node != src:
        node, e = prev[node]
        path.append(e)
    path.reverse()
    return tuple(path)


def reduced_costs(inst: ProblemInstance, packing: DualPacking) -> dict[int, float]:
    """Residual weight per edge in the packing's scope, sign-adjusted:
    (|theta_e| - load_e) * sign(theta_e); zero for saturated edges."""
    validate_packing(inst, packing)
    scope = packing.edge_ids or tuple(range(inst.edge_count))
    out = {}
    for e in scope:
        w = inst.weights[e]
        resid = abs(w) - packing.load.get(e, 0.0)
        if resid < 0.0:
            resid = 0.0
        out[e] = resid if w > 0 else (-resid if w < 0 else 0.0)
    return out


def certifies_trivial_optimum(inst: ProblemInstance, sub: Subgraph,
                              packing: DualPacking) -> bool:
    """True iff the packing proves the multicut optimum on `sub` is 0, i.e.
    its multipliers add up to the total negative weight inside the subgraph.
    False simply means the subgraph cannot be used, not that it is infeasible."""
    inside = set(sub.edge_ids)
    if any(e not in inside for e in packing.edge_ids):
        raise ContractViolation("packing is not restricted to the subgraph")
    total = sum(lam for _, lam in packing.cycles)
    neg = sum(-inst.weights[e] for e in sub.edge_ids if inst.weights[e] < 0)
    return abs(total - neg) <= EPS


def cut_weight_bounds(inst: ProblemInstance, sub: Subgraph, packing: DualPacking,
                      U: set[int] | frozenset[int]) -> tuple[float, float]:
    """(reduced-cost weight, true weight) of the cut delta(U) inside `sub`.

    Valid only when the packing certifies a trivial optimum on the subgraph;
    then 0 <= lower <= upper for every cut of the subgraph.
    """
    if not certifies_trivial_optimum(inst, sub, packing):
        raise ContractViolation("packing does not certify a trivial optimum")
    rc = reduced_costs(inst, packing)
    lb = ub = 0.0
    ns = sub.nodes
    for e in sub.edge_ids:
        u, v = inst.edges[e]
        if (u in U) != (v in U) and u in ns and v in ns:
            lb += rc[e]
            ub += inst.weights[e]
    return lb, ub
