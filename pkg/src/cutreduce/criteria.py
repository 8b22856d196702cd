"""Persistency criteria for multicut and max-cut edges.

Every criterion emits certificates whose witnesses can be replayed: a cut
witness re-verifies one weight inequality, a subgraph witness re-verifies a
zero-optimum packing plus one auxiliary min-cut.  All inequalities are
evaluated conservatively (plain >=, no tolerance toward firing).
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .certificates import (CutWitness, DualGapWitness, PersistencyCertificate,
                           SubgraphWitness, TriangleWitness, sort_key)
from .flow import FlowNetwork, GomoryHuTree, gomory_hu, min_cut, min_cut_incremental
from .graphs import (EPS, MAXCUT, MULTICUT, ContractViolation, ProblemInstance,
                     Subgraph, component_labels, enumerate_triangles,
                     is_connected, is_feasible, objective)
from . import packing as packing_mod
from .packing import DualPacking, certifies_trivial_optimum, icp, reduced_costs

# node count from which bulk Gomory-Hu passes switch to the integer-scaled engine
SCALED_ENGINE_MIN_NODES = 64
ALPHA_TOL = 1e-6
BISECTION_MAX_ITERS = 60


# ---------------------------------------------------------------------------
# graph views: criteria replay runs against either a frozen instance or the
# pipeline's mutable working graph (duck-typed: kind, has_node, weight,
# neighbors, node_ids).

class InstanceView:
    def __init__(self, inst: ProblemInstance):
        self.inst = inst
        self.kind = inst.kind

    def has_node(self, u: int) -> bool:
        return 0 <= u < self.inst.node_count

    def node_ids(self) -> Iterable[int]:
        return range(self.inst.node_count)

    def weight(self, u: int, v: int) -> float | None:
        if u > v:
            u, v = v, u
        e = self.inst.edge_index.get((u, v))
        return None if e is None else self.inst.weights[e]

    def neighbors(self, u: int) -> Iterable[tuple[int, float]]:
        for v, e in self.inst.adjacency[u]:
            yield v, self.inst.weights[e]


def _view_connected(view, nodes: frozenset[int]) -> bool:
    if not nodes:
        return False
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v, _ in view.neighbors(u):
            if v in nodes and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen == nodes


def _boundary_sums(view, nodes: frozenset[int],
                   skip: frozenset[frozenset[int]] = frozenset()
                   ) -> tuple[float, float]:
    """(sum |w|, sum of positive w) over edges leaving `nodes`, minus skipped pairs."""
    s_abs = s_pos = 0.0
    for u in nodes:
        for v, w in view.neighbors(u):
            if v in nodes or frozenset((u, v)) in skip:
                continue
            s_abs += abs(w)
            if w >= 0:
                s_pos += w
    return s_abs, s_pos


# ---------------------------------------------------------------------------
# edge criterion

def _node_sums(inst: ProblemInstance) -> tuple[np.ndarray, np.ndarray]:
    s_abs = np.zeros(inst.node_count)
    s_pos = np.zeros(inst.node_count)
    for (u, v), w in zip(inst.edges, inst.weights):
        a = abs(w)
        s_abs[u] += a
        s_abs[v] += a
        if w >= 0:
            s_pos[u] += w
            s_pos[v] += w
    return s_abs, s_pos


def _abs_network(inst: ProblemInstance) -> FlowNetwork:
    net = FlowNetwork(inst.node_count)
    for (u, v), w in zip(inst.edges, inst.weights):
        net.add_edge(u, v, abs(w))
    return net


def _positive_network(inst: ProblemInstance) -> FlowNetwork:
    net = FlowNetwork(inst.node_count)
    for (u, v), w in zip(inst.edges, inst.weights):
        if w > 0:
            net.add_edge(u, v, w)
    return net


def _connected_component(view, start: int, allowed: frozenset[int],
                         positive_only: bool = False) -> frozenset[int]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v, w in view.neighbors(u):
            if v in allowed and v not in seen and (not positive_only or w > 0):
                seen.add(v)
                stack.append(v)
    return frozenset(seen)


def edge_criteria(inst: ProblemInstance) -> list[PersistencyCertificate]:
    """Single-edge persistency for every edge: first the two one-node cuts,
    then an all-pairs pass via Gomory-Hu trees on (V,E,|w|) (and on the
    positive subgraph for negative multicut edges)."""
    view = InstanceView(inst)
    s_abs, s_pos = _node_sums(inst)
    certs: dict[int, PersistencyCertificate] = {}

    for f, ((u, v), w) in enumerate(zip(inst.edges, inst.weights)):
        aw = abs(w)
        if inst.kind == MULTICUT:
            if w >= 0:
                for node in (u, v):
                    if w >= s_abs[node] - aw:
                        certs[f] = PersistencyCertificate(
                            f, 0, "edge_e1", CutWitness(frozenset((node,))),
                            endpoints=(u, v))
                        break
            else:
                for node in (u, v):
                    if aw >= s_pos[node]:
                        certs[f] = PersistencyCertificate(
                            f, 1, "edge_e2", CutWitness(frozenset((node,))),
                            endpoints=(u, v))
                        break
        else:
            beta = 0 if w >= 0 else 1
            for node in (u, v):
                if aw >= s_abs[node] - aw:
                    certs[f] = PersistencyCertificate(
                        f, beta, "edge_e3", CutWitness(frozenset((node,))),
                        endpoints=(u, v))
                    break

    if inst.node_count >= 2 and inst.edge_count:
        rounding = "up" if inst.node_count >= SCALED_ENGINE_MIN_NODES else None
        net_abs = _abs_network(inst)
        tree_abs = gomory_hu(net_abs, rounding=rounding)
        tree_pos: GomoryHuTree | None = None
        net_pos: FlowNetwork | None = None
        if inst.kind == MULTICUT and any(w < 0 for w in inst.weights):
            net_pos = _positive_network(inst)
            tree_pos = gomory_hu(net_pos, rounding=rounding)
        for f, ((u, v), w) in enumerate(zip(inst.edges, inst.weights)):
            if f in certs:
                continue
            aw = abs(w)
            if inst.kind == MULTICUT and w < 0:
                if aw >= tree_pos.query(u, v):
                    cut = _witness_cut(inst, net_pos, u, v, rounding,
                                       positive_only=True)
                    sum_pos = _boundary_sums(view, cut)[1]
                    if aw >= sum_pos:
                        certs[f] = PersistencyCertificate(
                            f, 1, "edge_e2", CutWitness(cut), endpoints=(u, v))
                continue
            if 2 * aw >= tree_abs.query(u, v):
                cut = _witness_cut(inst, net_abs, u, v, rounding)
                skip = frozenset((frozenset((u, v)),))
                rest = _boundary_sums(view, cut, skip)[0]
                if aw >= rest:
                    tag = "edge_e1" if inst.kind == MULTICUT else "edge_e3"
                    beta = 0 if (inst.kind == MULTICUT or w >= 0) else 1
                    certs[f] = PersistencyCertificate(
                        f, beta, tag, CutWitness(cut), endpoints=(u, v))
    return sorted(certs.values(), key=sort_key)


def _witness_cut(inst: ProblemInstance, net: FlowNetwork, u: int, v: int,
                 rounding: str | None, positive_only: bool = False) -> frozenset[int]:
    """Connected source-side witness for a fired all-pairs criterion: solve the
    u-v cut, keep u's connected component inside the side."""
    if rounding is None:
        _, side = min_cut(net, u, v)
    else:
        from .flow import _ScaledSolver
        try:
            _, side = _ScaledSolver(net, rounding).min_cut(u, v)
        except ContractViolation:
            _, side = min_cut(net, u, v)
    return _connected_component(InstanceView(inst), u, frozenset(side),
                                positive_only=positive_only)


# ---------------------------------------------------------------------------
# triangle criterion

def _triangle_arrays(inst: ProblemInstance
                     ) -> tuple[np.ndarray, np.ndarray] | None:
    """Triangles as (nodes[:,3] with a<b<c, edge_ids[:,3] for ab,ac,bc).

    Dense adjacency path for moderate node counts; None when unavailable."""
    n = inst.node_count
    if n < 3 or n > 2048 or not inst.edge_count:
        return None
    A = np.zeros((n, n), dtype=bool)
    eid = np.full((n, n), -1, dtype=np.int64)
    for e, (u, v) in enumerate(inst.edges):
        A[u, v] = A[v, u] = True
        eid[u, v] = eid[v, u] = e
    deg = A.sum(axis=1)
    pos = np.lexsort((np.arange(n), deg))
    rank = np.empty(n, dtype=np.int64)
    rank[pos] = np.arange(n)
    tris = []
    for w in range(n):
        nbrs = np.nonzero(A[w])[0]
        lower = nbrs[rank[nbrs] < rank[w]]
        if len(lower) < 2:
            continue
        iu, iv = np.triu_indices(len(lower), k=1)
        a, b = lower[iu], lower[iv]
        mask = A[a, b]
        if not mask.any():
            continue
        a, b = a[mask], b[mask]
        trip = np.sort(np.stack([a, b, np.full_like(a, w)], axis=1), axis=1)
        tris.append(trip)
    if not tris:
        return np.zeros((0, 3), dtype=np.int64), np.zeros((0, 3), dtype=np.int64)
    nodes = np.concatenate(tris)
    order = np.lexsort((nodes[:, 2], nodes[:, 1], nodes[:, 0]))
    nodes = nodes[order]
    eids = np.stack([eid[nodes[:, 0], nodes[:, 1]],
                     eid[nodes[:, 0], nodes[:, 2]],
                     eid[nodes[:, 1], nodes[:, 2]]], axis=1)
    return nodes, eids


def triangle_criterion(inst: ProblemInstance, tri: tuple[int, int, int],
                       exact_flows: bool = False) -> list[PersistencyCertificate]:
    """All certificates the triangle criterion yields for one triangle,
    given as (edge_ab, edge_ac, edge_bc) ids over nodes a < b < c."""
    e_ab, e_ac, e_bc = tri
    nodes = {*inst.edges[e_ab], *inst.edges[e_ac], *inst.edges[e_bc]}
    if len(nodes) != 3:
        raise ContractViolation("edge ids do not form a triangle")
    a, b, c = sorted(nodes)
    idx = inst.edge_index
    if idx.get((a, b)) != e_ab or idx.get((a, c)) != e_ac or idx.get((b, c)) != e_bc:
        raise ContractViolation("edge ids do not form a triangle")
    out = []
    # each edge in turn plays the certified role (p,q) with r the apex
    for f, p, q, r in ((e_ab, a, b, c), (e_ac, a, c, b), (e_bc, b, c, a)):
        cert = _triangle_check(inst, f, p, q, r, exact_flows)
        if cert is not None:
            out.append(cert)
    return sorted(out, key=sort_key)


def _triangle_default_cuts(inst: ProblemInstance, p: int, q: int, r: int,
                           s_abs: np.ndarray) -> tuple[tuple[frozenset[int], float], ...]:
    """The two straightforward cuts separating p from {q,r} with their
    |w|-boundary sums excluding the two triangle edges at p."""
    w_pq = abs(inst.weight(p, q))
    w_pr = abs(inst.weight(p, r))
    w_qr = abs(inst.weight(q, r))
    single = (frozenset((p,)), s_abs[p] - w_pq - w_pr)
    pair = (frozenset((q, r)), s_abs[q] + s_abs[r] - 2 * w_qr - w_pq - w_pr)
    return single, pair


def _triangle_check(inst: ProblemInstance, f: int, p: int, q: int, r: int,
                    exact_flows: bool) -> PersistencyCertificate | None:
    w = inst.weight
    w_f, w_pr, w_qr = w(p, q), w(p, r), w(q, r)
    s_abs, s_pos = _node_sums(inst)

    def best_cut(x: int, y: int, z: int) -> tuple[frozenset[int], float]:
        # cut separating x from {y,z}, keeping whichever default cut has the
        # smaller excluded-boundary sum (exact mode solves a flow instead)
        if exact_flows:
            return _triangle_flow_cut(inst, x, y, z)
        return min(_triangle_default_cuts(inst, x, y, z, s_abs), key=lambda t: t[1])

    cut_u, rhs_u = best_cut(p, q, r)
    cut_w, rhs_w = best_cut(q, p, r)
    t1 = w_f + w_pr >= rhs_u
    t2 = w_f + w_qr >= rhs_w
    if not (t1 and t2):
        return None
    if inst.kind == MULTICUT:
        tri_nodes = frozenset((p, q, r))
        pos_out = _boundary_sums(InstanceView(inst), tri_nodes)[1]
        if not (w_f + w_pr + w_qr >= pos_out):
            return None
    return PersistencyCertificate(
        f, 0, "triangle",
        TriangleWitness(u=p, v=r, w=q, cut_u=cut_u, cut_w=cut_w),
        endpoints=(min(p, q), max(p, q)))


def _triangle_flow_cut(inst: ProblemInstance, x: int, y: int, z: int
                       ) -> tuple[frozenset[int], float]:
    """Minimum |w|-cut separating x from merged {y,z}; returns (connected
    witness containing x, boundary sum excluding the two triangle edges)."""
    n = inst.node_count
    remap = [v for v in range(n)]
    remap[max(y, z)] = min(y, z)
    dense = sorted(set(remap))
    local = {g: i for i, g in enumerate(dense)}
    net = FlowNetwork(len(dense))
    for (u, v), wt in zip(inst.edges, inst.weights):
        lu, lv = local[remap[u]], local[remap[v]]
        if lu != lv:
            net.add_edge(lu, lv, abs(wt))
    _, side_local = min_cut(net, local[x], local[remap[y]])
    side = frozenset(v for v in range(n) if local[remap[v]] in side_local)
    cut = _connected_component(InstanceView(inst), x, side)
    skip = frozenset((frozenset((x, y)), frozenset((x, z))))
    rhs = _boundary_sums(InstanceView(inst), cut, skip)[0]
    return cut, rhs


def triangle_criteria(inst: ProblemInstance, exact_flows: bool = False
                      ) -> list[PersistencyCertificate]:
    """Triangle criterion over all triangles; vectorized default-cut checks,
    at most one certificate per edge (first firing triangle wins)."""
    if exact_flows:
        out: dict[int, PersistencyCertificate] = {}
        for tri in enumerate_triangles(inst):
            for cert in triangle_criterion(inst, tri, exact_flows=True):
                out.setdefault(cert.edge, cert)
        return sorted(out.values(), key=sort_key)
    arrays = _triangle_arrays(inst)
    if arrays is None:
        out = {}
        for tri in enumerate_triangles(inst):
            for cert in triangle_criterion(inst, tri):
                out.setdefault(cert.edge, cert)
        return sorted(out.values(), key=sort_key)
    nodes, eids = arrays
    if not len(nodes):
        return []
    w = np.asarray(inst.weights)
    aw = np.abs(w)
    wpos = np.where(w >= 0, w, 0.0)
    s_abs, _ = _node_sums(inst)
    s_posn = np.zeros(inst.node_count)
    for (u, v), wt in zip(inst.edges, inst.weights):
        if wt >= 0:
            s_posn[u] += wt
            s_posn[v] += wt
    certs: dict[int, tuple[int, int, int, int, bool, bool]] = {}
    roles = ((0, 0, 1, 2, 1, 2), (1, 0, 2, 1, 0, 2), (2, 1, 2, 0, 0, 1))
    # role = (f column, p column, q column, r column, pr edge column, qr edge column)
    A, B, C = nodes[:, 0], nodes[:, 1], nodes[:, 2]
    t3_lhs = w[eids[:, 0]] + w[eids[:, 1]] + w[eids[:, 2]]
    t3_rhs = (s_posn[A] + s_posn[B] + s_posn[C]
              - 2 * (wpos[eids[:, 0]] + wpos[eids[:, 1]] + wpos[eids[:, 2]]))
    t3 = t3_lhs >= t3_rhs
    for fcol, pcol, qcol, rcol, prcol, qrcol in roles:
        F = eids[:, fcol]
        P, Q, R = nodes[:, pcol], nodes[:, qcol], nodes[:, rcol]
        aw_f, aw_pr, aw_qr = aw[F], aw[eids[:, prcol]], aw[eids[:, qrcol]]
        w_f, w_pr, w_qr = w[F], w[eids[:, prcol]], w[eids[:, qrcol]]
        rhs_u1 = s_abs[P] - aw_f - aw_pr
        rhs_u2 = s_abs[Q] + s_abs[R] - 2 * aw_qr - aw_f - aw_pr
        rhs_w1 = s_abs[Q] - aw_f - aw_qr
        rhs_w2 = s_abs[P] + s_abs[R] - 2 * aw_pr - aw_f - aw_qr
        t1 = w_f + w_pr >= np.minimum(rhs_u1, rhs_u2)
        t2 = w_f + w_qr >= np.minimum(rhs_w1, rhs_w2)
        fire = t1 & t2
        if inst.kind == MULTICUT:
            fire &= t3
        for i in np.nonzero(fire)[0]:
            e = int(F[i])
            if e in certs:
                continue
            certs[e] = (int(P[i]), int(Q[i]), int(R[i]),
                        e, bool(rhs_u1[i] <= rhs_u2[i]), bool(rhs_w1[i] <= rhs_w2[i]))
    out = []
    for e, (p, q, r, _, u_single, w_single) in sorted(certs.items()):
        cut_u = frozenset((p,)) if u_single else frozenset((q, r))
        cut_w = frozenset((q,)) if w_single else frozenset((p, r))
        out.append(PersistencyCertificate(
            e, 0, "triangle", TriangleWitness(u=p, v=r, w=q, cut_u=cut_u, cut_w=cut_w),
            endpoints=(min(p, q), max(p, q))))
    return sorted(out, key=sort_key)


# ---------------------------------------------------------------------------
# subgraph criteria

def _require_subgraph(inst: ProblemInstance, sub: Subgraph) -> None:
    if len(sub.nodes) < 2:
        raise ContractViolation("subgraph needs at least two nodes")
    if not sub.is_induced(inst):
        raise ContractViolation("subgraph criteria need induced subgraphs")
    if not is_connected(inst, sub.nodes):
        raise ContractViolation("subgraph criteria need connected subgraphs")


def _require_zero_certified(inst: ProblemInstance, sub: Subgraph,
                            packing: DualPacking) -> tuple[dict[int, float], float]:
    """Reduced costs clamped to [0, inf) as cut capacities, plus the total
    clamped slack on negative edges.  The gate is tolerance-based, so negative
    edges may keep up to EPS residual each; adding that slack to the firing
    threshold keeps every criterion conservative."""
    if not certifies_trivial_optimum(inst, sub, packing):
        raise ContractViolation("packing does not certify a zero optimum on H")
    rc = reduced_costs(inst, packing)
    caps = {}
    slack = 0.0
    for e in sub.edge_ids:
        val = rc.get(e, 0.0)
        if val < 0.0:
            slack += -val
            val = 0.0
        caps[e] = val
    return caps, slack


def _cycles_as_node_pairs(inst: ProblemInstance, packing: DualPacking
                          ) -> tuple[tuple[tuple[tuple[int, int], ...], float], ...]:
    return tuple((tuple(inst.edges[e] for e in cyc), lam)
                 for cyc, lam in packing.cycles)


def _subgraph_witness(inst: ProblemInstance, sub: Subgraph, packing: DualPacking,
                      boundary_total: float, cut_value: float,
                      alpha: float | None = None) -> SubgraphWitness:
    return SubgraphWitness(nodes=sub.nodes,
                           cycles=_cycles_as_node_pairs(inst, packing),
                           boundary_total=boundary_total,
                           cut_value=cut_value, alpha=alpha)


def _local_network(inst: ProblemInstance, sub: Subgraph, caps: dict[int, float]
                   ) -> tuple[FlowNetwork, dict[int, int], list[int]]:
    order = sorted(sub.nodes)
    local = {g: i for i, g in enumerate(order)}
    net = FlowNetwork(len(order))
    for e in sub.edge_ids:
        u, v = inst.edges[e]
        net.add_edge(local[u], local[v], caps[e])
    return net, local, order


def positive_boundary_total(inst: ProblemInstance, sub: Subgraph) -> float:
    """Sum of positive weights on edges leaving the subgraph."""
    return _boundary_sums(InstanceView(inst), sub.nodes)[1]


def subgraph_criterion_multicut(inst: ProblemInstance, sub: Subgraph,
                                packing: DualPacking
                                ) -> list[PersistencyCertificate]:
    """Inner reduced-cost min cuts vs. the positive outgoing weight: every edge
    of H whose endpoints cannot be separated more cheaply than the boundary
    total is persistently uncut."""
    _require_subgraph(inst, sub)
    rc, slack = _require_zero_certified(inst, sub, packing)
    bound = positive_boundary_total(inst, sub) + slack
    net, local, _ = _local_network(inst, sub, rc)
    rounding = "down" if len(sub.nodes) >= SCALED_ENGINE_MIN_NODES else None
    tree = gomory_hu(net, rounding=rounding)
    out = []
    for e in sorted(sub.edge_ids):
        u, v = inst.edges[e]
        val = tree.query(local[u], local[v])
        if val >= bound:
            out.append(PersistencyCertificate(
                e, 0, "subgraph_mc",
                _subgraph_witness(inst, sub, packing, bound, val),
                endpoints=(u, v)))
    return out


def _closure_network(inst: ProblemInstance, sub: Subgraph, rc: dict[int, float]
                     ) -> tuple[FlowNetwork, dict[int, int]]:
    """Subgraph edges at reduced costs plus the positive boundary edges at
    their true weights (boundary nodes included)."""
    boundary = set()
    for u in sub.nodes:
        for v, eid in inst.adjacency[u]:
            if v not in sub.nodes and inst.weights[eid] >= 0:
                boundary.add(v)
    order = sorted(sub.nodes) + sorted(boundary)
    local = {g: i for i, g in enumerate(order)}
    net = FlowNetwork(len(order))
    for e in sub.edge_ids:
        u, v = inst.edges[e]
        net.add_edge(local[u], local[v], rc[e])
    seen = set()
    for u in sorted(sub.nodes):
        for v, eid in inst.adjacency[u]:
            if v not in sub.nodes and inst.weights[eid] >= 0 and eid not in seen:
                seen.add(eid)
                net.add_edge(local[u], local[v], inst.weights[eid])
    return net, local


def boundary_refined_criterion(inst: ProblemInstance, sub: Subgraph,
                               packing: DualPacking
                               ) -> list[PersistencyCertificate]:
    """Refinement of the multicut subgraph criterion: the separating cuts are
    taken in the positive closure of H (boundary nodes plus positive boundary
    edges), which can only raise the inner cut values."""
    _require_subgraph(inst, sub)
    rc, slack = _require_zero_certified(inst, sub, packing)
    bound = positive_boundary_total(inst, sub) + slack
    net, local = _closure_network(inst, sub, rc)
    rounding = "down" if net.n >= SCALED_ENGINE_MIN_NODES else None
    tree = gomory_hu(net, rounding=rounding)
    out = []
    for e in sorted(sub.edge_ids):
        u, v = inst.edges[e]
        val = tree.query(local[u], local[v])
        if val >= bound:
            out.append(PersistencyCertificate(
                e, 0, "boundary_subgraph",
                _subgraph_witness(inst, sub, packing, bound, val),
                endpoints=(u, v)))
    return out


def boundary_single_edge_certificate(inst: ProblemInstance, e: int
                                     ) -> PersistencyCertificate | None:
    """Closed-form single-edge version of the refined criterion: common
    positive neighbours of the endpoints discount the boundary total."""
    u, v = inst.edges[e]
    w_uv = inst.weights[e]
    if w_uv < 0:
        return None
    pos_u = {z: wt for z, wt in InstanceView(inst).neighbors(u) if wt >= 0 and z != v}
    discount = 0.0
    total = sum(pos_u.values())
    for z, wt in InstanceView(inst).neighbors(v):
        if z == u or wt < 0:
            continue
        total += wt
        if z in pos_u:
            discount += min(pos_u[z], wt)
    if w_uv >= total - discount:
        return PersistencyCertificate(
            e, 0, "boundary_edge",
            SubgraphWitness(nodes=frozenset((u, v)), cycles=(),
                            boundary_total=total, cut_value=w_uv + discount),
            endpoints=(u, v))
    return None


def _maxcut_b_values(inst: ProblemInstance, sub: Subgraph) -> dict[int, float]:
    b = {w: 0.0 for w in sub.nodes}
    for u in sub.nodes:
        for v, eid in inst.adjacency[u]:
            if v not in sub.nodes:
                b[u] += abs(inst.weights[eid])
    return b


class _BisectionNetwork:
    """u-v cut network over H with reduced-cost inner capacities and
    alpha-interpolated terminal arcs; capacities are updated in place between
    evaluations so the flow engine can warm-start."""

    def __init__(self, inst: ProblemInstance, sub: Subgraph, rc: dict[int, float],
                 b: dict[int, float], u: int, v: int):
        order = sorted(sub.nodes)
        self.local = {g: i for i, g in enumerate(order)}
        self.order = order
        self.b = b
        self.s = self.local[u]
        self.t = self.local[v]
        self.net = FlowNetwork(len(order))
        for e in sub.edge_ids:
            a, c = inst.edges[e]
            self.net.add_edge(self.local[a], self.local[c], rc[e])
        self.to_t: list[tuple[int, int]] = []
        self.from_s: list[tuple[int, int]] = []
        for g in order:
            l = self.local[g]
            if l != self.t:
                self.to_t.append((g, self.net.add_arc(l, self.t, 0.0)))
            if l != self.s:
                self.from_s.append((g, self.net.add_arc(self.s, l, 0.0)))
        self._fresh = True

    def evaluate(self, alpha: float) -> tuple[float, frozenset[int]]:
        updates = [(arc, alpha * self.b[g]) for g, arc in self.to_t]
        updates += [(arc, (1.0 - alpha) * self.b[g]) for g, arc in self.from_s]
        val, side = min_cut_incremental(self.net, self.s, self.t, updates)
        return val, frozenset(self.order[i] for i in side)

    def subgradient(self, side: frozenset[int]) -> float:
        return sum(self.b[g] if g in side else -self.b[g] for g in self.order)


def subgraph_criterion_maxcut(inst: ProblemInstance, sub: Subgraph,
                              packing: DualPacking, e: int
                              ) -> PersistencyCertificate | None:
    """Max-cut subgraph persistency for one edge of H via bisection over the
    concave lower envelope of terminal-weighted min cuts."""
    _require_subgraph(inst, sub)
    if e not in set(sub.edge_ids):
        raise ContractViolation("edge does not belong to the subgraph")
    if inst.kind != MAXCUT:
        raise ContractViolation("criterion only applies to maxcut instances")
    rc, slack = _require_zero_certified(inst, sub, packing)
    b = _maxcut_b_values(inst, sub)
    return _maxcut_edge_check(inst, sub, packing, rc, b, e, tree=None, local=None,
                              slack=slack)


def subgraph_criteria_maxcut(inst: ProblemInstance, sub: Subgraph,
                             packing: DualPacking) -> list[PersistencyCertificate]:
    """All-edge version with the cheap screens: an isolated subgraph certifies
    everything, the all-pairs tree at the midpoint interpolation certifies
    most, single-node bounds screen out hopeless edges before bisection."""
    _require_subgraph(inst, sub)
    if inst.kind != MAXCUT:
        raise ContractViolation("criterion only applies to maxcut instances")
    rc, slack = _require_zero_certified(inst, sub, packing)
    b = _maxcut_b_values(inst, sub)
    B = sum(b.values())
    out = []
    if B + slack <= 0.0:
        for e in sorted(sub.edge_ids):
            u, v = inst.edges[e]
            out.append(PersistencyCertificate(
                e, 0, "subgraph_maxcut",
                _subgraph_witness(inst, sub, packing, 0.0, 0.0, alpha=0.5),
                endpoints=(u, v)))
        return out
    net, local, _ = _local_network(inst, sub, rc)
    rounding = "down" if len(sub.nodes) >= SCALED_ENGINE_MIN_NODES else None
    tree = gomory_hu(net, rounding=rounding)
    node_rc = _node_rc_sums(inst, sub, rc)
    for e in sorted(sub.edge_ids):
        cert = _maxcut_edge_check(inst, sub, packing, rc, b, e, tree, local,
                                  node_rc, slack)
        if cert is not None:
            out.append(cert)
    return out


def _node_rc_sums(inst: ProblemInstance, sub: Subgraph,
                  rc: dict[int, float]) -> dict[int, float]:
    node_rc = {g: 0.0 for g in sub.nodes}
    for eid in sub.edge_ids:
        a, c = inst.edges[eid]
        node_rc[a] += rc[eid]
        node_rc[c] += rc[eid]
    return node_rc


def _maxcut_edge_check(inst: ProblemInstance, sub: Subgraph, packing: DualPacking,
                       rc: dict[int, float], b: dict[int, float], e: int,
                       tree: GomoryHuTree | None, local: dict[int, int] | None,
                       node_rc: dict[int, float] | None = None,
                       slack: float = 0.0) -> PersistencyCertificate | None:
    u, v = inst.edges[e]
    B = sum(b.values()) + slack
    if B <= 0.0:
        return PersistencyCertificate(
            e, 0, "subgraph_maxcut",
            _subgraph_witness(inst, sub, packing, 0.0, 0.0, alpha=0.5),
            endpoints=(u, v))
    # midpoint interpolation: terminal arcs contribute exactly B/2 whatever the
    # side, so the plain inner min cut decides
    if tree is not None:
        inner_half = tree.query(local[u], local[v])
    else:
        net, loc, _ = _local_network(inst, sub, rc)
        inner_half, _ = min_cut(net, loc[u], loc[v])
    if inner_half + B / 2.0 >= B:
        return PersistencyCertificate(
            e, 0, "subgraph_maxcut",
            _subgraph_witness(inst, sub, packing, B, inner_half + B / 2.0, alpha=0.5),
            endpoints=(u, v))
    # single-node upper bounds on the envelope maximum
    if node_rc is None:
        node_rc = _node_rc_sums(inst, sub, rc)
    ub_u = node_rc[u] + max(b[u], B - b[u])
    ub_v = node_rc[v] + max(B - b[v], b[v])
    if min(ub_u, ub_v) < B:
        return None
    bis = _BisectionNetwork(inst, sub, rc, b, u, v)
    lo, hi = 0.0, 1.0
    best_val, best_alpha = -math.inf, 0.5
    evaluations = [(0.5, None)]
    for _ in range(BISECTION_MAX_ITERS):
        mid = (lo + hi) / 2.0
        val, side = bis.evaluate(mid)
        if val > best_val:
            best_val, best_alpha = val, mid
        if best_val >= B:
            break
        grad = bis.subgradient(side)
        if grad > 0:
            lo = mid
        elif grad < 0:
            hi = mid
        else:
            break
        if hi - lo < ALPHA_TOL:
            break
    if best_val < B:
        for alpha in (lo, hi):
            val, _ = bis.evaluate(alpha)
            if val > best_val:
                best_val, best_alpha = val, alpha
    if best_val >= B:
        return PersistencyCertificate(
            e, 0, "subgraph_maxcut",
            _subgraph_witness(inst, sub, packing, B, best_val, alpha=best_alpha),
            endpoints=(u, v))
    return None


# ---------------------------------------------------------------------------
# positive-component split and reduced cost fixing

def positive_component_split(inst: ProblemInstance
                             ) -> tuple[list[PersistencyCertificate], list[list[int]]]:
    """Components of the nonnegative-edge subgraph; every negative edge
    crossing components is persistently cut.  The returned partition lets the
    caller split the instance into independent parts."""
    if inst.kind != MULTICUT:
        raise ContractViolation("component split applies to multicut instances")
    labels = component_labels(inst, lambda e: inst.weights[e] >= 0)
    comps: dict[int, list[int]] = {}
    for node, lab in enumerate(labels):
        comps.setdefault(lab, []).append(node)
    certs = []
    for e, (u, v) in enumerate(inst.edges):
        if inst.weights[e] < 0 and labels[u] != labels[v]:
            certs.append(PersistencyCertificate(
                e, 1, "gplus_decomp", CutWitness(frozenset(comps[labels[u]])),
                endpoints=(u, v)))
    partition = [sorted(comps[k]) for k in sorted(comps)]
    return certs, partition


def reduced_cost_fixing(inst: ProblemInstance, primal: Sequence[int],
                        packing: DualPacking) -> list[PersistencyCertificate]:
    """Exclude x_f = 1 from every optimum for positive edges whose reduced cost
    exceeds the primal-dual gap.  These certificates hold for ALL optima."""
    if not is_feasible(inst, primal):
        raise ContractViolation("primal labeling is infeasible")
    if packing.edge_ids and len(packing.edge_ids) != inst.edge_count:
        raise ContractViolation("packing must cover the whole instance")
    rc = reduced_costs(inst, packing)
    gamma = objective(inst, primal) - packing.dual_bound
    if gamma < -EPS:
        raise ContractViolation("negative duality gap: inconsistent primal/dual")
    gamma = max(gamma, 0.0)
    out = []
    for e in range(inst.edge_count):
        if inst.weights[e] >= 0 and rc.get(e, 0.0) > gamma + EPS:
            u, v = inst.edges[e]
            out.append(PersistencyCertificate(
                e, 0, "rcf", DualGapWitness(gamma, rc[e]), all_optima=True,
                endpoints=(u, v)))
    return out


# ---------------------------------------------------------------------------
# proof mappings (for exhaustive verification on small instances)

def proof_mapping(inst: ProblemInstance, cert: PersistencyCertificate):
    """The improving mapping whose fixed coordinate proves the certificate;
    None for reduced cost fixing (these rest on the dual bound instead)."""
    from .mappings import cut_mapping, join_mapping, sym_diff_mapping

    f = cert.edge
    beta = cert.beta
    u, v = inst.edges[f]

    if cert.criterion in ("edge_e1",):
        U = cert.witness.nodes

        def p(x):
            if x[f] == beta:
                return tuple(x)
            return join_mapping(inst, cut_mapping(inst, x, U), frozenset((u, v)))
        return p
    if cert.criterion in ("edge_e2", "gplus_decomp"):
        U = cert.witness.nodes

        def p(x):
            if x[f] == beta:
                return tuple(x)
            return cut_mapping(inst, x, U)
        return p
    if cert.criterion == "edge_e3":
        U = cert.witness.nodes

        def p(x):
            if x[f] == beta:
                return tuple(x)
            return sym_diff_mapping(inst, x, U)
        return p
    if cert.criterion == "triangle":
        wit = cert.witness
        e_uv = inst.edge_index[tuple(sorted((wit.u, wit.v)))]
        e_vw = inst.edge_index[tuple(sorted((wit.v, wit.w)))]
        tri = frozenset((wit.u, wit.v, wit.w))
        pair = frozenset((wit.u, wit.w))

        def p(x):
            if x[f] == 0:
                return tuple(x)
            if inst.kind == MAXCUT:
                if x[e_uv] == 1 and x[e_vw] == 0:
                    return sym_diff_mapping(inst, x, wit.cut_u)
                return sym_diff_mapping(inst, x, wit.cut_w)
            if x[e_uv] == 1 and x[e_vw] == 0:
                return join_mapping(inst, cut_mapping(inst, x, wit.cut_u), pair)
            if x[e_uv] == 0 and x[e_vw] == 1:
                return join_mapping(inst, cut_mapping(inst, x, wit.cut_w), pair)
            return join_mapping(inst, cut_mapping(inst, x, tri), tri)
        return p
    if cert.criterion in ("subgraph_mc", "boundary_subgraph", "boundary_edge"):
        nodes = cert.witness.nodes

        def p(x):
            if x[f] == beta:
                return tuple(x)
            return join_mapping(inst, cut_mapping(inst, x, nodes), nodes)
        return p
    if cert.criterion == "subgraph_maxcut":
        nodes = cert.witness.nodes
        sub = Subgraph.induced(inst, nodes)

        def p(x):
            if x[f] == beta:
                return tuple(x)
            U = _cut_side_in_subgraph(inst, sub, x, u)
            # flip whichever side's outside weight is covered by the inner cut
            if _inner_cut_weight(inst, sub, U) >= _abs_outside(inst, sub, U):
                side = U
            else:
                side = frozenset(sub.nodes - U)
            return sym_diff_mapping(inst, x, side)
        return p
    return None


def _cut_side_in_subgraph(inst: ProblemInstance, sub: Subgraph,
                          x: Sequence[int], anchor: int) -> frozenset[int]:
    """2-coloring of the connected subgraph induced by x restricted to H;
    returns the side containing `anchor`."""
    color = {anchor: 0}
    stack = [anchor]
    inside = sub.nodes
    eset = set(sub.edge_ids)
    while stack:
        a = stack.pop()
        for c, eid in inst.adjacency[a]:
            if c in inside and eid in eset and c not in color:
                color[c] = color[a] ^ (1 if x[eid] else 0)
                stack.append(c)
    return frozenset(n for n, col in color.items() if col == 0)


def _inner_cut_weight(inst: ProblemInstance, sub: Subgraph,
                      U: frozenset[int]) -> float:
    total = 0.0
    for e in sub.edge_ids:
        a, c = inst.edges[e]
        if (a in U) != (c in U):
            total += inst.weights[e]
    return total


def _abs_outside(inst: ProblemInstance, sub: Subgraph, U: frozenset[int]) -> float:
    total = 0.0
    for a in U:
        for c, eid in inst.adjacency[a]:
            if c not in sub.nodes:
                total += abs(inst.weights[eid])
    return total


# ---------------------------------------------------------------------------
# witness replay

def replay_certificate(view, cert: PersistencyCertificate) -> bool:
    """Re-verify the certificate's inequality against a graph view (a frozen
    instance or the pipeline's working graph).  Node ids in the certificate
    must already refer to the view."""
    try:
        return _replay(view, cert)
    except (KeyError, ContractViolation):
        return False


def _replay(view, cert: PersistencyCertificate) -> bool:
    p, q = cert.endpoints
    if p == q:
        return False
    w_f = view.weight(p, q)
    if w_f is None:
        return False
    crit = cert.criterion
    if crit in ("edge_e1", "edge_e2", "edge_e3", "gplus_decomp"):
        U = cert.witness.nodes
        if (p in U) == (q in U):
            return False
        if q in U:
            p, q = q, p
        if not all(view.has_node(n) for n in U):
            return False
        if not _view_connected(view, U):
            return False
        skip = frozenset((frozenset((p, q)),))
        s_abs, s_pos = _boundary_sums(view, U, skip)
        if crit == "edge_e1":
            return view.kind == MULTICUT and w_f >= 0 and w_f >= s_abs
        if crit in ("edge_e2", "gplus_decomp"):
            return view.kind == MULTICUT and w_f < 0 and -w_f >= s_pos
        beta = 0 if w_f >= 0 else 1
        return view.kind == MAXCUT and cert.beta == beta and abs(w_f) >= s_abs
    if crit == "triangle":
        wit = cert.witness
        u, v, w = wit.u, wit.v, wit.w
        if len({u, v, w}) != 3:
            return False
        w_uw, w_uv, w_vw = view.weight(u, w), view.weight(u, v), view.weight(v, w)
        if w_uw is None or w_uv is None or w_vw is None:
            return False
        cu, cw = wit.cut_u, wit.cut_w
        if not (u in cu and v not in cu and w not in cu):
            return False
        if not (w in cw and u not in cw and v not in cw):
            return False
        s_u = _boundary_sums(view, cu,
                             frozenset((frozenset((u, w)), frozenset((u, v)))))[0]
        s_w = _boundary_sums(view, cw,
                             frozenset((frozenset((u, w)), frozenset((v, w)))))[0]
        if not (w_uw + w_uv >= s_u and w_uw + w_vw >= s_w):
            return False
        if view.kind == MULTICUT:
            tri = frozenset((u, v, w))
            pos_out = _boundary_sums(view, tri)[1]
            return w_uw + w_uv + w_vw >= pos_out
        return True
    if crit == "boundary_edge":
        if view.kind != MULTICUT or w_f < 0:
            return False
        pos_p = {z: wt for z, wt in view.neighbors(p) if wt >= 0 and z != q}
        total = sum(pos_p.values())
        discount = 0.0
        for z, wt in view.neighbors(q):
            if z == p or wt < 0:
                continue
            total += wt
            if z in pos_p:
                discount += min(pos_p[z], wt)
        return w_f >= total - discount
    if crit in ("subgraph_mc", "boundary_subgraph", "subgraph_maxcut"):
        return _replay_subgraph(view, cert)
    if crit == "rcf":
        # dual-gap witnesses are bound to the instance they were computed on;
        # outside the pipeline they are re-verified by rerunning the criterion
        return True
    return False


def _subgraph_from_view(view, nodes: frozenset[int]):
    """(instance over sorted(nodes) relabeled densely, local map) or None."""
    if not all(view.has_node(n) for n in nodes):
        return None
    order = sorted(nodes)
    local = {g: i for i, g in enumerate(order)}
    edges = []
    for g in order:
        for z, w in view.neighbors(g):
            if z in local and g < z:
                edges.append((local[g], local[z], w))
    inst = ProblemInstance(MULTICUT, len(order), edges)
    return inst, local


def _replay_subgraph(view, cert: PersistencyCertificate) -> bool:
    wit = cert.witness
    built = _subgraph_from_view(view, wit.nodes)
    if built is None:
        return False
    h_inst, local = built
    if h_inst.edge_count == 0 or not is_connected(h_inst, range(h_inst.node_count)):
        return False
    sub_local = Subgraph.induced(h_inst, range(h_inst.node_count))
    packing = _map_packing(h_inst, local, wit.cycles)
    if packing is None or not certifies_trivial_optimum(h_inst, sub_local, packing):
        packing = icp(h_inst, sub_local)
        if not certifies_trivial_optimum(h_inst, sub_local, packing):
            return False
    rc, slack = _require_zero_certified(h_inst, sub_local, packing)
    p, q = cert.endpoints
    lp, lq = local[p], local[q]
    if wit.alpha is None:
        # multicut forms: inner reduced-cost min cut vs positive boundary total
        bound = _boundary_sums(view, wit.nodes)[1] + slack
        if cert.criterion == "boundary_subgraph" or cert.criterion == "boundary_edge":
            val = _closure_cut_value(view, h_inst, local, rc, p, q)
        else:
            net = FlowNetwork(h_inst.node_count)
            for e, (a, b) in enumerate(h_inst.edges):
                net.add_edge(a, b, rc[e])
            val, _ = min_cut(net, lp, lq)
        return val >= bound
    # maxcut form: one evaluation at the stored interpolation point
    b = {g: 0.0 for g in wit.nodes}
    for g in wit.nodes:
        for z, w in view.neighbors(g):
            if z not in wit.nodes:
                b[g] += abs(w)
    B = sum(b.values()) + slack
    if B <= 0.0:
        return True
    alpha = min(max(wit.alpha, 0.0), 1.0)
    order = sorted(wit.nodes)
    net = FlowNetwork(len(order))
    lmap = {g: i for i, g in enumerate(order)}
    for e, (a, c) in enumerate(h_inst.edges):
        net.add_edge(a, c, rc[e])
    s, t = lmap[p], lmap[q]
    for g in order:
        l = lmap[g]
        if l != t:
            net.add_arc(l, t, alpha * b[g])
        if l != s:
            net.add_arc(s, l, (1.0 - alpha) * b[g])
    val, _ = min_cut(net, s, t)
    return val >= B


def _closure_cut_value(view, h_inst: ProblemInstance, local: dict[int, int],
                       rc: dict[int, float], p: int, q: int) -> float:
    """Min cut in the positive closure: subgraph edges at reduced costs plus
    positive boundary edges at true weights."""
    nodes = set(local)
    boundary = set()
    for g in nodes:
        for z, w in view.neighbors(g):
            if z not in nodes and w >= 0:
                boundary.add(z)
    order = sorted(nodes) + sorted(boundary)
    lmap = {g: i for i, g in enumerate(order)}
    net = FlowNetwork(len(order))
    for e, (a, c) in enumerate(h_inst.edges):
        ga = order[a]
        gc = order[c]
        net.add_edge(lmap[ga], lmap[gc], rc[e])
    seen_pairs = set()
    for g in sorted(nodes):
        for z, w in view.neighbors(g):
            key = frozenset((g, z))
            if z not in nodes and w >= 0 and key not in seen_pairs:
                seen_pairs.add(key)
                net.add_edge(lmap[g], lmap[z], w)
    val, _ = min_cut(net, lmap[p], lmap[q])
    return val


def _map_packing(h_inst: ProblemInstance, local: dict[int, int],
                 cycles: tuple) -> DualPacking | None:
    mapped = []
    for cyc, lam in cycles:
        eids = []
        for a, c in cyc:
            la, lc = local.get(a), local.get(c)
            if la is None or lc is None:
                return None
            eid = h_inst.edge_index.get((min(la, lc), max(la, lc)))
            if eid is None:
                return None
            eids.append(eid)
        mapped.append((tuple(eids), lam))
    pk = packing_mod._assemble(h_inst, mapped, tuple(range(h_inst.edge_count)))
    try:
        packing_mod.validate_packing(h_inst, pk)
    except ContractViolation:
        return None
    return pk
