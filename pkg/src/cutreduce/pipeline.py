"""Shrink pipeline: primal heuristics, candidate subgraphs, criterion rounds,
certificate application with replay guards, and solution lifting.

Certificates are collected per round on a frozen instance, then applied one at
a time to a mutable working graph.  Reduced-cost-fixing certificates (valid
for every optimum) are applied first without re-validation; all other
certificates guarantee only *some* optimum, so before each application the
pending witness is remapped onto the updated graph and its inequality is
replayed, which keeps the end-to-end objective identity sound.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field, replace
from heapq import heappop, heappush
from typing import Iterable, Sequence

from .certificates import (CRITERION_RANK, CutWitness, PersistencyCertificate,
                           SubgraphWitness, TriangleWitness)
from .criteria import (InstanceView, boundary_refined_criterion,
                       boundary_single_edge_certificate, edge_criteria,
                       positive_component_split, reduced_cost_fixing,
                       replay_certificate, subgraph_criteria_maxcut,
                       triangle_criteria)
from .graphs import (EPS, MAXCUT, MULTICUT, ContractViolation, Labeling,
                     ProblemInstance, Subgraph, component_labels,
                     cut_side_from_labeling, is_feasible, labeling_from_cut,
                     objective, zero_components)
from .mappings import SwitchRecord
from . import packing as packing_mod
from .packing import DualPacking, certifies_trivial_optimum, icp

LADDER = ("gplus", "edge", "triangle", "subgraph_greedy", "subgraph_icp", "rcf")


@dataclass
class PipelineConfig:
    criteria: tuple[str, ...] = LADDER
    max_rounds: int = 10
    seed: int = 0
    exact_triangle_flows: bool = False
    threads: int = 1

    def __post_init__(self):
        for c in self.criteria:
            if c not in LADDER:
                raise ContractViolation(f"unknown criterion stage {c!r}")


@dataclass
class RoundStats:
    round: int
    discovered: dict[str, int]
    applied: int
    recorded: int
    dropped: int
    subsumed: int
    remaining_nodes: int
    remaining_edges: int
    primal_objective: float | None
    dual_bound: float | None
    seconds: float


@dataclass
class RunReport:
    kind: str
    original_nodes: int
    original_edges: int
    rounds: list[RoundStats] = field(default_factory=list)
    total_seconds: float = 0.0

    @property
    def remaining_nodes(self) -> int:
        return self.rounds[-1].remaining_nodes if self.rounds else self.original_nodes

    @property
    def remaining_edges(self) -> int:
        return self.rounds[-1].remaining_edges if self.rounds else self.original_edges

    @property
    def node_fraction(self) -> float:
        return self.remaining_nodes / self.original_nodes if self.original_nodes else 1.0

    @property
    def edge_fraction(self) -> float:
        return self.remaining_edges / self.original_edges if self.original_edges else 1.0


# ---------------------------------------------------------------------------
# primal heuristics

def gaec_partition(inst: ProblemInstance) -> list[int]:
    """Greedy additive edge contraction: repeatedly merge the heaviest positive
    merged weight; returns a component label per node."""
    parent = list(range(inst.node_count))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    adj: list[dict[int, float]] = [dict() for _ in range(inst.node_count)]
    heap: list[tuple[float, int, int]] = []
    for (u, v), w in zip(inst.edges, inst.weights):
        adj[u][v] = w
        adj[v][u] = w
        if w > 0:
            heappush(heap, (-w, u, v))
    while heap:
        nw, u, v = heappop(heap)
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        # stale entries: the live weight must match
        a, b = (ru, rv) if ru < rv else (rv, ru)
        cur = adj[a].get(b)
        if cur is None or -nw != cur or cur <= 0:
            continue
        keep, rem = a, b
        parent[rem] = keep
        del adj[keep][rem]
        del adj[rem][keep]
        for z, w in adj[rem].items():
            del adj[z][rem]
            merged = adj[keep].get(z)
            total = w if merged is None else merged + w
            adj[keep][z] = total
            adj[z][keep] = total
            if total > 0:
                heappush(heap, (-total, min(keep, z), max(keep, z)))
        adj[rem].clear()
    return [find(v) for v in range(inst.node_count)]


def local_search_cut(inst: ProblemInstance, rng: random.Random,
                     restarts: int = 8, kl_passes: int = 20) -> Labeling:
    """Greedy cut heuristic for the min-form objective: best-improvement
    single flips to a local optimum, then lock-and-rollback passes that flip
    every node once in best-gain order and keep the best prefix.  Runs from
    the empty cut plus a few seeded random starts; fully deterministic."""
    import numpy as np
    n = inst.node_count
    U = np.fromiter((u for u, _ in inst.edges), dtype=np.int64,
                    count=inst.edge_count)
    V = np.fromiter((v for _, v in inst.edges), dtype=np.int64,
                    count=inst.edge_count)
    W = np.asarray(inst.weights)
    dense = np.zeros((n, n))
    dense[U, V] = W
    dense[V, U] = W

    def gains(side: np.ndarray) -> np.ndarray:
        sgn = np.where(side[:, None] == side[None, :], 1.0, -1.0)
        return (dense * sgn).sum(axis=1)

    def objective_of(side: np.ndarray) -> float:
        return float(W[side[U] != side[V]].sum())

    def flip_update(side, gain, node) -> None:
        side[node] = ~side[node]
        sgn = np.where(side == side[node], 1.0, -1.0)
        gain += 2.0 * dense[node] * sgn      # diagonal is zero: node unaffected
        gain[node] = -gain[node]

    def descend(side: np.ndarray) -> tuple[float, np.ndarray]:
        obj = objective_of(side)
        gain = gains(side)
        while True:
            node = int(np.argmin(gain))
            if gain[node] >= -1e-12:
                break
            obj += float(gain[node])
            flip_update(side, gain, node)
        return obj, side

    def kl_pass(side: np.ndarray, obj: float) -> tuple[float, np.ndarray, bool]:
        work = side.copy()
        gain = gains(work)
        locked = np.zeros(n, dtype=bool)
        order = []
        cum, best_cum, best_len = obj, obj, 0
        for _ in range(n):
            masked = np.where(locked, np.inf, gain)
            node = int(np.argmin(masked))
            cum += float(gain[node])
            flip_update(work, gain, node)
            locked[node] = True
            order.append(node)
            if cum < best_cum - 1e-12:
                best_cum, best_len = cum, len(order)
        if best_len == 0:
            return obj, side, False
        out = side.copy()
        for node in order[:best_len]:
            out[node] = ~out[node]
        return best_cum, out, True

    def optimize(side: np.ndarray) -> tuple[float, np.ndarray]:
        obj, side = descend(side)
        for _ in range(kl_passes):
            new_obj, new_side, improved = kl_pass(side, obj)
            if not improved:
                break
            obj, side = descend(new_side)
        return obj, side

    best_obj, best_side = optimize(np.zeros(n, dtype=bool))
    for trial in range(restarts):
        if trial % 2 == 0 and n >= 4:
            # perturb the incumbent: flip a random contiguous id block
            start = best_side.copy()
            i = rng.randrange(n - 1)
            j = rng.randrange(i + 1, n + 1)
            start[i:j] = ~start[i:j]
        else:
            start = np.array([rng.random() < 0.5 for _ in range(n)], dtype=bool)
        obj, side = optimize(start)
        if obj < best_obj - 1e-12:
            best_obj, best_side = obj, side
    return tuple(1 if best_side[u] != best_side[v] else 0 for u, v in inst.edges)


def gaec_primal(inst: ProblemInstance, seed: int = 0) -> Labeling:
    """Primal heuristic: GAEC partition for multicut, greedy local-search cut
    for maxcut."""
    if inst.kind == MULTICUT:
        labels = gaec_partition(inst)
        return tuple(1 if labels[u] != labels[v] else 0 for u, v in inst.edges)
    return local_search_cut(inst, random.Random(seed))


# ---------------------------------------------------------------------------
# candidate subgraphs

def _components_to_subgraphs(inst: ProblemInstance, labels: Sequence[int]
                             ) -> list[Subgraph]:
    groups: dict[int, list[int]] = {}
    for node, lab in enumerate(labels):
        groups.setdefault(lab, []).append(node)
    subs = []
    for key in sorted(groups):
        nodes = groups[key]
        if len(nodes) >= 2:
            subs.append(Subgraph.induced(inst, nodes))
    return subs


def gaec_candidates(inst: ProblemInstance, primal: Sequence[int]) -> list[Subgraph]:
    """Induced subgraphs on the primal partition's clusters (multicut)."""
    labels = zero_components(inst, primal)
    return _components_to_subgraphs(inst, labels)


def residual_candidates(inst: ProblemInstance, packing: DualPacking
                        ) -> list[Subgraph]:
    """Induced subgraphs on the components of the positive-residual graph."""
    from .packing import reduced_costs
    rc = reduced_costs(inst, packing)
    labels = component_labels(inst, lambda e: rc.get(e, 0.0) > 0.0)
    return _components_to_subgraphs(inst, labels)


def generate_candidates(inst: ProblemInstance, primal: Sequence[int],
                        packing: DualPacking) -> list[Subgraph]:
    """Union of primal-cluster candidates (multicut only) and positive-residual
    components: connected induced subgraphs with at least two nodes, deduplicated,
    in deterministic order."""
    subs: list[Subgraph] = []
    seen: set[frozenset[int]] = set()
    sources = []
    if inst.kind == MULTICUT:
        sources.append(gaec_candidates(inst, primal))
    sources.append(residual_candidates(inst, packing))
    for group in sources:
        for sub in group:
            if sub.nodes not in seen:
                seen.add(sub.nodes)
                subs.append(sub)
    return subs


# ---------------------------------------------------------------------------
# mutable working graph (one shrink round)

class WorkingGraph:
    """Adjacency-dict graph over the round-start instance's node ids; merges
    keep the smaller root id.  Tracks, per original edge of the overall run,
    the bundle it belongs to, so fixes and switch parities can be recorded."""

    def __init__(self, inst: ProblemInstance):
        self.kind = inst.kind
        n = inst.node_count
        self.parent = list(range(n))
        self.size = [1] * n
        self.alive: set[int] = set(range(n))
        self.adj: list[dict[int, float]] = [dict() for _ in range(n)]
        for (u, v), w in zip(inst.edges, inst.weights):
            self.adj[u][v] = w
            self.adj[v][u] = w
        self.constant_delta = 0.0
        self.bundles: dict[frozenset[int], list[int]] = {}
        self.mutated = False
        self.touched: set[int] = set()

    # -- view protocol ------------------------------------------------------
    def root(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def has_node(self, u: int) -> bool:
        return u in self.alive

    def node_ids(self) -> Iterable[int]:
        return sorted(self.alive)

    def weight(self, u: int, v: int) -> float | None:
        return self.adj[u].get(v)

    def neighbors(self, u: int) -> Iterable[tuple[int, float]]:
        return self.adj[u].items()

    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    # -- tracking -----------------------------------------------------------
    def attach_bundles(self, bundles: dict[frozenset[int], list[int]]) -> None:
        self.bundles = bundles

    def bundle(self, u: int, v: int) -> list[int]:
        return self.bundles.get(frozenset((u, v)), [])

    def _touch(self, nodes: Iterable[int]) -> None:
        self.mutated = True
        self.touched.update(nodes)

    # -- operations ---------------------------------------------------------
    def contract(self, u: int, v: int) -> list[int]:
        """Merge v's root class into u's (smaller id kept); returns the original
        edge ids bundled on the contracted pair."""
        if u not in self.alive or v not in self.alive or u == v:
            raise ContractViolation("contract needs two live distinct nodes")
        keep, rem = (u, v) if u < v else (v, u)
        self._touch({keep, rem} | set(self.adj[keep]) | set(self.adj[rem]))
        gone = self.bundles.pop(frozenset((keep, rem)), [])
        self.adj[keep].pop(rem, None)
        self.adj[rem].pop(keep, None)
        for z, w in list(self.adj[rem].items()):
            del self.adj[z][rem]
            merged = self.adj[keep].get(z)
            total = w if merged is None else merged + w
            self.adj[keep][z] = total
            self.adj[z][keep] = total
            key_old = frozenset((rem, z))
            if key_old in self.bundles:
                self.bundles.setdefault(frozenset((keep, z)), []).extend(
                    self.bundles.pop(key_old))
        self.adj[rem].clear()
        self.alive.discard(rem)
        self.parent[rem] = keep
        self.size[keep] += self.size[rem]
        return gone

    def switch_cut(self, side: set[int]) -> tuple[float, list[int]]:
        """Flip weight signs on delta(side); returns (constant delta, original
        edge ids whose parity flips)."""
        if not side <= self.alive:
            raise ContractViolation("switch cut contains dead nodes")
        delta_const = 0.0
        flipped: list[int] = []
        for u in sorted(side):
            for z, w in list(self.adj[u].items()):
                if z in side:
                    continue
                delta_const += w
                self.adj[u][z] = -w
                self.adj[z][u] = -w
                flipped.extend(self.bundle(u, z))
        self._touch(set(side) | {z for u in side for z in self.adj[u]})
        self.constant_delta += delta_const
        return delta_const, flipped

    def remove_edge(self, u: int, v: int) -> tuple[float, list[int]]:
        """Delete the edge, paying its weight into the constant (value-1 fix)."""
        w = self.adj[u].pop(v, None)
        if w is None:
            raise ContractViolation(f"no edge ({u},{v}) to remove")
        del self.adj[v][u]
        self._touch({u, v})
        self.constant_delta += w
        return w, self.bundles.pop(frozenset((u, v)), [])

    def finalize(self, inst: ProblemInstance
                 ) -> tuple[ProblemInstance, dict[int, int]]:
        """Fresh instance over the live roots (renumbered densely, ascending)."""
        order = sorted(self.alive)
        remap = {r: i for i, r in enumerate(order)}
        edges = []
        for u in order:
            for z, w in self.adj[u].items():
                if u < z:
                    edges.append((remap[u], remap[z], w))
        out = ProblemInstance(self.kind, len(order), edges,
                              inst.objective_constant + self.constant_delta)
        return out, remap


# ---------------------------------------------------------------------------
# shrink state and operation log

@dataclass
class ShrinkOp:
    """One recorded state mutation, in the node ids current at its round."""
    op: str                                   # switch | contract | switch_contract
    round: int                                # | remove_edges | collapse | renumber
    nodes: tuple[int, ...] = ()
    edge: tuple[int, int] | None = None
    edges: tuple[tuple[int, int], ...] = ()
    constant_delta: float = 0.0
    certificate: PersistencyCertificate | None = None
    certificates: tuple[PersistencyCertificate, ...] = ()
    cycles: tuple = ()


@dataclass
class CollapsePlan:
    """A connected piece whose packing certifies a zero optimum and that has no
    weighted boundary: every inner edge is jointly fixable to 0."""
    nodes: frozenset[int]
    cycles: tuple
    certs: tuple[PersistencyCertificate, ...]


class ShrinkState:
    """Original instance, the current shrunk instance and the invertible
    bookkeeping between them (node map, per-edge fixes, switch log)."""

    def __init__(self, inst: ProblemInstance):
        self.original = inst
        self.current = inst
        self.node_map: list[int] = list(range(inst.node_count))
        self.edge_parity: list[int] = [0] * inst.edge_count
        self.fixed: dict[int, int] = {}            # orig edge -> beta_orig
        self.switch_log: list[SwitchRecord] = []
        self.certificates: list[PersistencyCertificate] = []
        self.recorded_edges: set[int] = set()
        self.oplog: list[ShrinkOp] = []
        self.lemma1_applied = False

    @property
    def constant(self) -> float:
        return self.current.objective_constant - self.original.objective_constant

    def edge_map(self) -> list[tuple[str, int]]:
        """Per original edge: ("fixed", beta) or ("current", current edge id)."""
        out = []
        cur_index = self.current.edge_index
        for e, (p, q) in enumerate(self.original.edges):
            if e in self.fixed:
                out.append(("fixed", self.fixed[e]))
            else:
                a, b = self.node_map[p], self.node_map[q]
                out.append(("current", cur_index[(min(a, b), max(a, b))]))
        return out

    def build_bundles(self) -> dict[frozenset[int], list[int]]:
        bundles: dict[frozenset[int], list[int]] = {}
        for e, (p, q) in enumerate(self.original.edges):
            if e in self.fixed:
                continue
            a, b = self.node_map[p], self.node_map[q]
            if a == b:
                raise ContractViolation("unfixed edge inside a merged node")
            bundles.setdefault(frozenset((a, b)), []).append(e)
        return bundles

    # -- archiving ----------------------------------------------------------
    def _archive(self, cert: PersistencyCertificate, orig_edge: int,
                 beta_orig: int, rnd: int) -> None:
        self.certificates.append(replace(
            cert, edge=orig_edge, beta=beta_orig, round=rnd,
            all_optima=cert.all_optima and not self.lemma1_applied))

    def archive_fixed(self, cert: PersistencyCertificate, gone: list[int],
                      beta_work: int, rnd: int) -> None:
        for orig in gone:
            beta_orig = beta_work ^ self.edge_parity[orig]
            self.fixed[orig] = beta_orig
            self._archive(cert, orig, beta_orig, rnd)

    def archive_recorded(self, cert: PersistencyCertificate,
                         bundle: list[int], rnd: int) -> int:
        fresh = 0
        for orig in bundle:
            if orig in self.recorded_edges or orig in self.fixed:
                continue
            self.recorded_edges.add(orig)
            beta_orig = cert.beta ^ self.edge_parity[orig]
            self._archive(cert, orig, beta_orig, rnd)
            fresh += 1
        return fresh


# ---------------------------------------------------------------------------
# witness remapping onto the working graph

def _map_nodeset(work: WorkingGraph, nodes: frozenset[int]
                 ) -> tuple[frozenset[int], bool]:
    counts: dict[int, int] = {}
    for n in nodes:
        r = work.root(n)
        counts[r] = counts.get(r, 0) + 1
    for r, c in counts.items():
        if c != work.size[r]:
            return frozenset(), False
    return frozenset(counts), True


def _map_certificate(work: WorkingGraph, cert: PersistencyCertificate
                     ) -> tuple[str, PersistencyCertificate | None]:
    """Rewrite the certificate onto the current roots.
    Returns (status, mapped) with status in {ok, subsumed, torn}."""
    a, b = cert.endpoints
    ra, rb = work.root(a), work.root(b)
    if ra == rb:
        return ("subsumed" if cert.beta == 0 else "torn"), None
    lo, hi = (ra, rb) if ra < rb else (rb, ra)
    wit = cert.witness
    if isinstance(wit, CutWitness):
        mapped, ok = _map_nodeset(work, wit.nodes)
        if not ok:
            return "torn", None
        new_wit = CutWitness(mapped)
    elif isinstance(wit, TriangleWitness):
        u, v, w = work.root(wit.u), work.root(wit.v), work.root(wit.w)
        if len({u, v, w}) != 3:
            return "torn", None
        cu, ok1 = _map_nodeset(work, wit.cut_u)
        cw, ok2 = _map_nodeset(work, wit.cut_w)
        if not (ok1 and ok2):
            return "torn", None
        new_wit = TriangleWitness(u=u, v=v, w=w, cut_u=cu, cut_w=cw)
    elif isinstance(wit, SubgraphWitness):
        mapped, ok = _map_nodeset(work, wit.nodes)
        if not ok:
            return "torn", None
        cycles = tuple(
            (tuple((work.root(x), work.root(y)) for x, y in cyc), lam)
            for cyc, lam in wit.cycles)
        new_wit = replace(wit, nodes=mapped, cycles=cycles)
    else:
        new_wit = wit
    return "ok", replace(cert, endpoints=(lo, hi), witness=new_wit)


# ---------------------------------------------------------------------------
# certificate collection

def _collect(state: ShrinkState, config: PipelineConfig, rng: random.Random,
             rnd: int) -> tuple[list[PersistencyCertificate], list[CollapsePlan],
                                float | None, float | None]:
    cur = state.current
    stages = config.criteria
    certs: list[PersistencyCertificate] = []
    plans: list[CollapsePlan] = []
    primal = None
    primal_obj = None
    dual_bound = None

    if cur.kind == MAXCUT and stages:
        primal = local_search_cut(cur, rng)
        obj = objective(cur, primal)
        if obj < -EPS:
            _apply_global_switch(state, primal, rnd)
            cur = state.current
            primal = tuple(0 for _ in range(cur.edge_count))
            obj = 0.0
        primal_obj = obj
    elif cur.kind == MULTICUT and ("subgraph_greedy" in stages or "rcf" in stages):
        primal = gaec_primal(cur)
        primal_obj = objective(cur, primal)

    if "gplus" in stages and cur.kind == MULTICUT:
        gp_certs, _ = positive_component_split(cur)
        certs.extend(gp_certs)
    if "edge" in stages:
        certs.extend(edge_criteria(cur))
    if "triangle" in stages:
        certs.extend(triangle_criteria(cur, exact_flows=config.exact_triangle_flows))
    if "subgraph_greedy" in stages and cur.kind == MULTICUT and primal is not None:
        for e, w in enumerate(cur.weights):
            if w >= 0:
                cert = boundary_single_edge_certificate(cur, e)
                if cert is not None:
                    certs.append(cert)
        for sub in gaec_candidates(cur, primal):
            pk = icp(cur, sub)
            if certifies_trivial_optimum(cur, sub, pk):
                certs.extend(boundary_refined_criterion(cur, sub, pk))
    packing = None
    if "subgraph_icp" in stages or "rcf" in stages:
        packing = icp(cur)
        dual_bound = packing.dual_bound
    if "subgraph_icp" in stages and packing is not None:
        collapsed_nodes: set[int] = set()
        from .graphs import connected_components
        for comp in connected_components(cur):
            if len(comp) < 2:
                continue
            sub = Subgraph.induced(cur, comp)
            if not sub.edge_ids:
                continue
            pk = packing.restricted_to(cur, sub)
            if not certifies_trivial_optimum(cur, sub, pk):
                pk = icp(cur, sub)
                if not certifies_trivial_optimum(cur, sub, pk):
                    continue
            tag = "subgraph_mc" if cur.kind == MULTICUT else "subgraph_maxcut"
            cycles = tuple((tuple(cur.edges[e] for e in cyc), lam)
                           for cyc, lam in pk.cycles)
            wit_alpha = None if cur.kind == MULTICUT else 0.5
            comp_certs = tuple(
                PersistencyCertificate(
                    e, 0, tag,
                    SubgraphWitness(nodes=sub.nodes, cycles=cycles,
                                    boundary_total=0.0, cut_value=0.0,
                                    alpha=wit_alpha),
                    endpoints=cur.edges[e])
                for e in sorted(sub.edge_ids))
            plans.append(CollapsePlan(sub.nodes, cycles, comp_certs))
            certs.extend(comp_certs)
            collapsed_nodes.update(comp)
        for sub in residual_candidates(cur, packing):
            if sub.nodes <= collapsed_nodes or not sub.edge_ids:
                continue
            pk = packing.restricted_to(cur, sub)
            if not certifies_trivial_optimum(cur, sub, pk):
                pk = icp(cur, sub)
                if not certifies_trivial_optimum(cur, sub, pk):
                    continue
            if cur.kind == MULTICUT:
                certs.extend(boundary_refined_criterion(cur, sub, pk))
            else:
                certs.extend(subgraph_criteria_maxcut(cur, sub, pk))
    if "rcf" in stages and packing is not None and primal is not None:
        certs.extend(reduced_cost_fixing(cur, primal, packing))
    return certs, plans, primal_obj, dual_bound


def _apply_global_switch(state: ShrinkState, y: Sequence[int], rnd: int) -> None:
    from .mappings import switch as switch_op
    cur = state.current
    new_inst, rec = switch_op(cur, y)
    side = rec.switched_cut
    preimage = frozenset(p for p in range(state.original.node_count)
                         if state.node_map[p] in side)
    state.switch_log.append(SwitchRecord(preimage, rec.constant_delta))
    for e, (p, q) in enumerate(state.original.edges):
        if e in state.fixed:
            continue
        if (state.node_map[p] in side) != (state.node_map[q] in side):
            state.edge_parity[e] ^= 1
    state.oplog.append(ShrinkOp("switch", rnd, nodes=tuple(sorted(side)),
                                constant_delta=rec.constant_delta))
    state.current = new_inst


# ---------------------------------------------------------------------------
# certificate application

def _dedupe(certs: list[PersistencyCertificate]) -> list[PersistencyCertificate]:
    best: dict[int, PersistencyCertificate] = {}
    for cert in certs:
        old = best.get(cert.edge)
        if old is None or CRITERION_RANK[cert.criterion] < CRITERION_RANK[old.criterion]:
            best[cert.edge] = cert
    return sorted(best.values(),
                  key=lambda c: (CRITERION_RANK[c.criterion], c.edge))


def _replay_on_work(work: WorkingGraph, cert: PersistencyCertificate) -> bool:
    return replay_certificate(work, cert)


def _apply_round(state: ShrinkState, certs: list[PersistencyCertificate],
                 plans: list[CollapsePlan], rnd: int
                 ) -> tuple[int, int, int, int]:
    """Apply this round's certificates to a working copy of the current
    instance; returns (applied, recorded, dropped, subsumed) counts."""
    cur = state.current
    work = WorkingGraph(cur)
    start_bundles = state.build_bundles()
    work.attach_bundles({k: list(v) for k, v in start_bundles.items()})
    applied = recorded = dropped = subsumed = 0
    ordered = _dedupe(certs)

    # record-only certificates (multicut beta=1 outside the component split):
    # they mutate nothing and their claim is anchored to the round-start
    # instance, so archive them against the round-start bundles up front
    if cur.kind == MULTICUT:
        for cert in ordered:
            if cert.beta == 1 and cert.criterion != "gplus_decomp":
                key = frozenset(cert.endpoints)
                recorded += state.archive_recorded(
                    cert, start_bundles.get(key, []), rnd)

    def fix_contract(cert: PersistencyCertificate, lo: int, hi: int) -> None:
        nonlocal applied
        gone = work.contract(lo, hi)
        state.archive_fixed(cert, gone, 0, rnd)
        state.oplog.append(ShrinkOp("contract", rnd, edge=(lo, hi),
                                    certificate=cert))
        applied += 1

    # 1) reduced cost fixing: all-optima certificates compose freely
    for cert in [c for c in ordered if c.criterion == "rcf"]:
        a, b = cert.endpoints
        ra, rb = work.root(a), work.root(b)
        if ra == rb:
            subsumed += 1
            continue
        fix_contract(cert, min(ra, rb), max(ra, rb))

    # 2) positive-component split: one joint improving mapping
    gplus = [c for c in ordered if c.criterion == "gplus_decomp"]
    if gplus:
        valid: list[tuple[tuple[int, int], PersistencyCertificate]] = []
        seen_pairs: set[tuple[int, int]] = set()
        labels = _positive_labels(work)
        comps: dict[int, list[int]] = {}
        for node, lab in labels.items():
            comps.setdefault(lab, []).append(node)
        for cert in gplus:
            a, b = cert.endpoints
            ra, rb = work.root(a), work.root(b)
            if ra == rb:
                dropped += 1
                continue
            pair = (min(ra, rb), max(ra, rb))
            if pair in seen_pairs:
                subsumed += 1          # merged with an already-scheduled removal
                continue
            w = work.weight(ra, rb)
            if w is None or w >= 0 or labels[ra] == labels[rb]:
                dropped += 1
                continue
            seen_pairs.add(pair)
            mapped = replace(cert, endpoints=pair,
                             witness=CutWitness(frozenset(comps[labels[ra]])))
            valid.append((pair, mapped))
        if valid:
            state.lemma1_applied = True
            pairs = []
            archived = []
            total_delta = -work.constant_delta
            for (lo, hi), cert in valid:
                _, gone = work.remove_edge(lo, hi)
                state.archive_fixed(cert, gone, 1, rnd)
                pairs.append((lo, hi))
                archived.append(cert)
                applied += 1
            total_delta += work.constant_delta
            state.oplog.append(ShrinkOp(
                "remove_edges", rnd, edges=tuple(pairs),
                constant_delta=total_delta, certificates=tuple(archived)))

    # 3) whole-piece collapses (zero boundary, certified zero optimum)
    planned_edges: set[int] = set()
    for plan in plans:
        planned_edges.update(c.edge for c in plan.certs)
    for plan in plans:
        mapped, ok = _map_nodeset(work, plan.nodes)
        if not ok or len(mapped) < 2:
            dropped += len(plan.certs)
            continue
        if work.mutated and not _collapse_still_valid(work, mapped):
            dropped += len(plan.certs)
            continue
        state.lemma1_applied = True
        keep = min(mapped)
        rep = plan.certs[0]
        for other in sorted(mapped - {keep}):
            gone = work.contract(keep, other)
            state.archive_fixed(rep, gone, 0, rnd)
        state.oplog.append(ShrinkOp("collapse", rnd, nodes=tuple(sorted(mapped)),
                                    certificate=rep, cycles=plan.cycles))
        applied += 1

    # 4) remaining certificates, one at a time with replay
    for cert in ordered:
        if cert.criterion in ("rcf", "gplus_decomp") or cert.edge in planned_edges:
            continue
        status, mapped = _map_certificate(work, cert)
        if status == "subsumed":
            subsumed += 1
            continue
        if status == "torn":
            dropped += 1
            continue
        if cur.kind == MULTICUT and mapped.beta == 1:
            continue            # archived up front, nothing to apply
        if work.mutated and not _replay_on_work(work, mapped):
            dropped += 1
            continue
        state.lemma1_applied = True
        lo, hi = mapped.endpoints
        if cur.kind == MAXCUT and mapped.beta == 1:
            delta_const, flipped = work.switch_cut({lo})
            for orig in flipped:
                state.edge_parity[orig] ^= 1
            preimage = frozenset(
                p for p in range(state.original.node_count)
                if work.root(state.node_map[p]) == lo)
            state.switch_log.append(SwitchRecord(preimage, delta_const))
            gone = work.contract(lo, hi)
            state.archive_fixed(mapped, gone, 0, rnd)
            state.oplog.append(ShrinkOp("switch_contract", rnd, nodes=(lo,),
                                        edge=(lo, hi), constant_delta=delta_const,
                                        certificate=mapped))
            applied += 1
        else:
            fix_contract(mapped, lo, hi)

    if work.mutated:
        new_cur, remap = work.finalize(cur)
        state.node_map = [remap[work.root(state.node_map[p])]
                          for p in range(state.original.node_count)]
        state.oplog.append(ShrinkOp("renumber", rnd))
        state.current = new_cur
    return applied, recorded, dropped, subsumed


def _positive_labels(work: WorkingGraph) -> dict[int, int]:
    labels: dict[int, int] = {}
    for start in sorted(work.alive):
        if start in labels:
            continue
        labels[start] = start
        stack = [start]
        while stack:
            u = stack.pop()
            for z, w in work.neighbors(u):
                if w >= 0 and z not in labels:
                    labels[z] = start
                    stack.append(z)
    return labels


def _collapse_still_valid(work: WorkingGraph, nodes: frozenset[int]) -> bool:
    """Zero weighted boundary plus a re-derived zero-optimum packing."""
    for u in nodes:
        for z, w in work.neighbors(u):
            if z not in nodes and abs(w) > 0.0:
                return False
    built = _work_subinstance(work, nodes)
    if built is None:
        return False
    h_inst, _ = built
    sub = Subgraph.induced(h_inst, range(h_inst.node_count))
    pk = icp(h_inst, sub)
    return certifies_trivial_optimum(h_inst, sub, pk)


def _work_subinstance(work: WorkingGraph, nodes: frozenset[int]):
    order = sorted(nodes)
    local = {g: i for i, g in enumerate(order)}
    edges = []
    for g in order:
        if not work.has_node(g):
            return None
        for z, w in work.neighbors(g):
            if z in local and g < z:
                edges.append((local[g], local[z], w))
    return ProblemInstance(MULTICUT, len(order), edges), local


# ---------------------------------------------------------------------------
# the driver

def run(inst: ProblemInstance, config: PipelineConfig | None = None
        ) -> tuple[ShrinkState, RunReport]:
    """Run criterion rounds until a fixpoint or the round limit; returns the
    shrink state (with certificates in original edge ids) and the run report."""
    if config is None:
        config = PipelineConfig()
    state = ShrinkState(inst)
    report = RunReport(inst.kind, inst.node_count, inst.edge_count)
    rng = random.Random(config.seed)
    t_start = time.perf_counter()
    for rnd in range(1, config.max_rounds + 1):
        t0 = time.perf_counter()
        if state.current.edge_count == 0 or not config.criteria:
            break
        ops_before = len(state.oplog)
        certs, plans, primal_obj, dual_bound = _collect(state, config, rng, rnd)
        discovered: dict[str, int] = {}
        for c in certs:
            discovered[c.criterion] = discovered.get(c.criterion, 0) + 1
        applied, recorded, dropped, subsumed = _apply_round(state, certs, plans, rnd)
        switched = any(op.op == "switch" for op in state.oplog[ops_before:])
        report.rounds.append(RoundStats(
            round=rnd, discovered=discovered, applied=applied, recorded=recorded,
            dropped=dropped, subsumed=subsumed,
            remaining_nodes=state.current.node_count,
            remaining_edges=state.current.edge_count,
            primal_objective=primal_obj, dual_bound=dual_bound,
            seconds=time.perf_counter() - t0))
        if applied == 0 and recorded == 0 and not switched:
            break
    report.total_seconds = time.perf_counter() - t_start
    return state, report


# ---------------------------------------------------------------------------
# lifting solutions of the shrunk instance back to the original

def lift(state: ShrinkState, y: Sequence[int]) -> Labeling:
    """Feasible labeling of the original instance that restricts to y, honours
    every fix, and satisfies objective(original, lift(y)) =
    objective(current, y) + accumulated constant."""
    cur = state.current
    if not is_feasible(cur, y):
        raise ContractViolation("labeling is infeasible for the current instance")
    orig = state.original
    if cur.kind == MULTICUT:
        comp = zero_components(cur, y)
        return tuple(
            1 if comp[state.node_map[p]] != comp[state.node_map[q]] else 0
            for p, q in orig.edges)
    side = cut_side_from_labeling(cur, y)
    in_side = [False] * orig.node_count
    for p in range(orig.node_count):
        in_side[p] = state.node_map[p] in side
    for rec in state.switch_log:
        for p in rec.switched_cut:
            in_side[p] = not in_side[p]
    return tuple(1 if in_side[p] != in_side[q] else 0 for p, q in orig.edges)
