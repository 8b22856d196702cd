"""s-t max-flow / min-cut with warm restarts, and Gomory-Hu trees (Gusfield).

The exact engine is an iterative Dinic on float capacities with an absolute
residual threshold; every solve re-derives its value from the cut it induces,
so the reported value is exactly the capacity of the returned side.  For bulk
all-pairs work on larger graphs an integer-scaled engine backed by
scipy.sparse.csgraph.maximum_flow is available; its rounding direction is
chosen by the caller so the resulting bound errs on the safe side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graphs import ContractViolation

FLOW_EPS = 1e-12
_SCALE_BITS = 40


class FlowNetwork:
    """Arc-list flow network.  Undirected edges are stored as a mutually
    inverse arc pair with equal capacities; directed arcs get a zero-capacity
    reverse arc.  `add_edge`/`add_arc` return the forward arc id."""

    def __init__(self, n: int):
        if n <= 0:
            raise ContractViolation("network needs at least one node")
        self.n = n
        self.to: list[int] = []
        self.cap: list[float] = []     # residual capacity
        self.base: list[float] = []    # original capacity
        self.adj: list[list[int]] = [[] for _ in range(n)]

    def _push(self, u: int, v: int, cap: float) -> int:
        a = len(self.to)
        self.to.append(v)
        self.cap.append(cap)
        self.base.append(cap)
        self.adj[u].append(a)
        return a

    def _check(self, u: int, v: int, cap: float) -> None:
        if not (0 <= u < self.n and 0 <= v < self.n) or u == v:
            raise ContractViolation(f"bad arc ({u},{v})")
        if not (cap >= 0.0) or not np.isfinite(cap):
            raise ContractViolation(f"capacity must be finite and >= 0, got {cap}")

    def add_edge(self, u: int, v: int, cap: float) -> int:
        self._check(u, v, cap)
        a = self._push(u, v, cap)
        self._push(v, u, cap)
        return a

    def add_arc(self, u: int, v: int, cap: float) -> int:
        self._check(u, v, cap)
        a = self._push(u, v, cap)
        self._push(v, u, 0.0)
        return a

    def reset(self) -> None:
        self.cap = list(self.base)

    def set_base_capacity(self, arc: int, cap: float) -> bool:
        """Update an arc's capacity keeping the current flow if it still fits.

        Returns False when the present flow violates the new capacity (the
        caller must reset before re-solving).
        """
        if not (cap >= 0.0) or not np.isfinite(cap):
            raise ContractViolation("capacity must be finite and >= 0")
        old = self.base[arc]
        self.base[arc] = cap
        self.cap[arc] += cap - old
        return self.cap[arc] >= -FLOW_EPS

    def copy(self) -> "FlowNetwork":
        out = FlowNetwork(self.n)
        out.to = list(self.to)
        out.cap = list(self.cap)
        out.base = list(self.base)
        out.adj = [list(a) for a in self.adj]
        return out


def _dinic(net: FlowNetwork, s: int, t: int) -> None:
    """Augment net.cap in place until no s-t path with residual > FLOW_EPS remains."""
    n, to, cap, adj = net.n, net.to, net.cap, net.adj
    while True:
        level = [-1] * n
        level[s] = 0
        queue = [s]
        for u in queue:
            for a in adj[u]:
                v = to[a]
                if level[v] < 0 and cap[a] > FLOW_EPS:
                    level[v] = level[u] + 1
                    queue.append(v)
        if level[t] < 0:
            return
        # blocking flow: one DFS walk with per-node arc pointers
        it = [0] * n
        path: list[int] = []
        u = s
        while True:
            if u == t:
                pushed = min(cap[a] for a in path)
                for a in path:
                    cap[a] -= pushed
                    cap[a ^ 1] += pushed
                cut_at = next(i for i, a in enumerate(path) if cap[a] <= FLOW_EPS)
                del path[cut_at:]
                u = to[path[-1]] if path else s
                continue
            advanced = False
            while it[u] < len(adj[u]):
                a = adj[u][it[u]]
                v = to[a]
                if cap[a] > FLOW_EPS and level[v] == level[u] + 1:
                    path.append(a)
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if advanced:
                continue
            if u == s:
                break               # blocking flow complete; next BFS phase
            level[u] = -1           # dead end, prune for this phase
            a = path.pop()
            u = to[a ^ 1]           # tail of the popped arc
            it[u] += 1


def _reachable(net: FlowNetwork, s: int) -> frozenset[int]:
    seen = [False] * net.n
    seen[s] = True
    stack = [s]
    to, cap, adj = net.to, net.cap, net.adj
    while stack:
        u = stack.pop()
        for a in adj[u]:
            v = to[a]
            if not seen[v] and cap[a] > FLOW_EPS:
                seen[v] = True
                stack.append(v)
    return frozenset(i for i, b in enumerate(seen) if b)


def _side_capacity(net: FlowNetwork, side: frozenset[int]) -> float:
    total = 0.0
    for u in side:
        for a in net.adj[u]:
            if net.to[a] not in side:
                total += net.base[a]
    return total


def min_cut(net: FlowNetwork, s: int, t: int, reset: bool = True
            ) -> tuple[float, frozenset[int]]:
    """Exact minimum s-t cut.

    Returns (value, side) where side is the set of nodes reachable from s in
    the final residual graph (the unique minimal source side over all maximum
    flows) and value is the recomputed capacity of delta(side).
    """
    if s == t:
        raise ContractViolation("source equals sink")
    if any(c < 0 for c in net.base):
        raise ContractViolation("negative capacity")
    if reset:
        net.reset()
    _dinic(net, s, t)
    side = _reachable(net, s)
    if t in side:
        raise ContractViolation("flow did not separate source from sink")
    return _side_capacity(net, side), side


def min_cut_incremental(net: FlowNetwork, s: int, t: int,
                        updates: Iterable[tuple[int, float]] = ()
                        ) -> tuple[float, frozenset[int]]:
    """Apply capacity updates and re-solve, reusing the existing flow when the
    updates leave it feasible.  Result equals a fresh min_cut on the updated
    network."""
    ok = True
    for arc, cap in updates:
        ok &= net.set_base_capacity(arc, cap)
    if not ok:
        net.reset()
    return min_cut(net, s, t, reset=False)


@dataclass
class GomoryHuTree:
    """Equivalent-flow tree: parent pointer and min-cut-to-parent value per node."""
    parent: list[int]
    value: list[float]

    def __post_init__(self):
        n = len(self.parent)
        self._depth = [0] * n
        for v in range(n):
            d, u = 0, v
            while self.parent[u] != u:
                u = self.parent[u]
                d += 1
            self._depth[v] = d

    def query(self, u: int, v: int) -> float:
        """Min over tree-path edge values = u-v min cut of the source network."""
        if u == v:
            raise ContractViolation("query needs distinct nodes")
        best = float("inf")
        du, dv = self._depth[u], self._depth[v]
        while du > dv:
            best = min(best, self.value[u])
            u = self.parent[u]
            du -= 1
        while dv > du:
            best = min(best, self.value[v])
            v = self.parent[v]
            dv -= 1
        while u != v:
            best = min(best, self.value[u], self.value[v])
            u, v = self.parent[u], self.parent[v]
        return best


def gomory_hu(net: FlowNetwork, rounding: str | None = None) -> GomoryHuTree:
    """Gusfield's scheme: n-1 max-flows on the unmodified network.

    rounding=None solves exactly; "up"/"down" use the integer-scaled scipy
    engine, making every tree value an upper/lower bound on the true min cut
    (exact when capacities are exactly representable at the chosen scale).
    """
    n = net.n
    parent = [0] * n
    value = [0.0] * n
    if rounding is None:
        solve = lambda s, t: min_cut(net, s, t)
    else:
        try:
            solver = _ScaledSolver(net, rounding)
            solve = solver.min_cut
        except ContractViolation:
            solve = lambda s, t: min_cut(net, s, t)
    for s in range(1, n):
        t = parent[s]
        val, side = solve(s, t)
        value[s] = val
        for j in range(n):
            if j != s and j in side and parent[j] == t:
                parent[j] = s
        if parent[t] in side:
            parent[s] = parent[t]
            parent[t] = s
            value[s] = value[t]
            value[t] = val
    return GomoryHuTree(parent, value)


class _ScaledSolver:
    """Fixed-point scaled min cut via scipy; keeps one csr matrix for many solves.

    rounding="up": capacities are rounded up, the returned value is the TRUE
    capacity of the returned side (an upper bound on the true min cut).
    rounding="down": capacities are rounded down and the returned value is the
    scaled optimum divided by the scale (a lower bound on the true min cut).
    """

    def __init__(self, net: FlowNetwork, rounding: str):
        if rounding not in ("up", "down"):
            raise ContractViolation("rounding must be 'up' or 'down'")
        from scipy.sparse import csr_matrix
        self.net = net
        self.rounding = rounding
        n = net.n
        total = sum(net.base)
        # scipy's max-flow works on int32 capacities: the total scaled
        # capacity (an upper bound on any flow value) must stay below 2^31
        scale = 1 << _SCALE_BITS
        while scale > 1 and total * scale >= float((1 << 31) - 1):
            scale //= 2
        if total * scale >= float((1 << 31) - 1):
            raise ContractViolation("capacities too large for the scaled engine")
        self.scale = scale
        rows, cols, vals = [], [], []
        for u in range(n):
            for a in net.adj[u]:
                c = net.base[a]
                if c <= 0:
                    continue
                sc = c * scale
                iv = int(np.ceil(sc)) if rounding == "up" else int(np.floor(sc))
                if iv <= 0:
                    continue
                rows.append(u)
                cols.append(net.to[a])
                vals.append(iv)
        self.mat = csr_matrix((np.asarray(vals, dtype=np.int32),
                               (np.asarray(rows), np.asarray(cols))),
                              shape=(n, n))
        self.mat.sum_duplicates()

    def min_cut(self, s: int, t: int) -> tuple[float, frozenset[int]]:
        from scipy.sparse.csgraph import breadth_first_order, maximum_flow
        res = maximum_flow(self.mat, s, t)
        residual = self.mat - res.flow
        residual.data = (residual.data > 0).astype(np.int32)
        residual.eliminate_zeros()
        order = breadth_first_order(residual, s, directed=True,
                                    return_predecessors=False)
        side = frozenset(int(v) for v in order)
        if self.rounding == "up":
            return _side_capacity(self.net, side), side
        return res.flow_value / self.scale, side


def brute_force_min_cut(net: FlowNetwork, s: int, t: int) -> float:
    """Enumerate all s/t-separating node sets; test oracle for small networks."""
    others = [v for v in range(net.n) if v not in (s, t)]
    if len(others) > 20:
        raise ContractViolation("brute force capped at 22 nodes")
    best = float("inf")
    for mask in range(1 << len(others)):
        side = {s}
        for i, v in enumerate(others):
            if mask >> i & 1:
                side.add(v)
        best = min(best, _side_capacity(net, frozenset(side)))
    return best
