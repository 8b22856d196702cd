"""Elementary feasibility-preserving mappings on multicuts and cuts, plus the
max-cut switching transform.

These are the building blocks behind every persistency criterion: adding a cut
to a multicut, joining the components touching a connected node set, taking
the symmetric difference with a cut, and flipping weight signs across a cut
while shifting the objective by a constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .graphs import (MAXCUT, ContractViolation, Labeling, ProblemInstance,
                     cut_side_from_labeling, delta, is_connected,
                     is_cut_feasible, is_multicut_feasible)


@dataclass(frozen=True)
class SwitchRecord:
    """One application of the switching transform: signs flipped on delta(U)."""
    switched_cut: frozenset[int]
    constant_delta: float


class _DSU:
    def __init__(self, n: int):
        self.p = list(range(n))

    def find(self, x: int) -> int:
        p = self.p
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra > rb:
                ra, rb = rb, ra
            self.p[rb] = ra


def _check_multicut(inst: ProblemInstance, x: Sequence[int]) -> None:
    if len(x) != inst.edge_count:
        raise ContractViolation("labeling size mismatch")
    if not is_multicut_feasible(inst, x):
        raise ContractViolation("labeling is not a feasible multicut")


def _check_connected(inst: ProblemInstance, U: Iterable[int]) -> set[int]:
    s = set(U)
    if not s:
        raise ContractViolation("node set must be non-empty")
    if not is_connected(inst, s):
        raise ContractViolation("node set must induce a connected subgraph")
    return s


def cut_mapping(inst: ProblemInstance, x: Sequence[int], U: Iterable[int]) -> Labeling:
    """Force every edge of delta(U) to 1; multicut-feasibility is preserved
    for connected U."""
    _check_multicut(inst, x)
    s = _check_connected(inst, U)
    out = list(x)
    for e in delta(inst, s):
        out[e] = 1
    return tuple(out)


def join_mapping(inst: ProblemInstance, x: Sequence[int], U: Iterable[int]) -> Labeling:
    """Merge every component that intersects the connected set U.

    Implemented by union-find over the 0-labeled edges plus the edges inside
    U: an edge ends up 0 iff its endpoints are connected in that subgraph.
    """
    _check_multicut(inst, x)
    s = _check_connected(inst, U)
    dsu = _DSU(inst.node_count)
    for e, (u, v) in enumerate(inst.edges):
        if x[e] == 0 or (u in s and v in s):
            dsu.union(u, v)
    return tuple(0 if dsu.find(u) == dsu.find(v) else x[e]
                 for e, (u, v) in enumerate(inst.edges))


def sym_diff_mapping(inst: ProblemInstance, x: Sequence[int], U: Iterable[int]) -> Labeling:
    """Flip x on delta(U); cuts are closed under symmetric differences."""
    if len(x) != inst.edge_count:
        raise ContractViolation("labeling size mismatch")
    if not is_cut_feasible(inst, x):
        raise ContractViolation("labeling is not a feasible cut")
    s = set(U)
    out = list(x)
    for e in delta(inst, s):
        out[e] = 1 - out[e]
    return tuple(out)


def switch(inst: ProblemInstance, y: Sequence[int]) -> tuple[ProblemInstance, SwitchRecord]:
    """Flip weight signs on the cut y and absorb sum(theta_e for y_e=1) into the
    objective constant.  Objectives correspond via x <-> x xor y."""
    if inst.kind != MAXCUT:
        raise ContractViolation("switching is only defined for maxcut instances")
    side = cut_side_from_labeling(inst, y)
    if side is None:
        raise ContractViolation("switch labeling is not a feasible cut")
    delta_const = sum(w for w, yi in zip(inst.weights, y) if yi)
    new_weights = [(-w if yi else w) for w, yi in zip(inst.weights, y)]
    out = ProblemInstance(MAXCUT, inst.node_count,
                          [(u, v, w) for (u, v), w in zip(inst.edges, new_weights)],
                          inst.objective_constant + delta_const)
    return out, SwitchRecord(frozenset(side), delta_const)
