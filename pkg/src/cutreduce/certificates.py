"""Persistency certificates and their witnesses.

A certificate asserts that edge `edge` takes value `beta` in some optimal
solution (in every optimal solution when `all_optima` is set, as produced by
reduced cost fixing on a pristine instance).  The witness carries enough data
to re-verify the criterion inequality without re-running any search.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

CRITERIA = ("edge_e1", "edge_e2", "edge_e3", "triangle", "subgraph_mc",
            "subgraph_maxcut", "boundary_edge", "boundary_subgraph",
            "gplus_decomp", "rcf")

# application order inside a shrink round (lower = earlier); rcf first
# (all-optima certificates compose freely), then cheap-to-replay criteria.
CRITERION_RANK = {name: i for i, name in enumerate(
    ("rcf", "gplus_decomp", "edge_e1", "edge_e2", "edge_e3", "triangle",
     "boundary_edge", "subgraph_mc", "boundary_subgraph", "subgraph_maxcut"))}


@dataclass(frozen=True)
class CutWitness:
    """A single connected cut: the criterion inequality is over delta(nodes)."""
    nodes: frozenset[int]


@dataclass(frozen=True)
class TriangleWitness:
    """Triangle u,v,w certifying edge uw; cut_u separates u from {v,w},
    cut_w separates w from {u,v}."""
    u: int
    v: int
    w: int
    cut_u: frozenset[int]
    cut_w: frozenset[int]


@dataclass(frozen=True)
class SubgraphWitness:
    """Induced connected subgraph plus the zero-optimum packing on it.

    cycles are stored as tuples of node pairs so they survive renumbering;
    `alpha` is the interpolation point at which the max-cut network evaluation
    reached the boundary total (None for multicut criteria)."""
    nodes: frozenset[int]
    cycles: tuple[tuple[tuple[tuple[int, int], ...], float], ...]
    boundary_total: float
    cut_value: float
    alpha: float | None = None


@dataclass(frozen=True)
class DualGapWitness:
    gamma: float
    reduced_cost: float


Witness = Union[CutWitness, TriangleWitness, SubgraphWitness, DualGapWitness, None]


@dataclass(frozen=True)
class PersistencyCertificate:
    edge: int                 # edge id in the instance the criterion ran on
    beta: int
    criterion: str
    witness: Witness = None
    round: int = 0
    all_optima: bool = False
    endpoints: tuple[int, int] | None = None   # node pair, set by the emitters

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if self.beta not in (0, 1):
            raise ValueError("beta must be 0 or 1")

    def with_round(self, rnd: int) -> "PersistencyCertificate":
        return replace(self, round=rnd)


def sort_key(cert: PersistencyCertificate) -> tuple[int, int]:
    return (cert.edge, CRITERION_RANK[cert.criterion])
