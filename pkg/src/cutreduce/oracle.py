"""Brute-force ground truth for small instances.

Multicut optima are enumerated over all node partitions (restricted growth
strings), max-cut optima over all 2^(n-1) bipartitions.  Used to validate
every persistency certificate and the improving-mapping mechanics.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .graphs import (MULTICUT, MAXCUT, ContractViolation, Labeling,
                     ProblemInstance, objective)

MULTICUT_NODE_CAP = 10
MAXCUT_NODE_CAP = 20


@lru_cache(maxsize=16)
def _partition_matrix(n: int) -> np.ndarray:
    """All restricted growth strings of length n as an int8 matrix (Bell(n) rows)."""
    rows = []
    a = [0] * n

    def rec(i: int, mx: int) -> None:
        if i == n:
            rows.append(a.copy())
            return
        for v in range(mx + 2):
            a[i] = v
            rec(i + 1, max(mx, v))

    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    a[0] = 0
    rec(1, 0)
    return np.array(rows, dtype=np.int8)


@lru_cache(maxsize=16)
def _cut_matrix(n: int) -> np.ndarray:
    """All 2-colorings with node 0 fixed to color 0, as a bool matrix (2^(n-1) rows)."""
    if n == 0:
        return np.zeros((1, 0), dtype=bool)
    k = np.arange(1 << (n - 1), dtype=np.uint32)
    cols = [(k >> i) & 1 for i in range(n - 1)]
    mat = np.stack([np.zeros_like(k)] + cols, axis=1).astype(bool)
    return mat


def _labelings_and_objectives(inst: ProblemInstance) -> tuple[np.ndarray, np.ndarray]:
    n = inst.node_count
    if inst.edge_count == 0:
        return np.zeros((1, 0), dtype=bool), np.zeros(1)
    U = np.fromiter((u for u, _ in inst.edges), dtype=np.int64)
    V = np.fromiter((v for _, v in inst.edges), dtype=np.int64)
    w = np.asarray(inst.weights)
    if inst.kind == MULTICUT:
        if n > MULTICUT_NODE_CAP:
            raise ContractViolation(f"multicut oracle capped at {MULTICUT_NODE_CAP} nodes")
        comp = _partition_matrix(n)
        X = comp[:, U] != comp[:, V]
    else:
        if n > MAXCUT_NODE_CAP:
            raise ContractViolation(f"maxcut oracle capped at {MAXCUT_NODE_CAP} nodes")
        colors = _cut_matrix(n)
        X = colors[:, U] != colors[:, V]
    obj = X @ w
    return X, obj


def enumerate_optima(inst: ProblemInstance) -> tuple[float, list[Labeling]]:
    """Exact optimum (including the instance's objective constant) and all
    optimal labelings, deduplicated, in lexicographic order."""
    X, obj = _labelings_and_objectives(inst)
    best = float(obj.min())
    rows = X[obj == best]
    optima = sorted({tuple(int(b) for b in row) for row in rows})
    return best + inst.objective_constant, optima


def enumerate_feasible(inst: ProblemInstance) -> list[Labeling]:
    """All feasible labelings (deduplicated)."""
    X, _ = _labelings_and_objectives(inst)
    return sorted({tuple(int(b) for b in row) for row in X})


def verify_certificate(inst: ProblemInstance, cert) -> bool:
    """True iff some optimum has x[cert.edge] == cert.beta; certificates that
    claim all-optima strength (cert.all_optima) are held to every optimum."""
    _, optima = enumerate_optima(inst)
    if not optima:
        return False
    if getattr(cert, "all_optima", False):
        return all(x[cert.edge] == cert.beta for x in optima)
    return any(x[cert.edge] == cert.beta for x in optima)


def verify_improving(inst: ProblemInstance, mapping: Callable[[Labeling], Labeling],
                     edge: int, beta: int,
                     feasible: Iterable[Labeling] | None = None) -> bool:
    """Exhaustively check that `mapping` improves every feasible x with
    x[edge] != beta, lands on a feasible labeling, and pins x[edge] to beta."""
    from .graphs import is_feasible
    if feasible is None:
        feasible = enumerate_feasible(inst)
    for x in feasible:
        if x[edge] == beta:
            continue
        px = mapping(x)
        if not is_feasible(inst, px):
            return False
        if px[edge] != beta:
            return False
        if objective(inst, px) > objective(inst, x) + 1e-9:
            return False
    return True
