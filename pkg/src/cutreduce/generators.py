"""Synthetic instance families with platform-independent reproducibility.

All randomness comes from ``random.Random(seed)`` (Mersenne Twister); Gaussian
weights use an explicit Box-Muller transform (one fresh uniform pair per edge,
cosine branch only) so identical seeds generate identical instances everywhere.
"""

from __future__ import annotations

import math
import random

from .graphs import MAXCUT, MULTICUT, ContractViolation, ProblemInstance

FAMILIES = ("ising_chain", "torus2d", "torus3d", "gplus_blocks")


def _gauss(rng: random.Random) -> float:
    u1 = 1.0 - rng.random()      # (0, 1]
    u2 = rng.random()
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def ising_chain(n: int, rho: float = 0.5, seed: int = 0) -> ProblemInstance:
    """Complete graph over a linear order; |weight| decays exponentially with
    distance (rate rho), signs are a fair coin per pair."""
    if n < 2:
        raise ContractViolation("chain needs at least 2 nodes")
    if not (0.0 < rho < 1.0):
        raise ContractViolation("decay rate must be in (0, 1)")
    rng = random.Random(seed)
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            sign = 1.0 if rng.random() < 0.5 else -1.0
            edges.append((u, v, sign * rho ** (v - u - 1)))
    return ProblemInstance(MAXCUT, n, edges)


def torus2d(rows: int, cols: int, seed: int = 0) -> ProblemInstance:
    """Toroidal grid with standard-normal weights."""
    if rows < 3 or cols < 3:
        raise ContractViolation("torus dimensions must be >= 3")
    rng = random.Random(seed)
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            edges.append((u, r * cols + (c + 1) % cols, _gauss(rng)))
            edges.append((u, ((r + 1) % rows) * cols + c, _gauss(rng)))
    return ProblemInstance(MAXCUT, rows * cols, edges)


def torus3d(a: int, b: int, c: int, seed: int = 0) -> ProblemInstance:
    """Three-dimensional toroidal grid with standard-normal weights."""
    if min(a, b, c) < 3:
        raise ContractViolation("torus dimensions must be >= 3")
    rng = random.Random(seed)

    def nid(i: int, j: int, k: int) -> int:
        return (i % a) * b * c + (j % b) * c + (k % c)

    edges = []
    for i in range(a):
        for j in range(b):
            for k in range(c):
                u = nid(i, j, k)
                edges.append((u, nid(i, j, k + 1), _gauss(rng)))
                edges.append((u, nid(i, j + 1, k), _gauss(rng)))
                edges.append((u, nid(i + 1, j, k), _gauss(rng)))
    return ProblemInstance(MAXCUT, a * b * c, edges)


def gplus_blocks(blocks: int, block_size: int, seed: int = 0) -> ProblemInstance:
    """Positive cliques chained by single negative edges: a fixture for the
    positive-component split."""
    if blocks < 1 or block_size < 2:
        raise ContractViolation("need >= 1 block of size >= 2")
    rng = random.Random(seed)
    edges = []
    for blk in range(blocks):
        base = blk * block_size
        for i in range(block_size):
            for j in range(i + 1, block_size):
                edges.append((base + i, base + j, 0.5 + rng.random()))
    for blk in range(blocks - 1):
        u = blk * block_size + rng.randrange(block_size)
        v = (blk + 1) * block_size + rng.randrange(block_size)
        edges.append((u, v, -(0.5 + rng.random())))
    return ProblemInstance(MULTICUT, blocks * block_size, edges)


def generate(family: str, seed: int = 0, **params) -> ProblemInstance:
    if family == "ising_chain":
        return ising_chain(params["n"], params.get("rho", 0.5), seed)
    if family == "torus2d":
        return torus2d(params["rows"], params["cols"], seed)
    if family == "torus3d":
        return torus3d(params["a"], params["b"], params["c"], seed)
    if family == "gplus_blocks":
        return gplus_blocks(params["blocks"], params["block_size"], seed)
    raise ContractViolation(f"unknown family {family!r}")
