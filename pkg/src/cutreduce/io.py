"""Text instance format.

    c free-form comment
    p <multicut|maxcut> <node count> <edge count>
    u v w        (0-based ids, ASCII decimal weight, one line per edge)

Duplicate edges are merged by summing their weights; comment lines are
ignored; malformed lines are reported with their line number.
"""

from __future__ import annotations

import math
from typing import IO, Iterable

from .graphs import KINDS, ParseError, ProblemInstance


def parse_instance(source: str | IO[str], negate: bool = False) -> ProblemInstance:
    """Parse a file path or text stream; `negate` flips all weights (to convert
    max-form inputs into the min form used internally)."""
    if isinstance(source, str):
        with open(source, "r", encoding="ascii") as fh:
            return parse_instance(fh, negate=negate)
    kind = None
    node_count = edge_count = 0
    weights: dict[tuple[int, int], float] = {}
    header_seen = False
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if header_seen:
                raise ParseError(f"line {lineno}: duplicate header")
            parts = line.split()
            if len(parts) != 4:
                raise ParseError(f"line {lineno}: header needs 'p kind n m'")
            kind = parts[1]
            if kind not in KINDS:
                raise ParseError(f"line {lineno}: unknown problem kind {kind!r}")
            try:
                node_count, edge_count = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"line {lineno}: non-integer sizes") from None
            if node_count < 0 or edge_count < 0:
                raise ParseError(f"line {lineno}: negative sizes")
            header_seen = True
            continue
        if not header_seen:
            raise ParseError(f"line {lineno}: edge before header")
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 'u v w'")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2])
        except ValueError:
            raise ParseError(f"line {lineno}: malformed edge line") from None
        if not math.isfinite(w):
            raise ParseError(f"line {lineno}: non-finite weight")
        if u == v:
            raise ParseError(f"line {lineno}: self-loop at node {u}")
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise ParseError(f"line {lineno}: node id out of range")
        if u > v:
            u, v = v, u
        weights[(u, v)] = weights.get((u, v), 0.0) + w
    if not header_seen:
        raise ParseError("missing 'p' header line")
    sign = -1.0 if negate else 1.0
    return ProblemInstance(kind, node_count,
                           [(u, v, sign * w) for (u, v), w in sorted(weights.items())])


def serialize_instance(inst: ProblemInstance, comments: Iterable[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p {inst.kind} {inst.node_count} {inst.edge_count}")
    for (u, v), w in zip(inst.edges, inst.weights):
        lines.append(f"{u} {v} {w!r}")
    return "\n".join(lines) + "\n"


def write_instance(path: str, inst: ProblemInstance,
                   comments: Iterable[str] = ()) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(serialize_instance(inst, comments))
