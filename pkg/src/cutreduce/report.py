"""Run reports (JSON schema 1, CSV series) and offline re-verification.

The JSON report carries the full operation log in the node ids current at each
round, every certificate with its witness, and a final-state checksum; the
verifier replays the log on the input instance, re-checking each certificate's
inequality before applying its operation, without re-running any criterion
search.
"""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import asdict
from typing import Any

from .certificates import (CutWitness, DualGapWitness, PersistencyCertificate,
                           SubgraphWitness, TriangleWitness)
from .criteria import replay_certificate
from .graphs import EPS, ContractViolation, ProblemInstance, Subgraph
from .packing import certifies_trivial_optimum, icp
from .pipeline import (RunReport, ShrinkOp, ShrinkState, WorkingGraph,
                       _work_subinstance)

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# serialization

def _witness_to_json(wit) -> dict | None:
    if wit is None:
        return None
    if isinstance(wit, CutWitness):
        return {"type": "cut", "nodes": sorted(wit.nodes)}
    if isinstance(wit, TriangleWitness):
        return {"type": "triangle", "u": wit.u, "v": wit.v, "w": wit.w,
                "cut_u": sorted(wit.cut_u), "cut_w": sorted(wit.cut_w)}
    if isinstance(wit, SubgraphWitness):
        return {"type": "subgraph", "nodes": sorted(wit.nodes),
                "cycles": [[[list(p) for p in cyc], lam] for cyc, lam in wit.cycles],
                "boundary_total": wit.boundary_total,
                "cut_value": wit.cut_value, "alpha": wit.alpha}
    if isinstance(wit, DualGapWitness):
        return {"type": "dual_gap", "gamma": wit.gamma,
                "reduced_cost": wit.reduced_cost}
    raise ContractViolation(f"unknown witness type {type(wit)!r}")


def _witness_from_json(data: dict | None):
    if data is None:
        return None
    t = data["type"]
    if t == "cut":
        return CutWitness(frozenset(data["nodes"]))
    if t == "triangle":
        return TriangleWitness(u=data["u"], v=data["v"], w=data["w"],
                               cut_u=frozenset(data["cut_u"]),
                               cut_w=frozenset(data["cut_w"]))
    if t == "subgraph":
        return SubgraphWitness(
            nodes=frozenset(data["nodes"]),
            cycles=tuple((tuple((p[0], p[1]) for p in cyc), lam)
                         for cyc, lam in data["cycles"]),
            boundary_total=data["boundary_total"],
            cut_value=data["cut_value"], alpha=data["alpha"])
    if t == "dual_gap":
        return DualGapWitness(data["gamma"], data["reduced_cost"])
    raise ContractViolation(f"unknown witness type {t!r}")


def _cert_to_json(cert: PersistencyCertificate) -> dict:
    return {"edge": cert.edge, "beta": cert.beta, "criterion": cert.criterion,
            "round": cert.round, "all_optima": cert.all_optima,
            "endpoints": list(cert.endpoints) if cert.endpoints else None,
            "witness": _witness_to_json(cert.witness)}


def _cert_from_json(data: dict) -> PersistencyCertificate:
    return PersistencyCertificate(
        edge=data["edge"], beta=data["beta"], criterion=data["criterion"],
        round=data.get("round", 0), all_optima=data.get("all_optima", False),
        endpoints=tuple(data["endpoints"]) if data.get("endpoints") else None,
        witness=_witness_from_json(data.get("witness")))


def _op_to_json(op: ShrinkOp) -> dict:
    out: dict[str, Any] = {"op": op.op, "round": op.round}
    if op.nodes:
        out["nodes"] = list(op.nodes)
    if op.edge is not None:
        out["edge"] = list(op.edge)
    if op.edges:
        out["edges"] = [list(e) for e in op.edges]
    if op.constant_delta:
        out["constant_delta"] = op.constant_delta
    if op.certificate is not None:
        out["certificate"] = _cert_to_json(op.certificate)
    if op.certificates:
        out["certificates"] = [_cert_to_json(c) for c in op.certificates]
    if op.cycles:
        out["cycles"] = [[[list(p) for p in cyc], lam] for cyc, lam in op.cycles]
    return out


def _op_from_json(data: dict) -> ShrinkOp:
    return ShrinkOp(
        op=data["op"], round=data["round"],
        nodes=tuple(data.get("nodes", ())),
        edge=tuple(data["edge"]) if data.get("edge") else None,
        edges=tuple(tuple(e) for e in data.get("edges", ())),
        constant_delta=data.get("constant_delta", 0.0),
        certificate=(_cert_from_json(data["certificate"])
                     if data.get("certificate") else None),
        certificates=tuple(_cert_from_json(c)
                           for c in data.get("certificates", ())),
        cycles=tuple((tuple((p[0], p[1]) for p in cyc), lam)
                     for cyc, lam in data.get("cycles", ())))


def build_report(state: ShrinkState, report: RunReport,
                 stages: list[dict] | None = None) -> dict:
    """Schema-1 report document."""
    orig, cur = state.original, state.current
    doc = {
        "schema": SCHEMA_VERSION,
        "kind": orig.kind,
        "original": {"nodes": orig.node_count, "edges": orig.edge_count},
        "final": {"nodes": cur.node_count, "edges": cur.edge_count,
                  "objective_constant": cur.objective_constant,
                  "weight_total": sum(cur.weights)},
        "fractions": {"nodes": report.node_fraction,
                      "edges": report.edge_fraction},
        "rounds": [asdict(r) for r in report.rounds],
        "total_seconds": report.total_seconds,
        "ops": [_op_to_json(op) for op in state.oplog],
        "certificates": [_cert_to_json(c) for c in state.certificates],
    }
    if stages is not None:
        doc["stages"] = stages
    return doc


def report_to_csv(doc: dict) -> str:
    """Flat series: the per-stage ladder when present, else the round series."""
    buf = _io.StringIO()
    writer = csv.writer(buf)
    if "stages" in doc:
        writer.writerow(["stage", "remaining_nodes", "remaining_edges",
                         "node_fraction", "edge_fraction"])
        for st in doc["stages"]:
            writer.writerow([st["stage"], st["remaining_nodes"],
                             st["remaining_edges"],
                             f"{st['node_fraction']:.6f}",
                             f"{st['edge_fraction']:.6f}"])
    else:
        writer.writerow(["round", "applied", "recorded", "dropped",
                         "remaining_nodes", "remaining_edges", "seconds"])
        for r in doc["rounds"]:
            writer.writerow([r["round"], r["applied"], r["recorded"],
                             r["dropped"], r["remaining_nodes"],
                             r["remaining_edges"], f"{r['seconds']:.4f}"])
    return buf.getvalue()


def write_report(path: str, doc: dict, fmt: str = "json") -> None:
    with open(path, "w", encoding="ascii") as fh:
        if fmt == "json":
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
        elif fmt == "csv":
            fh.write(report_to_csv(doc))
        else:
            raise ContractViolation(f"unknown report format {fmt!r}")


# ---------------------------------------------------------------------------
# offline verification

def verify_report(inst: ProblemInstance, doc: dict) -> tuple[bool, list[str]]:
    """Replay the operation log against the instance, re-checking every
    certificate before its operation is applied.  Returns (ok, messages)."""
    msgs: list[str] = []
    if doc.get("schema") != SCHEMA_VERSION:
        return False, [f"unsupported schema {doc.get('schema')!r}"]
    if doc["kind"] != inst.kind:
        return False, [f"kind mismatch: report {doc['kind']}, instance {inst.kind}"]
    if (doc["original"]["nodes"] != inst.node_count
            or doc["original"]["edges"] != inst.edge_count):
        return False, ["instance size does not match the report"]
    cur = inst
    work = WorkingGraph(cur)
    ok = True
    for i, opj in enumerate(doc["ops"]):
        op = _op_from_json(opj)
        if op.op == "renumber":
            cur, _ = work.finalize(cur)
            work = WorkingGraph(cur)
            continue
        if op.op == "switch":
            work.switch_cut(set(op.nodes))
            continue
        if op.op == "contract":
            cert = op.certificate
            if cert is not None and cert.criterion != "rcf":
                if not replay_certificate(work, cert):
                    ok = False
                    msgs.append(f"op {i}: certificate replay failed "
                                f"({cert.criterion} on edge {cert.endpoints})")
            if cert is not None and cert.criterion == "rcf":
                wit = cert.witness
                if not (isinstance(wit, DualGapWitness)
                        and wit.gamma >= -EPS
                        and wit.reduced_cost > wit.gamma + EPS):
                    ok = False
                    msgs.append(f"op {i}: inconsistent dual-gap witness")
            work.contract(*op.edge)
            continue
        if op.op == "switch_contract":
            cert = op.certificate
            if cert is not None and not replay_certificate(work, cert):
                ok = False
                msgs.append(f"op {i}: certificate replay failed "
                            f"({cert.criterion} on edge {cert.endpoints})")
            work.switch_cut(set(op.nodes))
            work.contract(*op.edge)
            continue
        if op.op == "remove_edges":
            for cert in op.certificates:
                if not replay_certificate(work, cert):
                    ok = False
                    msgs.append(f"op {i}: split certificate replay failed "
                                f"(edge {cert.endpoints})")
            for u, v in op.edges:
                work.remove_edge(u, v)
            continue
        if op.op == "collapse":
            if not _verify_collapse(work, frozenset(op.nodes), op.cycles):
                ok = False
                msgs.append(f"op {i}: collapse precondition failed")
            keep = min(op.nodes)
            for other in sorted(set(op.nodes) - {keep}):
                work.contract(keep, other)
            continue
        ok = False
        msgs.append(f"op {i}: unknown op {op.op!r}")
    cur, _ = work.finalize(cur)
    fin = doc["final"]
    if cur.node_count != fin["nodes"] or cur.edge_count != fin["edges"]:
        ok = False
        msgs.append(f"final size mismatch: got {cur.node_count}/{cur.edge_count}, "
                    f"report {fin['nodes']}/{fin['edges']}")
    if abs(cur.objective_constant - fin["objective_constant"]) > 1e-6 * (
            1 + abs(fin["objective_constant"])):
        ok = False
        msgs.append("objective constant mismatch")
    if abs(sum(cur.weights) - fin["weight_total"]) > 1e-6 * (
            1 + abs(fin["weight_total"])):
        ok = False
        msgs.append("weight checksum mismatch")
    return ok, msgs


def _verify_collapse(work: WorkingGraph, nodes: frozenset[int],
                     cycles: tuple) -> bool:
    for u in nodes:
        if not work.has_node(u):
            return False
        for z, w in work.neighbors(u):
            if z not in nodes and abs(w) > 0.0:
                return False
    built = _work_subinstance(work, nodes)
    if built is None:
        return False
    h_inst, local = built
    sub = Subgraph.induced(h_inst, range(h_inst.node_count))
    from .criteria import _map_packing
    pk = _map_packing(h_inst, local, cycles)
    if pk is not None and certifies_trivial_optimum(h_inst, sub, pk):
        return True
    pk = icp(h_inst, sub)
    return certifies_trivial_optimum(h_inst, sub, pk)
