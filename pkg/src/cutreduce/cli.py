"""Command-line interface.

Subcommands: shrink (run the persistency pipeline and report), generate
(synthetic instance families), verify (replay a report's operation log),
oracle (exact solve for small instances), ablate (remaining-size series over
the criteria ladder).  Exit codes: 0 ok, 1 input error, 2 internal invariant
violation or failed verification.
"""

from __future__ import annotations

import argparse
import json
import sys

from .graphs import ContractViolation, ParseError, total_objective
from .generators import FAMILIES, generate
from .io import parse_instance, serialize_instance, write_instance
from .oracle import enumerate_optima
from .pipeline import LADDER, PipelineConfig, RunReport, ShrinkState, run
from .report import build_report, report_to_csv, verify_report, write_report


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="cutreduce",
                description="Persistency-based shrinking for multicut and "
                            "max-cut instances")
    sub = p.add_subparsers(dest="command", required=True)

    sh = sub.add_parser("shrink", help="run the persistency pipeline")
    sh.add_argument("instance")
    sh.add_argument("--criteria", default=",".join(LADDER),
                    help="comma-separated subset of: " + ",".join(LADDER))
    sh.add_argument("--max-rounds", type=int, default=10)
    sh.add_argument("--seed", type=int, default=0)
    sh.add_argument("--threads", type=int, default=1)
    sh.add_argument("--exact-triangle-flows", action="store_true")
    sh.add_argument("--negate", action="store_true",
                    help="flip weight signs while parsing (max-form input)")
    sh.add_argument("--report", default=None, help="report output path")
    sh.add_argument("--format", choices=("json", "csv"), default="json")
    sh.add_argument("--out-instance", default=None,
                    help="write the shrunk instance here")

    ge = sub.add_parser("generate", help="write a synthetic instance")
    ge.add_argument("--family", choices=FAMILIES, required=True)
    ge.add_argument("--seed", type=int, default=0)
    ge.add_argument("--n", type=int, help="chain length (ising_chain)")
    ge.add_argument("--rho", type=float, default=0.5,
                    help="chain decay rate in (0,1)")
    ge.add_argument("--rows", type=int, help="torus2d rows")
    ge.add_argument("--cols", type=int, help="torus2d cols")
    ge.add_argument("--dims", type=int, nargs=3, metavar=("A", "B", "C"),
                    help="torus3d dimensions")
    ge.add_argument("--blocks", type=int, help="gplus_blocks count")
    ge.add_argument("--block-size", type=int, help="gplus_blocks clique size")
    ge.add_argument("--out", required=True)

    ve = sub.add_parser("verify", help="replay a report against its instance")
    ve.add_argument("instance")
    ve.add_argument("--report", required=True)
    ve.add_argument("--negate", action="store_true")

    orc = sub.add_parser("oracle", help="exact optimum of a small instance")
    orc.add_argument("instance")
    orc.add_argument("--negate", action="store_true")

    ab = sub.add_parser("ablate", help="remaining-size series over the ladder")
    ab.add_argument("instance")
    ab.add_argument("--max-rounds", type=int, default=10)
    ab.add_argument("--seed", type=int, default=0)
    ab.add_argument("--negate", action="store_true")
    ab.add_argument("--report", default=None)
    ab.add_argument("--format", choices=("json", "csv"), default="csv")
    return p


def ladder_stages() -> list[tuple[str, tuple[str, ...]]]:
    """Cumulative criteria prefixes, mirroring the ablation axis."""
    return [
        ("none", ()),
        ("gplus", ("gplus",)),
        ("edge", ("gplus", "edge")),
        ("triangle", ("gplus", "edge", "triangle")),
        ("greedy", ("gplus", "edge", "triangle", "subgraph_greedy")),
        ("icp", LADDER),
    ]


def _cmd_shrink(args) -> int:
    inst = parse_instance(args.instance, negate=args.negate)
    stages = tuple(s for s in args.criteria.split(",") if s)
    config = PipelineConfig(criteria=stages, max_rounds=args.max_rounds,
                            seed=args.seed, threads=args.threads,
                            exact_triangle_flows=args.exact_triangle_flows)
    state, report = run(inst, config)
    doc = build_report(state, report)
    if args.report:
        write_report(args.report, doc, args.format)
    if args.out_instance:
        write_instance(args.out_instance, state.current,
                       comments=[f"shrunk from {args.instance}"])
    print(f"{inst.kind}: |V| {inst.node_count} -> {state.current.node_count}, "
          f"|E| {inst.edge_count} -> {state.current.edge_count} "
          f"({100.0 * report.edge_fraction:.1f}% edges remain), "
          f"constant {state.constant!r}")
    return 0


def _cmd_generate(args) -> int:
    family = args.family
    params = {}
    if family == "ising_chain":
        if args.n is None:
            raise UsageError("ising_chain needs --n")
        params = {"n": args.n, "rho": args.rho}
    elif family == "torus2d":
        if args.rows is None or args.cols is None:
            raise UsageError("torus2d needs --rows and --cols")
        params = {"rows": args.rows, "cols": args.cols}
    elif family == "torus3d":
        if args.dims is None:
            raise UsageError("torus3d needs --dims A B C")
        params = {"a": args.dims[0], "b": args.dims[1], "c": args.dims[2]}
    elif family == "gplus_blocks":
        if args.blocks is None or args.block_size is None:
            raise UsageError("gplus_blocks needs --blocks and --block-size")
        params = {"blocks": args.blocks, "block_size": args.block_size}
    inst = generate(family, seed=args.seed, **params)
    write_instance(args.out, inst,
                   comments=[f"family={family} seed={args.seed} params={params}"])
    print(f"wrote {args.out}: {inst.kind}, |V|={inst.node_count}, "
          f"|E|={inst.edge_count}")
    return 0


def _cmd_verify(args) -> int:
    inst = parse_instance(args.instance, negate=args.negate)
    with open(args.report, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    ok, msgs = verify_report(inst, doc)
    for m in msgs:
        print(m, file=sys.stderr)
    print("verification OK" if ok else "verification FAILED")
    return 0 if ok else 2


def _cmd_oracle(args) -> int:
    inst = parse_instance(args.instance, negate=args.negate)
    value, optima = enumerate_optima(inst)
    print(f"optimum {value!r} ({len(optima)} optimal labelings)")
    print("labeling " + "".join(str(b) for b in optima[0]))
    return 0


def _cmd_ablate(args) -> int:
    inst = parse_instance(args.instance, negate=args.negate)
    stages = []
    for name, criteria in ladder_stages():
        config = PipelineConfig(criteria=criteria, max_rounds=args.max_rounds,
                                seed=args.seed)
        state, report = run(inst, config)
        stages.append({
            "stage": name,
            "remaining_nodes": state.current.node_count,
            "remaining_edges": state.current.edge_count,
            "node_fraction": report.node_fraction,
            "edge_fraction": report.edge_fraction,
        })
        print(f"{name:9s} |V| {state.current.node_count:6d} "
              f"|E| {state.current.edge_count:6d} "
              f"({100.0 * report.edge_fraction:6.2f}% edges)")
    if args.report:
        doc = {"schema": 1, "kind": inst.kind,
               "original": {"nodes": inst.node_count, "edges": inst.edge_count},
               "stages": stages}
        if args.format == "json":
            with open(args.report, "w", encoding="ascii") as fh:
                json.dump(doc, fh, indent=1, sort_keys=True)
                fh.write("\n")
        else:
            with open(args.report, "w", encoding="ascii") as fh:
                fh.write(report_to_csv(doc))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "shrink":
            return _cmd_shrink(args)
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "ablate":
            return _cmd_ablate(args)
        raise UsageError(f"unknown command {args.command!r}")
    except (UsageError, ParseError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ContractViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
