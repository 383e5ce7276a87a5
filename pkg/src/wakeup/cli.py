"""Command line entry point: ``wakeup {gen,run,sweep,spanner,advice}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import netgraph as ng
from .advising import compute_advice
from .asim import CongestViolation, ProtocolFault
from .harness import (
    ConfigError,
    ExperimentConfig,
    IncompleteWakeError,
    build_instance,
    run_experiment,
    scaling_sweep,
    write_csv,
)
from .netgraph import Knowledge
from .spanner import build_spanner, spanner_size_report, verify_stretch, write_spanner


def _ints(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            out += range(int(a), int(b) + 1)
        elif part:
            out.append(int(part))
    return out


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", default="random",
                   choices=["random", "lb-g", "lb-gk", "path", "star", "complete", "file"])
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--m", type=int)
    p.add_argument("--graph", help="graph file (implies --instance file)")
    p.add_argument("--knowledge", choices=["KT0", "KT1"])


def _instance_spec(args) -> dict:
    if args.graph:
        spec = {"kind": "file", "path": args.graph}
    else:
        spec = {"kind": args.instance, "n": args.n}
        if args.instance == "random":
            spec["m"] = args.m if args.m is not None else min(4 * args.n, args.n * (args.n - 1) // 2)
    if args.knowledge:
        spec["knowledge"] = args.knowledge
    return spec


def _load_net(args, seed: int):
    spec = _instance_spec(args)
    knowledge = Knowledge(spec.get("knowledge", "KT0"))
    return build_instance(spec, seed, knowledge)


def cmd_gen(args) -> int:
    net, centers = _load_net(args, args.seed)
    ng.write_network(net, args.out)
    if args.schedule_out:
        ng.write_schedule(centers or ng.WakeSchedule.at_zero([0]), args.schedule_out)
    print(f"wrote {args.out}: n={net.n} m={net.m} {net.knowledge.value}")
    return 0


def cmd_run(args) -> int:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    else:
        wake = {"kind": args.wake}
        if args.wake == "file":
            wake["path"] = args.schedule
        cfg = ExperimentConfig(
            instance=_instance_spec(args),
            protocol=args.protocol,
            scheme=args.scheme,
            k=args.k,
            seeds=_ints(args.seeds),
            tau=args.tau,
            delay_mode=args.delay,
            delay_value=args.delay_value,
            delay_table=args.delay_table,
            wake=wake,
            congest_limit=args.congest_limit,
            strict=args.strict,
            c=args.c,
            output=args.out,
            workers=args.workers,
        )
    result = run_experiment(cfg)
    if not cfg.output:
        for row in result.rows:
            print(json.dumps(row))
    summary = {k: v for k, v in result.summary.items() if k != "config"}
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    if cfg.strict and summary["all_awake_fraction"] < 1:
        return 2
    return 0


def cmd_sweep(args) -> int:
    wake = {"kind": args.wake}
    table = scaling_sweep(
        args.protocol,
        _ints(args.sizes),
        args.seeds_per_size,
        edges_per_node=args.edges_per_node,
        tau=args.tau,
        wake=wake,
        k=args.k,
        with_diameter=args.diameter,
    )
    for row in table:
        print(json.dumps(row))
    if args.csv:
        write_csv(table, args.csv)
    return 0


def cmd_spanner(args) -> int:
    net, _ = _load_net(args, args.seed)
    seeds = _ints(args.seeds)
    ok = True
    for s in seeds:
        sp = build_spanner(net, args.k, s)
        if net.n <= args.max_n and not verify_stretch(net, sp.edge_set(), args.k, args.max_n):
            print(f"seed {s}: stretch check FAILED", file=sys.stderr)
            ok = False
        if args.export:
            write_spanner(sp, Path(args.export.format(seed=s)))
    print(json.dumps(spanner_size_report(net, args.k, seeds), sort_keys=True))
    return 0 if ok else 3


def cmd_advice(args) -> int:
    net, _ = _load_net(args, args.seed)
    advice = compute_advice(net, args.scheme, args.seed)
    if args.out:
        advice.write(args.out)
    print(json.dumps({
        "scheme": advice.scheme,
        "n": net.n,
        "max_bits": advice.max_bits,
        "avg_bits": float(advice.avg_bits),
        "total_bits": advice.total_bits,
    }))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wakeup", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write an instance file")
    _instance_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--schedule-out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="run one experiment over a seed list")
    _instance_args(p)
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--protocol", default="flooding")
    p.add_argument("--scheme")
    p.add_argument("--k", type=int)
    p.add_argument("--seeds", default="0")
    p.add_argument("--tau", type=int, default=1)
    p.add_argument("--delay", default="uniform", choices=["uniform", "constant", "table"])
    p.add_argument("--delay-value", type=int)
    p.add_argument("--delay-table")
    p.add_argument("--wake", default="single-random",
                   choices=["single-random", "all", "lb-centers", "staggered", "file"])
    p.add_argument("--schedule", help="wake schedule file for --wake file")
    p.add_argument("--congest-limit", type=int)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--c", type=int, default=4)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="scaling table over sizes")
    p.add_argument("--protocol", default="dfs-rank")
    p.add_argument("--sizes", default="128,256,512")
    p.add_argument("--seeds-per-size", type=int, default=10)
    p.add_argument("--edges-per-node", type=int, default=4)
    p.add_argument("--tau", type=int, default=4)
    p.add_argument("--wake", default="single-random", choices=["single-random", "all", "staggered"])
    p.add_argument("--k", type=int)
    p.add_argument("--diameter", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spanner", help="build, verify and report spanners")
    _instance_args(p)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--seed", type=int, default=0, help="instance seed")
    p.add_argument("--seeds", default="0-9", help="spanner build seeds")
    p.add_argument("--max-n", type=int, default=500)
    p.add_argument("--export", help="edge list path; may contain {seed}")
    p.set_defaults(func=cmd_spanner)

    p = sub.add_parser("advice", help="compute and inspect an advice map")
    _instance_args(p)
    p.add_argument("--scheme", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_advice)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ng.GraphError, IncompleteWakeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ProtocolFault, CongestViolation) as exc:
        print(f"fault: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
