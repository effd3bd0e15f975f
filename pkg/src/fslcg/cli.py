"""Command line: generate, solve, shapley, verify and bench.

Exit codes: 0 success, 2 verification failure, 3 infeasible instance,
4 size guard exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import scenarios
from .bench import METHODS, Check, SweepConfig, check_locality, compute_shapley, run_sweep, verify_instance, write_csv
from .errors import GuardError, InfeasibleError
from .ffcg import FfcgGame, build_collaboration_graph, dumps_instance, load_instance, savings_report, solve
from .graph import AgentGraph
from .shapley import TableGame, weight_partition_holds

EXIT_VERIFY = 2
EXIT_INFEASIBLE = 3
EXIT_GUARD = 4

log = logging.getLogger("fslcg")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj, out: str | None) -> None:
    _emit(json.dumps(obj, indent=2) + "\n", out)


def cmd_generate(args: argparse.Namespace) -> int:
    if args.kind == "worked":
        inst = scenarios.worked_example()
    else:
        data = json.loads(Path(args.config).read_text()) if args.config else {}
        flags = {
            "kind": args.kind,
            "n_forwarders": args.n,
            "seed": args.seed,
            "avg_degree": args.deg,
            "n_port_pairs": args.pairs,
            "rewire_prob": args.rewire_prob,
            "power_exponent": args.exponent,
            "shared_pool": args.shared_pool or None,
        }
        data.update({k: v for k, v in flags.items() if v is not None})
        inst = scenarios.generate(scenarios.ScenarioConfig.from_json(data))
    _emit(dumps_instance(inst), args.out)
    graph = build_collaboration_graph(inst)
    pairs = {r.pair for r in inst.requests} | {s.pair for s in inst.services}
    print(f"n={inst.n} edges={len(graph.edges())} pairs={len(pairs)}", file=sys.stderr)
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    if args.coalition is None:
        names = inst.forwarders
    else:
        names = [x for x in args.coalition.split(",") if x]
    unknown = set(names) - set(inst.forwarders)
    if unknown:
        raise SystemExit(f"unknown forwarders: {sorted(unknown)}")
    reqs, servs = inst.pooled(inst.coalition(names))
    assignment = solve(reqs, servs, exact=args.exact)
    _dump({"coalition": names, **assignment.to_json()}, args.out)
    print(f"cost={assignment.total_cost}", file=sys.stderr)
    return 0


def cmd_shapley(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    graph = build_collaboration_graph(inst)
    game = FfcgGame(inst, exact=args.exact)
    res = compute_shapley(args.method, graph, game, max_degree=args.max_degree, max_baseline_n=args.max_baseline_n)
    out = res.to_json(inst.forwarders)
    out["savings"] = savings_report(game, res).to_json(inst.forwarders)
    _dump(out, args.out)
    return 0


def _verify_table(data: dict) -> list[Check]:
    n = int(data["n"])
    graph = AgentGraph.from_edges(n, [tuple(e) for e in data.get("edges", [])])
    table = {}
    for key, val in data["values"].items():
        mask = 0
        for part in str(key).split(","):
            if part.strip():
                mask |= 1 << int(part)
        table[mask] = int(val)
    return [check_locality(graph, TableGame(n, table)), Check("weight_partition", weight_partition_holds(n), f"n={n}")]


def cmd_verify(args: argparse.Namespace) -> int:
    data = json.loads(Path(args.instance).read_text())
    if "values" in data:
        checks = _verify_table(data)
    else:
        inst = load_instance(args.instance)
        inst.validate()
        checks = verify_instance(inst, exact=args.exact)
    for c in checks:
        print(f"{'PASS' if c.ok else 'FAIL'} {c.name}: {c.detail}")
    return 0 if all(c.ok for c in checks) else EXIT_VERIFY


def cmd_bench(args: argparse.Namespace) -> int:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    flags = {
        "kind": args.kind,
        "ns": args.n,
        "degrees": args.deg,
        "seeds": args.seeds,
        "methods": args.methods,
        "max_degree": args.max_degree,
        "max_baseline_n": args.max_baseline_n,
        "exact": args.exact or None,
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    rows = run_sweep(SweepConfig.from_json(data), jobs=args.jobs)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fslcg", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance as JSON")
    g.add_argument("--kind", choices=[*scenarios.KINDS, "worked"], default=None)
    g.add_argument("--config", help="ScenarioConfig JSON; flags override it")
    g.add_argument("--n", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--deg", type=int, help="small_world average degree")
    g.add_argument("--pairs", type=int, help="number of port pairs in the pool")
    g.add_argument("--rewire-prob", type=float)
    g.add_argument("--exponent", type=float, help="power_law exponent")
    g.add_argument("--shared-pool", action="store_true", help="draw edge lanes from the shared pair pool")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="cheapest assignment for a coalition")
    s.add_argument("instance")
    s.add_argument("--coalition", help="comma-separated forwarder ids (default: all, '' for none)")
    s.add_argument("--exact", action="store_true", help="use original box counts instead of the greedy bound")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    h = sub.add_parser("shapley", help="Shapley cost allocation")
    h.add_argument("instance")
    h.add_argument("--method", choices=METHODS, default="fs_lcg")
    h.add_argument("--exact", action="store_true")
    h.add_argument("--max-degree", type=int, default=None)
    h.add_argument("--max-baseline-n", type=int, default=20)
    h.add_argument("--out")
    h.set_defaults(func=cmd_shapley)

    v = sub.add_parser("verify", help="check locality and solver invariants")
    v.add_argument("instance", help="instance JSON, or a game table {n, edges, values}")
    v.add_argument("--exact", action="store_true")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="runtime sweep to CSV")
    b.add_argument("--config", help="sweep JSON; flags override it")
    b.add_argument("--kind", choices=scenarios.KINDS)
    b.add_argument("--n", type=int, nargs="+")
    b.add_argument("--deg", type=int, nargs="+")
    b.add_argument("--seeds", type=int, nargs="+")
    b.add_argument("--methods", nargs="+", choices=METHODS)
    b.add_argument("--max-degree", type=int)
    b.add_argument("--max-baseline-n", type=int)
    b.add_argument("--exact", action="store_true")
    b.add_argument("--jobs", type=int, default=None, help="worker processes (default: CPU count)")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "generate" and args.kind is None and not args.config:
        args.kind = "uniform"
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except GuardError as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
