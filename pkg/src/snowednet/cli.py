"""Command line entry point: ``snowednet <group> <command>``."""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import harness
from .identity import run_workflow, setup, workflow_passed
from .ledger import LedgerError, SnowedBlock
from .routing import bfs_shortest, hierarchical_route, routing_study, study_csv
from .topology import TopologyError, TopoParams, VertexId, generate


def _vertex(text: str) -> VertexId:
    # accepts a bare label ("0.1.2") or a full address ("snw://0.1.2/<bcadd>")
    if text.startswith("snw://"):
        text = text[len("snw://") :].split("/", 1)[0]
    return VertexId.parse(text)


def _range(text: str) -> tuple[int, int]:
    try:
        a, b = text.split("..")
        lo, hi = int(a or 0), int(b) if b else None
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}") from None
    return lo, hi


def cmd_topo_gen(args) -> int:
    topo = generate(TopoParams(args.d, args.t, args.unit_side))
    _emit(topo.to_json() + "\n", args.out)
    return 0


def cmd_route_query(args) -> int:
    topo = generate(TopoParams(2, args.t))
    src, dst = _vertex(args.src), _vertex(args.dst)
    for v in (src, dst):
        if v not in topo:
            raise TopologyError(f"{v} is not a vertex at t={args.t}")
    route = hierarchical_route(topo, src, dst)
    out = {"from": str(src), "to": str(dst), "hops": [str(h) for h in route.hops],
           "length_hops": route.length_hops, "length_units": route.length_units}
    if args.oracle:
        best = bfs_shortest(topo, src, dst)
        out["oracle"] = {"hops": [str(h) for h in best.hops], "length_hops": best.length_hops}
        out["stretch"] = route.length_hops / best.length_hops if best.length_hops else 1.0
    print(json.dumps(out))
    return 0


def cmd_route_study(args) -> int:
    rows = []
    for t in args.t:
        rows.append(routing_study(generate(TopoParams(2, t)), sample=args.sample, seed=args.seed))
    _emit(study_csv(rows), args.out)
    return 0 if all(r.ok for r in rows) else 1


def cmd_ledger_inspect(args) -> int:
    path = Path(args.file) if args.file else harness.output_dir("out") / "ledger.jsonl"
    lo, hi = args.range
    ok = True
    prev = None
    with open(path) as fh:
        for line in fh:
            entry = json.loads(line)
            seq = entry["seq"]
            if seq < lo - 1 or (hi is not None and seq >= hi):
                continue
            blk = SnowedBlock.decode(bytes.fromhex(entry["raw"]))
            if prev is not None and prev[0] == seq - 1 and blk.prev_hash != prev[1]:
                ok = False
            ok &= blk.verify_hash()
            prev = (seq, blk.hash)
            if seq >= lo:
                print(json.dumps({"seq": seq, "window": entry["window"], **blk.to_dict()}, sort_keys=True))
    if not ok:
        print("chain verification failed", file=sys.stderr)
    return 0 if ok else 1


def cmd_sim_run(args) -> int:
    if args.config:
        scenario = harness.load_scenario(args.config, seed=args.seed, rounds=args.rounds, toy=args.toy)
    else:
        scenario = harness.parse_scenario(harness.REFERENCE_SCENARIO, seed=args.seed, rounds=args.rounds, toy=args.toy)
    out = harness.output_dir(args.out or scenario.outputs)
    result = harness.run(scenario)
    harness.write_outputs(result, out, timing=args.timing)
    sys.stdout.write((out / "metrics" / "rounds.csv").read_text())
    failed = [k for k, v in result.report["checks"].items() if not v]
    print(f"report: {out / 'report.json'}; failed checks: {', '.join(failed) or 'none'}", file=sys.stderr)
    return 0 if result.passed else 1


def cmd_id_demo(args) -> int:
    level = "toy" if args.toy else args.level
    params = setup(level, seed=args.seed)
    transcript = run_workflow(params, random.Random(args.seed))
    for step in transcript:
        print(json.dumps(step, sort_keys=True))
    return 0 if workflow_passed(transcript) else 1


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="snowednet", description=__doc__)
    groups = p.add_subparsers(dest="group", required=True)

    topo = groups.add_parser("topo").add_subparsers(dest="cmd", required=True)
    g = topo.add_parser("gen", help="generate a topology as JSON")
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--t", type=int, required=True)
    g.add_argument("--unit-side", default="1")
    g.add_argument("--out")
    g.set_defaults(func=cmd_topo_gen)

    route = groups.add_parser("route").add_subparsers(dest="cmd", required=True)
    q = route.add_parser("query", help="hierarchical route between two labels or addresses")
    q.add_argument("--t", type=int, required=True)
    q.add_argument("--from", dest="src", required=True)
    q.add_argument("--to", dest="dst", required=True)
    q.add_argument("--oracle", action="store_true", help="also report the BFS shortest path")
    q.set_defaults(func=cmd_route_query)
    s = route.add_parser("study", help="stretch study as CSV")
    s.add_argument("--t", type=int, nargs="+", required=True)
    s.add_argument("--sample", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_route_study)

    ledger = groups.add_parser("ledger").add_subparsers(dest="cmd", required=True)
    i = ledger.add_parser("inspect", help="print and re-verify blocks from a ledger.jsonl")
    i.add_argument("--file")
    i.add_argument("--range", type=_range, default=(0, None))
    i.set_defaults(func=cmd_ledger_inspect)

    sim = groups.add_parser("sim").add_subparsers(dest="cmd", required=True)
    r = sim.add_parser("run", help="run a scenario end to end")
    r.add_argument("--config")
    r.add_argument("--rounds", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.add_argument("--toy", action="store_true", help="use the toy identity group")
    r.add_argument("--timing", action="store_true", help="also write timing.json")
    r.set_defaults(func=cmd_sim_run)

    ident = groups.add_parser("id").add_subparsers(dest="cmd", required=True)
    d = ident.add_parser("demo", help="run the identity workflow")
    d.add_argument("--toy", action="store_true")
    d.add_argument("--level", choices=["desk", "full"], default="full")
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=cmd_id_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except harness.ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
    except (TopologyError, LedgerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
