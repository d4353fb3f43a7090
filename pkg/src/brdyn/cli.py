"""Command line front end: ``brdyn {simulate,verify,tg,build}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import circle as C
from .dynamics import DEFAULT_MAX_STEPS, MIN_INDEX, RANDOM, ROUND_ROBIN, Schedule
from .experiment import (
    Built,
    build_circle,
    build_gadget,
    build_json,
    build_tree,
    format_csv,
    simulate_batch,
)
from .game import GameError
from .graphs import as_graph_game
from .transition import (
    DEFAULT_NODE_CAP,
    CycleError,
    build_tg,
    find_cycle,
    first_potential_violation,
    longest_path,
)
from .verify import SUITES


def _add_builders(parser: argparse.ArgumentParser) -> None:
    sub = parser.add_subparsers(dest="builder", required=True, metavar="GAME")

    c = sub.add_parser("circle", help="circle game built from player types")
    c.add_argument("--n", type=int, required=True)
    kind = c.add_mutually_exclusive_group(required=True)
    kind.add_argument("--all-type", help="one type for every player: 1,2,3,1',2',3'")
    kind.add_argument("--types", help="comma-separated types, one per player")
    c.add_argument("--init", choices=("two-block", "all-zero"), default="two-block")
    c.add_argument("--k", type=int, help="players on the 0-strategy in a two-block start (default n/2)")
    c.add_argument("--delay-seed", type=int, help="random delay values instead of ranks 1..4")

    g = sub.add_parser("gadget", help="gadget family, started from its canonical configuration")
    g.add_argument("--n", type=int, required=True)

    t = sub.add_parser("tree", help="random tree game")
    t.add_argument("--n", type=int, required=True, help="number of resources")
    t.add_argument("--game-seed", type=int, default=0)

    j = sub.add_parser("json", help="game file in JSON format")
    j.add_argument("path", type=Path)


def _built(args) -> Built:
    if args.builder == "circle":
        types = args.types.split(",") if args.types else None
        return build_circle(args.n, types, args.all_type, args.init, args.k, args.delay_seed)
    if args.builder == "gadget":
        return build_gadget(args.n)
    if args.builder == "tree":
        return build_tree(args.n, args.game_seed)
    return build_json(args.path)


def cmd_simulate(args) -> int:
    built = _built(args)
    rows, summary = simulate_batch(
        built, Schedule(args.schedule), args.seed, args.runs, args.max_steps, args.jobs
    )
    text = format_csv(rows, summary)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    s = summary
    print(
        f"{s.game} n={s.n} {s.schedule}: runs={s.runs} mean={s.mean_steps:.3f} "
        f"sd={s.stddev_steps:.3f} min={s.min} max={s.max} censored={s.censored}",
        file=sys.stderr,
    )
    return 0


def cmd_verify(args) -> int:
    checks = SUITES[args.suite]()
    for c in checks:
        print(c.line())
    return 0 if all(c.ok for c in checks) else 1


def cmd_tg(args) -> int:
    built = _built(args)
    tg = build_tg(built.game, node_cap=args.cap)
    print(f"{tg.node_count} states, {tg.edge_count} edges, {len(tg.sinks())} sinks")
    if args.dot:
        Path(args.dot).write_text(tg.to_dot())
    analysis = args.analysis
    if analysis == "cycles":
        cyc = find_cycle(tg)
        if cyc is None:
            print("acyclic")
        else:
            print(f"cycle of length {len(cyc)}:")
            for s, p, d in cyc:
                print(f"  {s} -[{p}]-> {d}")
    elif analysis == "longest-path":
        try:
            print(f"longest path {longest_path(tg)}")
        except CycleError:
            print("transition graph has a cycle; no longest path")
            return 1
    else:
        case = C.CaseTag[analysis.split(":", 1)[1].upper()]
        gg = as_graph_game(built.game)
        phi = C.POTENTIALS[case]
        bad = first_potential_violation(tg, lambda s: phi(gg, s))
        if bad is None:
            print(f"potential {case.name.lower()} verified on all {tg.edge_count} edges")
        else:
            print(f"potential {case.name.lower()} violated on edge {bad}")
            return 1
    return 0


def cmd_build(args) -> int:
    built = _built(args)
    text = json.dumps(built.game.to_json(), indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def _analysis(text: str) -> str:
    if text in ("cycles", "longest-path"):
        return text
    if text in (f"potential:case{k}" for k in (1, 2, 3)):
        return text
    raise argparse.ArgumentTypeError("expected cycles, longest-path or potential:case1..3")


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="brdyn", description="Best-response dynamics toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="seeded batch of runs, CSV output")
    s.add_argument("--schedule", choices=(RANDOM, ROUND_ROBIN, MIN_INDEX), default=RANDOM)
    s.add_argument("--seed", type=int, default=0, help="run i uses seed + i")
    s.add_argument("--runs", type=int, default=100)
    s.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", help="CSV path (default stdout)")
    _add_builders(s)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("tg", help="transition graph analysis")
    t.add_argument("--analysis", type=_analysis, default="cycles")
    t.add_argument("--cap", type=int, default=DEFAULT_NODE_CAP, help="maximum number of states")
    t.add_argument("--dot", help="write the graph in DOT format to this path")
    _add_builders(t)
    t.set_defaults(func=cmd_tg)

    b = sub.add_parser("build", help="dump a built game as JSON")
    b.add_argument("--out")
    _add_builders(b)
    b.set_defaults(func=cmd_build)
    return p


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GameError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
