"""Command-line entry points: generate, plan, simulate, bench.

Exit codes: 0 success, 1 unreadable or mismatched input, 2 usage error,
3 planning timeout, 4 infeasible instance, 5 search failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from sortplan import executor, instances, metrics, planner

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_USAGE = 2
EXIT_CODES = {
    planner.Outcome.SUCCESS: EXIT_OK,
    planner.Outcome.TIMEOUT: 3,
    planner.Outcome.INFEASIBLE: 4,
    planner.Outcome.FAILURE: 5,
}
LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

log = logging.getLogger("sortplan")


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _workspace(text: str) -> tuple[float, float]:
    parts = text.lower().split("x")
    try:
        if len(parts) == 1:
            w = h = float(parts[0])
        elif len(parts) == 2:
            w, h = float(parts[0]), float(parts[1])
        else:
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(f"workspace must be W or WxH, got {text!r}") from None
    if w <= 0 or h <= 0:
        raise argparse.ArgumentTypeError("workspace sides must be > 0")
    return w, h


def _gen_params(args) -> instances.GenParams:
    kw = {}
    if getattr(args, "workspace", None):
        kw["width"], kw["height"] = args.workspace
    if getattr(args, "area_per_object", None):
        kw["area_per_object"] = args.area_per_object
    if getattr(args, "diameter_min", None) is not None:
        kw["diameter_min"] = args.diameter_min
    if getattr(args, "diameter_max", None) is not None:
        kw["diameter_max"] = args.diameter_max
    return instances.GenParams(**kw)


def _add_density_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--workspace", type=_workspace, help="clutter area, W or WxH metres (default 4x4)")
    p.add_argument(
        "--area-per-object",
        type=_positive_float,
        help="square workspace scaled to N * this many square metres (overrides --workspace)",
    )


def cmd_generate(args) -> int:
    if args.n < 1:
        args.parser.error("--n must be >= 1")
    if not 1 <= args.k <= args.n:
        args.parser.error("--k must satisfy 1 <= K <= N")
    if args.m < 1:
        args.parser.error("--m must be >= 1")
    params = _gen_params(args)
    if params.diameter_min <= 0 or params.diameter_min > params.diameter_max:
        args.parser.error("need 0 < --diameter-min <= --diameter-max")
    try:
        inst = instances.generate_instance(args.n, args.k, args.m, args.seed, params)
    except instances.GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    instances.save(inst, args.out)
    print(f"wrote {args.out}: N={inst.n} K={inst.k} M={inst.m}")
    return EXIT_OK


def _load_instance(path: str):
    try:
        return instances.load(path)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
    except instances.InstanceError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
    return None


def cmd_plan(args) -> int:
    inst = _load_instance(args.instance)
    if inst is None:
        return EXIT_INPUT
    result = planner.sort_objects(inst, args.strategy, args.time_limit)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(planner.result_to_dict(result), fh, indent=2)
            fh.write("\n")
    print(
        f"{result.outcome.value} len={len(result.sequence)} nodes={result.nodes_expanded}"
        f" ms={result.elapsed * 1000.0:.1f}"
    )
    return EXIT_CODES[result.outcome]


def cmd_simulate(args) -> int:
    inst = _load_instance(args.instance)
    if inst is None:
        return EXIT_INPUT
    try:
        with open(args.plan, encoding="utf-8") as fh:
            plan = planner.result_from_dict(json.load(fh))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot read plan {args.plan}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    timing = executor.TimingParams(args.pick, args.place, args.speed)
    try:
        trace = executor.simulate(inst, plan, timing)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(trace.to_jsonl())
    print(f"makespan={trace.makespan:.3f} wait={trace.total_wait:.3f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        grid = metrics.parse_grid(args.grid)
        strategies = [planner.Strategy.parse(s) for s in args.strategies.split(",") if s.strip()]
    except ValueError as exc:
        args.parser.error(str(exc))
    if not strategies:
        args.parser.error("--strategies is empty")
    if args.seeds < 1 or args.jobs < 1:
        args.parser.error("--seeds and --jobs must be >= 1")
    rows = metrics.run_benchmark(
        grid, args.seeds, strategies, args.time_limit, args.m, _gen_params(args), args.jobs
    )
    text = metrics.rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(metrics.summary_table(metrics.summarize(rows)), file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sortplan", description="Ordered multi-robot object sorting planner")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--diameter-min", type=float)
    p.add_argument("--diameter-max", type=float)
    _add_density_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("plan", help="plan a sorting sequence")
    p.add_argument("--instance", required=True)
    p.add_argument("--strategy", choices=[s.value for s in planner.Strategy], default="best")
    p.add_argument("--time-limit", type=_positive_float, default=30.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="execute a plan with the instance robots")
    p.add_argument("--instance", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--speed", type=_positive_float, help="robot speed in m/s (default: per robot, 1.0)")
    p.add_argument("--pick", type=float, default=3.0, help="pick duration in seconds")
    p.add_argument("--place", type=float, default=3.0, help="place duration in seconds")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="run the benchmark grid and emit CSV")
    p.add_argument("--grid", default="10,15,20,25,30x1,3,5")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--strategies", default="bfs,dfs,best,astar")
    p.add_argument("--time-limit", type=_positive_float, default=30.0)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    _add_density_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def configure_logging() -> None:
    level = os.environ.get("SORT_PLANNER_LOG", "quiet").strip().lower()
    logging.basicConfig(
        level=LOG_LEVELS.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    args.parser = parser
    if args.command == "simulate" and (args.pick < 0 or args.place < 0):
        parser.error("--pick and --place must be >= 0")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
