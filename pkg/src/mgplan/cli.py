"""Command-line experiment runner.

Exit codes: 0 ok, 1 usage error, 2 parse/ground error, 3 internal
invariant violation.  Frontend diagnostics go to stderr as
``file:line:col: message``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .controller import InternalError
from .grounding import GroundingError, load_ground_problem
from .heuristics import HEURISTIC_KINDS
from .pddl import PddlError

_HEURISTIC_FLAGS = {"ff": "ff", "add": "add", "max": "max", "goalcount": "goal_count", "zero": "zero"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mgp-bench", description="Run moving-goal planning experiments.")
    p.add_argument("--domain", required=True, help="PDDL domain file")
    p.add_argument("--problem", required=True, help="PDDL problem file")
    p.add_argument("--alg", required=True, choices=bench.ALGORITHMS, help="algorithm to run")
    p.add_argument("--weight", type=float, default=1.0, help="heuristic weight w >= 1")
    p.add_argument("--delay-coef", type=float, default=1.2, help="plan-follow delay coefficient c")
    p.add_argument(
        "--goal-rate",
        required=True,
        help="comma-separated goal-evolution coefficients, e.g. 1,5,10",
    )
    p.add_argument("--runs", type=int, default=None, help="repetitions per cell")
    p.add_argument("--timeout-s", type=float, default=None, help="CPU budget per run, seconds")
    p.add_argument("--max-nodes", type=int, default=4_000_000, help="stored-node cap per run")
    p.add_argument("--seed", type=int, default=0, help="base seed; run k uses seed+k")
    p.add_argument(
        "--heuristic", choices=sorted(_HEURISTIC_FLAGS), default="ff", help="heuristic estimator"
    )
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--trace-dir", default=None, help="directory for per-run trace logs")
    p.add_argument("--profile", choices=sorted(bench.PROFILES), default=None)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1

    profile = bench.PROFILES.get(args.profile, bench.PROFILES["paper"])
    runs = args.runs if args.runs is not None else profile["runs"]
    timeout_s = args.timeout_s if args.timeout_s is not None else profile["timeout_s"]
    if args.weight < 1:
        print("mgp-bench: error: --weight must be >= 1", file=sys.stderr)
        return 1
    try:
        goal_rates = [int(x) for x in args.goal_rate.split(",") if x]
        if not goal_rates or any(g < 1 for g in goal_rates):
            raise ValueError
    except ValueError:
        print("mgp-bench: error: --goal-rate needs positive integers", file=sys.stderr)
        return 1

    try:
        problem = load_ground_problem(args.domain, args.problem)
    except FileNotFoundError as exc:
        print(f"mgp-bench: error: {exc}", file=sys.stderr)
        return 2
    except PddlError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except GroundingError as exc:
        print(f"mgp-bench: error: {exc}", file=sys.stderr)
        return 2

    if args.trace_dir is not None:
        Path(args.trace_dir).mkdir(parents=True, exist_ok=True)

    records = []
    try:
        for g_r in goal_rates:
            records.extend(
                bench.run_cell(
                    problem,
                    args.alg,
                    g_r=g_r,
                    runs=runs,
                    seed_base=args.seed,
                    weight=args.weight,
                    delay_coefficient=args.delay_coef,
                    heuristic=_HEURISTIC_FLAGS[args.heuristic],
                    timeout_s=timeout_s,
                    max_nodes=args.max_nodes,
                    trace_dir=args.trace_dir,
                )
            )
    except InternalError as exc:
        print(f"mgp-bench: internal error: {exc}", file=sys.stderr)
        return 3

    bench.write_csv(bench.sort_records(records), args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
