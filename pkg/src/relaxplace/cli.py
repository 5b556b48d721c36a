"""Command-line entry point: solve, validate, generate, bench, report."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import bench as bench_mod
from . import report as report_mod
from .facts import ParseError, parse_facts
from .generator import (
    DEFAULT_APP_SIZES,
    DEFAULT_INFRA_SIZES,
    DEFAULT_PAIR_COUNT,
    generate_suite,
    load_templates,
)
from .semantics import check_placement, lift_cost
from .solution_io import describe_outcome, outcome_from_json, outcome_to_json
from .solver import EXIT_CODES, SolveConfig, certify, solve


def _sizes(text: str):
    return tuple(int(v) for v in text.split(",") if v)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaxplace",
        description="Constraint-relaxed cloud-edge application placement toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one instance file")
    p_solve.add_argument("instance", help="fact file describing infrastructure + application")
    p_solve.add_argument("--strategy", choices=["bb", "core"], default="bb")
    p_solve.add_argument("--timeout", type=float, default=180.0)
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--format", choices=["human", "json"], default="human")
    p_solve.add_argument(
        "--emit-intermediate",
        action="store_true",
        help="stream each improving solution to stderr as it is found",
    )
    p_solve.add_argument(
        "--strict-costs",
        action="store_true",
        help="soft requirements without violation_cost facts lift for free",
    )

    p_val = sub.add_parser("validate", help="re-check a solution JSON against its instance")
    p_val.add_argument("instance")
    p_val.add_argument("solution", help="JSON file as emitted by `solve --format json`")
    p_val.add_argument("--strict-costs", action="store_true")

    p_gen = sub.add_parser("generate", help="materialize a seeded instance suite")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--seed", default="0", help="master seed")
    p_gen.add_argument(
        "--infra-sizes", type=_sizes, default=DEFAULT_INFRA_SIZES, metavar="N1,N2,..."
    )
    p_gen.add_argument(
        "--app-sizes", type=_sizes, default=DEFAULT_APP_SIZES, metavar="K1,K2,..."
    )
    p_gen.add_argument("--count", type=int, default=DEFAULT_PAIR_COUNT)
    p_gen.add_argument("--templates", help="JSON template file (default: shipped profiles)")
    p_gen.add_argument("--ba-attachment", type=int, default=2)
    p_gen.add_argument("--er-probability", type=float, default=0.3)

    p_bench = sub.add_parser("bench", help="run strategies over a directory of instances")
    p_bench.add_argument("instance_dir")
    p_bench.add_argument("--strategies", default="bb,core", help="comma-separated")
    p_bench.add_argument("--timeout", type=float, default=180.0)
    p_bench.add_argument(
        "--jobs", type=int, default=min(os.cpu_count() or 1, 16), help="parallel runs (max 16)"
    )
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--csv-out", required=True)

    p_rep = sub.add_parser("report", help="render figures from a bench CSV")
    p_rep.add_argument("csv")
    p_rep.add_argument("--out", required=True, help="directory for the figures")
    p_rep.add_argument("--timeout", type=float, default=180.0, help="timeout used in the sweep")

    return parser


def _load_instance(path: str, strict_costs: bool):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(1)
    try:
        return parse_facts(text, strict_costs=strict_costs)
    except ParseError as exc:
        print(f"error: {path}:{exc}", file=sys.stderr)
        raise SystemExit(1)


def cmd_solve(args) -> int:
    infra, app = _load_instance(args.instance, args.strict_costs)
    config = SolveConfig(
        strategy=args.strategy,
        timeout=args.timeout,
        seed=args.seed,
        emit_intermediate=args.emit_intermediate,
    )
    start = time.monotonic()

    def on_incumbent(elapsed, solution):
        if args.emit_intermediate:
            print(
                f"incumbent at {elapsed:.3f}s cost {solution.cost}",
                file=sys.stderr,
                flush=True,
            )

    outcome = solve(infra, app, config, on_incumbent=on_incumbent)
    if outcome.best is not None and not certify(infra, app, outcome.best):
        print("internal error: solution failed certification", file=sys.stderr)
        return 1
    if args.format == "json":
        print(outcome_to_json(outcome))
    else:
        print(describe_outcome(outcome))
        if outcome.status == "infeasible":
            print("hard requirements unsatisfiable")
    del start
    return EXIT_CODES[outcome.status]


def cmd_validate(args) -> int:
    infra, app = _load_instance(args.instance, args.strict_costs)
    try:
        outcome = outcome_from_json(Path(args.solution).read_text())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: malformed solution file: {exc}", file=sys.stderr)
        return 1
    if outcome.best is None:
        print(f"no solution to validate (status {outcome.status})")
        return 0 if outcome.status in ("infeasible", "unknown") else 1
    solution = outcome.best
    try:
        violations = check_placement(infra, app, solution.assignment, solution.lifted)
    except ValueError as exc:
        print(f"invalid: {exc}")
        return 2
    for violation in violations:
        print(f"violation: {violation.describe()}")
    recomputed = lift_cost(app, solution.lifted)
    if recomputed != solution.cost:
        print(f"cost mismatch: recorded {solution.cost}, recomputed {recomputed}")
    if violations or recomputed != solution.cost:
        return 2
    print("valid")
    return 0


def cmd_generate(args) -> int:
    overrides = {
        "ba_attachment": args.ba_attachment,
        "er_probability": args.er_probability,
    }
    if args.templates:
        node_t, service_t = load_templates(args.templates)
        overrides["node_templates"] = node_t
        overrides["service_templates"] = service_t
    manifest = generate_suite(
        args.out,
        master_seed=args.seed,
        infra_sizes=args.infra_sizes,
        app_sizes=args.app_sizes,
        count=args.count,
        **overrides,
    )
    print(f"wrote {len(manifest['files'])} instances to {args.out}")
    return 0


def cmd_bench(args) -> int:
    instance_dir = Path(args.instance_dir)
    paths = sorted(instance_dir.glob("*.lp"))
    if not paths:
        print(f"error: no .lp instances in {instance_dir}", file=sys.stderr)
        return 1
    strategies = [s for s in args.strategies.split(",") if s]
    jobs = max(1, min(args.jobs, 16))
    rows = bench_mod.run_benchmark(paths, strategies, args.timeout, jobs, args.csv_out, args.seed)
    solved = sum(1 for r in rows if r["status"] == "optimal")
    print(f"{len(rows)} runs ({solved} optimal) -> {args.csv_out}")
    return 0


def cmd_report(args) -> int:
    produced = report_mod.render_report(args.csv, args.out, timeout=args.timeout)
    for path in produced:
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "solve": cmd_solve,
        "validate": cmd_validate,
        "generate": cmd_generate,
        "bench": cmd_bench,
        "report": cmd_report,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
