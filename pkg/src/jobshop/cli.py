"""Command line interface.

Subcommands:

* ``solve``     run the window pipeline on one instance file.
* ``decompose`` print the static window assignment as fact lines.
* ``bench``     run a suite described by a JSON config and write a report.
* ``gen``       generate a random instance file.
* ``verify``    check a schedule CSV against an instance; exit 0 iff feasible.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from .core import verify_schedule
from .decompose import FAMILIES, Strategy, assign_windows, emit_windows, rank_operations
from .formats import FORMATS, emit_instance, emit_schedule_csv, parse_instance, parse_schedule_csv
from .pipeline import PipelineConfig, result_to_json, run_pipeline
from .solve import Budget


def _add_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format", choices=FORMATS, default="standard", help="instance file format"
    )


def _add_budget(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--budget-ms", type=int, help="total wall-time budget in ms")
    group.add_argument("--budget-nodes", type=int, help="total search-node budget")


def _budget(args: argparse.Namespace) -> Budget:
    return Budget(wall_ms=args.budget_ms, nodes=args.budget_nodes)


def _load_instance(path: str, fmt: str):
    return parse_instance(Path(path).read_text(), fmt)


def _cmd_solve(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance, args.format)
    cfg = PipelineConfig(
        strategy=Strategy(args.strategy, args.dynamic),
        windows=args.windows,
        overlap_pct=args.overlap,
        compression=args.compress,
        total_budget=_budget(args),
    )
    result = run_pipeline(inst, cfg)
    print(f"makespan {result.makespan}")
    for w in result.window_stats:
        flag = " interrupted" if w.interrupted else ""
        print(
            f"window {w.window}: ops {w.ops} horizon {w.window_makespan} "
            f"nodes {w.nodes} elapsed {w.elapsed_ms:.1f}ms{flag}"
        )
    if args.out:
        Path(args.out).write_text(emit_schedule_csv(inst, result.schedule))
    if args.json:
        Path(args.json).write_text(
            json.dumps(result_to_json(inst, result), indent=2) + "\n"
        )
    return 0


def _cmd_decompose(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance, args.format)
    plan = assign_windows(rank_operations(inst, Strategy(args.strategy)), args.windows)
    sys.stdout.write(emit_windows(plan))
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    spec = json.loads(config_path.read_text())
    suite = bench_mod.load_suite_config(spec, base_dir=config_path.parent)
    rows = bench_mod.run_suite(suite, parallel=args.parallel)
    fmt = "json" if args.out and args.out.endswith(".json") else "csv"
    report = bench_mod.emit_report(rows, fmt)
    if args.out:
        Path(args.out).write_text(report)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(report)
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    inst = bench_mod.generate_instance(
        args.jobs, args.machines, args.pmin, args.pmax, args.seed
    )
    text = emit_instance(inst, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    inst = _load_instance(args.instance, args.format)
    sched = parse_schedule_csv(inst, Path(args.schedule).read_text())
    report = verify_schedule(inst, sched)
    if report.ok:
        print(f"feasible: {len(sched)} operations verified")
        return 0
    for violation in report.violations:
        ops = " ".join(f"({r.job},{r.step})" for r in violation.ops)
        print(f"{violation.kind}: {ops}: {violation.detail}")
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jobshop",
        description="Job-shop scheduling by time-window decomposition",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="schedule one instance")
    p.add_argument("instance")
    _add_format(p)
    p.add_argument("--strategy", choices=FAMILIES, required=True)
    p.add_argument("--dynamic", action="store_true", help="re-rank each window")
    p.add_argument("--windows", type=int, required=True)
    p.add_argument("--overlap", type=int, default=0, metavar="PCT")
    p.add_argument("--compress", action="store_true")
    _add_budget(p)
    p.add_argument("--out", help="write schedule CSV here")
    p.add_argument("--json", help="write full result JSON here")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("decompose", help="print static window facts")
    p.add_argument("instance")
    _add_format(p)
    p.add_argument("--strategy", choices=FAMILIES, required=True)
    p.add_argument("--windows", type=int, required=True)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("bench", help="run a suite from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--parallel", type=int, default=1, metavar="K")
    p.add_argument("--out", help="report path (.json for JSON, else CSV)")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--jobs", type=int, required=True)
    p.add_argument("--machines", type=int, required=True)
    p.add_argument("--pmin", type=int, required=True)
    p.add_argument("--pmax", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--format", choices=FORMATS, default="standard")
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("verify", help="check a schedule CSV against an instance")
    p.add_argument("instance")
    p.add_argument("schedule")
    _add_format(p)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
