"""Suite runner, instance generator, and report emission.

A suite is the Cartesian product of instances and parameter combinations
(strategy, window count, overlap percentage, compression flag), each run
through the pipeline with the total budget split evenly over windows.
Reports list one row per run plus per-combination averages over instances.

Node-budget suites are fully deterministic: reruns with identical seeds
produce byte-identical reports. To keep that property, elapsed times are
reported as 0 when the budget is node based; wall-budget suites report
real milliseconds.
"""

from __future__ import annotations

import csv
import io
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .core import Instance, instance_from_jobs
from .decompose import Strategy
from .formats import parse_instance
from .pipeline import PipelineConfig, RunResult, run_pipeline
from .solve import Budget

REPORT_HEADER = [
    "instance",
    "strategy",
    "windows",
    "overlap_pct",
    "compression",
    "makespan",
    "elapsed_ms",
    "interrupted",
]

AGGREGATE_KEY = "aggregate"


def generate_instance(
    jobs: int, machines: int, p_min: int, p_max: int, seed: int
) -> Instance:
    """Random instance where each job visits every machine exactly once in a
    seeded-random order, with uniform integer processing times."""
    if jobs < 1 or machines < 1:
        raise ValueError("jobs and machines must be >= 1")
    if not 1 <= p_min <= p_max:
        raise ValueError("need 1 <= p_min <= p_max")
    rng = random.Random(seed)
    rows = []
    for _ in range(jobs):
        order = rng.sample(range(1, machines + 1), machines)
        rows.append([(m, rng.randint(p_min, p_max)) for m in order])
    return instance_from_jobs(rows)


@dataclass(frozen=True)
class SuiteConfig:
    instances: tuple[tuple[str, Instance], ...]
    strategies: tuple[Strategy, ...]
    window_counts: tuple[int, ...]
    overlaps: tuple[int, ...]
    compression: tuple[bool, ...]
    budget: Budget

    def __post_init__(self) -> None:
        for name, values in (
            ("instances", self.instances),
            ("strategies", self.strategies),
            ("window_counts", self.window_counts),
            ("overlaps", self.overlaps),
            ("compression", self.compression),
        ):
            if not values:
                raise ValueError(f"suite config has no {name}")

    def cells(self):
        for instance_id, inst in self.instances:
            for strategy in self.strategies:
                for windows in self.window_counts:
                    for overlap in self.overlaps:
                        for comp in self.compression:
                            yield instance_id, inst, PipelineConfig(
                                strategy=strategy,
                                windows=windows,
                                overlap_pct=overlap,
                                compression=comp,
                                total_budget=self.budget,
                            )


@dataclass(frozen=True)
class ResultRow:
    instance: str
    strategy: str
    windows: int
    overlap_pct: int
    compression: bool
    makespan: int | float | None
    elapsed_ms: int | float | None
    interrupted: int | float | None
    error: str | None = None


def _row_for(instance_id: str, cfg: PipelineConfig, result: RunResult, deterministic: bool) -> ResultRow:
    return ResultRow(
        instance=instance_id,
        strategy=str(cfg.strategy),
        windows=cfg.windows,
        overlap_pct=cfg.overlap_pct,
        compression=cfg.compression,
        makespan=result.makespan,
        elapsed_ms=0 if deterministic else int(round(result.total_elapsed_ms)),
        interrupted=result.interrupted_count,
    )


def _error_row(instance_id: str, cfg: PipelineConfig, message: str) -> ResultRow:
    return ResultRow(
        instance=instance_id,
        strategy=str(cfg.strategy),
        windows=cfg.windows,
        overlap_pct=cfg.overlap_pct,
        compression=cfg.compression,
        makespan=None,
        elapsed_ms=None,
        interrupted=None,
        error=message,
    )


def _run_cell(args: tuple[str, Instance, PipelineConfig]) -> tuple[ResultRow, RunResult | None]:
    instance_id, inst, cfg = args
    deterministic = cfg.total_budget.wall_ms is None
    try:
        result = run_pipeline(inst, cfg)
    except Exception as exc:  # error rows keep the suite going
        return _error_row(instance_id, cfg, str(exc)), None
    return _row_for(instance_id, cfg, result, deterministic), result


def run_suite(
    cfg: SuiteConfig,
    parallel: int = 1,
    on_result: Callable[[str, Instance, PipelineConfig, RunResult], None] | None = None,
) -> list[ResultRow]:
    """Execute every cell, append per-combination averages, return all rows.

    ``on_result`` is invoked with each successful run (serial mode only),
    which test harnesses use to inspect the emitted schedules.
    """
    cells = list(cfg.cells())
    rows: list[ResultRow] = []
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(_run_cell, cells))
    else:
        outcomes = [_run_cell(cell) for cell in cells]
    for (instance_id, inst, pipeline_cfg), (row, result) in zip(cells, outcomes):
        rows.append(row)
        if on_result is not None and result is not None:
            on_result(instance_id, inst, pipeline_cfg, result)
    rows.extend(aggregate_rows(rows))
    return rows


def aggregate_rows(rows: Sequence[ResultRow]) -> list[ResultRow]:
    """Mean makespan/elapsed/interrupts per (strategy, windows, overlap,
    compression) combination, in first-appearance order; error rows are
    skipped."""
    groups: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        if row.error is not None or row.instance == AGGREGATE_KEY:
            continue
        key = (row.strategy, row.windows, row.overlap_pct, row.compression)
        groups.setdefault(key, []).append(row)
    out = []
    for (strategy, windows, overlap, comp), members in groups.items():
        count = len(members)
        out.append(
            ResultRow(
                instance=AGGREGATE_KEY,
                strategy=strategy,
                windows=windows,
                overlap_pct=overlap,
                compression=comp,
                makespan=round(sum(r.makespan for r in members) / count, 1),
                elapsed_ms=round(sum(r.elapsed_ms for r in members) / count, 1),
                interrupted=round(sum(r.interrupted for r in members) / count, 1),
            )
        )
    return out


def _cell_text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def emit_report(rows: Sequence[ResultRow], fmt: str = "csv") -> str:
    """Render rows as CSV or JSON; both carry the same fields in the same order."""
    if not rows:
        raise ValueError("no rows to report")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for row in rows:
            writer.writerow(
                [
                    _cell_text(v)
                    for v in (
                        row.instance,
                        row.strategy,
                        row.windows,
                        row.overlap_pct,
                        row.compression,
                        row.makespan,
                        row.elapsed_ms,
                        row.interrupted,
                    )
                ]
            )
        return buf.getvalue()
    if fmt == "json":
        payload = [
            {
                "instance": row.instance,
                "strategy": row.strategy,
                "windows": row.windows,
                "overlap_pct": row.overlap_pct,
                "compression": row.compression,
                "makespan": row.makespan,
                "elapsed_ms": row.elapsed_ms,
                "interrupted": row.interrupted,
            }
            for row in rows
        ]
        return json.dumps(payload, indent=2) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def load_suite_config(spec: dict, base_dir: Path | None = None) -> SuiteConfig:
    """Build a SuiteConfig from a JSON-style mapping.

    Keys: ``instances`` (list of paths) or ``generator`` (count, jobs,
    machines, pmin, pmax, seed), optional ``format`` for paths,
    ``strategies`` (families), optional ``modes`` (static/dynamic),
    ``windows``, ``overlaps``, ``compression``, and ``budget`` with either
    ``nodes`` or ``wall_ms``.
    """
    base = base_dir or Path.cwd()
    instances: list[tuple[str, Instance]] = []
    if "instances" in spec:
        fmt = spec.get("format", "standard")
        for entry in spec["instances"]:
            path = Path(entry)
            if not path.is_absolute():
                path = base / path
            instances.append((path.stem, parse_instance(path.read_text(), fmt)))
    if "generator" in spec:
        g = spec["generator"]
        seed = int(g.get("seed", 0))
        for i in range(int(g.get("count", 1))):
            instances.append(
                (
                    f"gen-{seed + i}",
                    generate_instance(
                        int(g["jobs"]), int(g["machines"]),
                        int(g.get("pmin", 1)), int(g.get("pmax", 99)),
                        seed + i,
                    ),
                )
            )

    modes = spec.get("modes", ["static"])
    strategies = tuple(
        Strategy(family, mode == "dynamic")
        for family in spec.get("strategies", ["m-est"])
        for mode in modes
    )
    budget_spec = spec.get("budget", {})
    budget = Budget(
        wall_ms=budget_spec.get("wall_ms"), nodes=budget_spec.get("nodes")
    )
    return SuiteConfig(
        instances=tuple(instances),
        strategies=strategies,
        window_counts=tuple(int(w) for w in spec.get("windows", [1])),
        overlaps=tuple(int(o) for o in spec.get("overlaps", [0])),
        compression=tuple(bool(c) for c in spec.get("compression", [False])),
        budget=budget,
    )
