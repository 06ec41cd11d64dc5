"""The multi-shot control loop.

Windows are scheduled one after another: obtain the next window's
operations (from a precomputed plan in static mode, or by re-ranking the
unscheduled operations in dynamic mode), optionally free a slice of the
previously committed window for rescheduling (overlap), solve the window
subproblem under its share of the budget, optionally left-shift the freshly
decided operations into idle machine slots (compression), and commit. The
merged result covers every operation and is verified after each round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .core import (
    Instance,
    OperationRef,
    Schedule,
    makespan,
    validate_instance,
    verify_schedule,
)
from .decompose import Strategy, assign_windows, next_window, rank_operations
from .formats import emit_schedule_csv
from .solve import Budget, SolveResult, STATUS_INTERRUPTED, build_subproblem, solve_window


@dataclass(frozen=True)
class PipelineConfig:
    strategy: Strategy
    windows: int
    overlap_pct: int = 0
    compression: bool = False
    total_budget: Budget = Budget.unlimited()

    def __post_init__(self) -> None:
        if self.windows < 1:
            raise ValueError("window count must be >= 1")
        if not 0 <= self.overlap_pct <= 100:
            raise ValueError("overlap percentage must be in 0..100")

    @property
    def per_window_budget(self) -> Budget:
        return self.total_budget.split(self.windows)


@dataclass(frozen=True)
class WindowStats:
    window: int
    ops: int
    window_makespan: int
    elapsed_ms: float
    interrupted: bool
    nodes: int


@dataclass(frozen=True)
class RunResult:
    schedule: Schedule
    makespan: int
    window_stats: tuple[WindowStats, ...]
    config: PipelineConfig

    @property
    def interrupted_count(self) -> int:
        return sum(1 for w in self.window_stats if w.interrupted)

    @property
    def total_elapsed_ms(self) -> float:
        return sum(w.elapsed_ms for w in self.window_stats)

    @property
    def total_nodes(self) -> int:
        return sum(w.nodes for w in self.window_stats)


def merge_fixed(fixed: Schedule, newly: Schedule) -> Schedule:
    """Union of disjoint schedules; the pipeline verifies the result."""
    return fixed.merged(newly)


def select_overlap(
    inst: Instance,
    starts: Mapping[OperationRef, int],
    pool: tuple[OperationRef, ...],
    overlap_pct: int,
    committed: Schedule,
) -> tuple[OperationRef, ...]:
    """Pick the latest-starting share of the previous window for rescheduling.

    Takes floor(pct * |pool| / 100) operations in decreasing start order,
    ties broken by larger job id then step. An operation whose job
    successor stays committed outside the selection is dropped; that can
    only come about through repeated machine visits, since successors
    normally live in later windows.
    """
    k = len(pool) * overlap_pct // 100
    ranked = sorted(pool, key=lambda r: (-starts[r], -r.job, -r.step))
    chosen = set(ranked[:k])
    while True:
        dropped = set()
        for ref in chosen:
            succ = OperationRef(ref.job, ref.step + 1)
            if succ in committed and succ not in chosen:
                dropped.add(ref)
        if not dropped:
            break
        chosen -= dropped
    return tuple(ref for ref in ranked[:k] if ref in chosen)


def compress(
    inst: Instance, sched: Schedule, latest_window: tuple[OperationRef, ...]
) -> Schedule:
    """Left-shift latest-window operations into idle slots on their machines.

    Operations are visited in ascending start order (ties: job, step); each
    moves to the earliest time not before its job predecessor's completion
    where its machine is idle, given all other current placements. Starts
    never increase, so neither does the makespan, and a second pass is a
    no-op.
    """
    starts = dict(sched.items())
    by_machine: dict[int, set[OperationRef]] = {}
    for ref in starts:
        by_machine.setdefault(inst.machine(ref), set()).add(ref)

    for ref in sorted(latest_window, key=lambda r: (starts[r], r.job, r.step)):
        op = inst.op(ref)
        lower = 0
        if ref.step > 1:
            pred = OperationRef(ref.job, ref.step - 1)
            if pred in starts:
                lower = starts[pred] + inst.processing(pred)
        busy = sorted(
            (starts[other], starts[other] + inst.processing(other))
            for other in by_machine[op.machine]
            if other != ref
        )
        t = lower
        for s, e in busy:
            if t + op.processing <= s:
                break
            if e > t:
                t = e
        if t < starts[ref]:
            starts[ref] = t
    return Schedule(starts)


def run_pipeline(inst: Instance, cfg: PipelineConfig) -> RunResult:
    """Decompose, solve window by window, refine, and merge.

    In static mode the full decomposition plan is computed up front and
    each round frees the plan's next window plus the overlap carried from
    the previous result. In dynamic mode the next window is re-ranked
    against the committed schedule before the overlap is released, so every
    round commits exactly one window's worth of new operations.
    """
    problems = validate_instance(inst)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))

    n = cfg.windows
    width = math.ceil(inst.n_ops / n)
    budget = cfg.per_window_budget
    plan = None
    if not cfg.strategy.dynamic:
        plan = assign_windows(rank_operations(inst, cfg.strategy), n)

    committed = Schedule.empty()
    prev_free: tuple[OperationRef, ...] = ()
    stats: list[WindowStats] = []
    w = 0
    while True:
        w += 1
        if plan is not None:
            if w > plan.n_windows:
                break
            window_ops = plan.window_ops(w)
        else:
            window_ops = next_window(inst, cfg.strategy, committed, width)
            if not window_ops:
                break

        overlap_ops: tuple[OperationRef, ...] = ()
        if prev_free and cfg.overlap_pct:
            overlap_ops = select_overlap(
                inst, dict(committed.items()), prev_free, cfg.overlap_pct, committed
            )

        sub = build_subproblem(inst, window_ops, overlap_ops, committed)
        result = solve_window(sub, budget)
        committed = merge_fixed(sub.fixed, result.starts)
        free_ops = sub.free_ops
        if cfg.compression:
            committed = compress(inst, committed, free_ops)

        report = verify_schedule(inst, committed)
        if not report.ok:
            raise RuntimeError(
                f"window {w} produced an infeasible partial schedule: "
                f"{report.violations[:3]}"
            )
        stats.append(
            WindowStats(
                window=w,
                ops=len(free_ops),
                window_makespan=makespan(inst, committed),
                elapsed_ms=result.elapsed_ms,
                interrupted=result.status == STATUS_INTERRUPTED,
                nodes=result.nodes,
            )
        )
        prev_free = free_ops

    if committed.covered != frozenset(inst.refs()):
        raise RuntimeError("pipeline did not cover every operation")
    return RunResult(
        schedule=committed,
        makespan=makespan(inst, committed),
        window_stats=tuple(stats),
        config=cfg,
    )


def result_to_json(inst: Instance, result: RunResult) -> dict:
    """JSON-friendly view: config echo, makespan, schedule rows, window stats."""
    cfg = result.config
    rows = []
    for ref, start in result.schedule.items():
        op = inst.op(ref)
        rows.append(
            {
                "job": ref.job,
                "step": ref.step,
                "machine": op.machine,
                "start": start,
                "processing": op.processing,
            }
        )
    rows.sort(key=lambda r: (r["machine"], r["start"]))
    return {
        "config": {
            "strategy": cfg.strategy.family,
            "dynamic": cfg.strategy.dynamic,
            "windows": cfg.windows,
            "overlap_pct": cfg.overlap_pct,
            "compression": cfg.compression,
            "budget": {
                "wall_ms": cfg.total_budget.wall_ms,
                "nodes": cfg.total_budget.nodes,
            },
        },
        "makespan": result.makespan,
        "schedule": rows,
        "windows": [
            {
                "window": s.window,
                "ops": s.ops,
                "window_makespan": s.window_makespan,
                "elapsed_ms": round(s.elapsed_ms, 3),
                "interrupted": s.interrupted,
                "nodes": s.nodes,
            }
            for s in result.window_stats
        ],
    }


def schedule_csv(inst: Instance, result: RunResult) -> str:
    return emit_schedule_csv(inst, result.schedule)
