"""Exact makespan minimization for one window of operations.

A window subproblem consists of free operations (the current window plus
any carried-over ones), a fixed partial schedule for everything committed
earlier, job precedence arcs, and disjunctive pairs of free operations
sharing a machine. Fixed operations act through two summaries only: the
release time of each machine and the completion time of fixed job
predecessors.

Once every disjunctive pair is oriented, the pointwise-minimal feasible
start times are the longest-path values in the resulting DAG. The solver
runs depth-first branch and bound over pair orientations, seeded with a
list-scheduling incumbent and pruned with the longest-path bound of the
partial orientation, which never exceeds the makespan of any completion.
Exhausting the search proves optimality; running out of budget returns the
best incumbent as an interrupted result.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import cached_property
from typing import IO, Iterable, Mapping

from .core import Instance, OperationRef, Schedule

STATUS_OPTIMAL = "optimal"
STATUS_FEASIBLE = "feasible"
STATUS_INTERRUPTED = "feasible-interrupted"
STATUS_INFEASIBLE = "infeasible-input"

Disjunction = tuple[OperationRef, OperationRef]
Orientation = Mapping[Disjunction, bool]


class CycleError(ValueError):
    """An orientation closed a cycle with the precedence arcs."""


@dataclass(frozen=True)
class Budget:
    """Wall-time and/or node limits; both None means unlimited."""

    wall_ms: int | None = None
    nodes: int | None = None

    def __post_init__(self) -> None:
        for value in (self.wall_ms, self.nodes):
            if value is not None and value < 0:
                raise ValueError("budget limits must be non-negative")

    @classmethod
    def unlimited(cls) -> "Budget":
        return cls()

    @property
    def is_unlimited(self) -> bool:
        return self.wall_ms is None and self.nodes is None

    def split(self, n: int) -> "Budget":
        """Evenly divide the budget over n consumers (integer division)."""
        return Budget(
            None if self.wall_ms is None else self.wall_ms // n,
            None if self.nodes is None else self.nodes // n,
        )


@dataclass(frozen=True)
class SubProblem:
    """One window's scheduling problem under fixed earlier decisions."""

    free_ops: tuple[OperationRef, ...]
    fixed: Schedule
    arcs: tuple[tuple[OperationRef, OperationRef], ...]
    disjunctions: tuple[Disjunction, ...]
    release: Mapping[int, int]
    pred_completion: Mapping[OperationRef, int]
    machine: Mapping[OperationRef, int]
    processing: Mapping[OperationRef, int]
    fixed_makespan: int

    @cached_property
    def _indexed(self) -> "_Indexed":
        return _Indexed(self)


@dataclass(frozen=True)
class SolveResult:
    starts: Schedule
    window_makespan: int
    status: str
    nodes: int
    elapsed_ms: float


def build_subproblem(
    inst: Instance,
    window_ops: Iterable[OperationRef],
    overlap_ops: Iterable[OperationRef],
    fixed: Schedule,
) -> SubProblem:
    """Assemble the subproblem for a window plus carried-over operations.

    ``overlap_ops`` must currently be covered by ``fixed``; they are removed
    from it and rescheduled together with the window.
    """
    window = set(window_ops)
    overlap = set(overlap_ops)
    bad = window & fixed.covered
    if bad:
        raise ValueError(f"window operations already fixed: {sorted(bad)}")
    missing = overlap - fixed.covered
    if missing:
        raise ValueError(f"overlap operations not fixed: {sorted(missing)}")

    remaining = fixed.without(overlap)
    free = sorted(window | overlap)
    free_set = set(free)

    release = {m: 0 for m in inst.machines}
    fixed_makespan = 0
    for ref in remaining.covered:
        op = inst.op(ref)
        done = remaining[ref] + op.processing
        if done > release[op.machine]:
            release[op.machine] = done
        if done > fixed_makespan:
            fixed_makespan = done

    arcs = []
    pred_completion: dict[OperationRef, int] = {}
    for ref in free:
        succ = OperationRef(ref.job, ref.step + 1)
        if succ in remaining:
            raise ValueError(f"{ref} is free but its successor {succ} is fixed")
        pred_completion[ref] = 0
        if ref.step > 1:
            pred = OperationRef(ref.job, ref.step - 1)
            if pred in free_set:
                arcs.append((pred, ref))
            elif pred in remaining:
                pred_completion[ref] = remaining.completion(inst, pred)
            else:
                raise ValueError(
                    f"job predecessor of {ref} is neither fixed nor free"
                )

    by_machine: dict[int, list[OperationRef]] = {}
    for ref in free:
        by_machine.setdefault(inst.machine(ref), []).append(ref)
    disjunctions = []
    for ops in by_machine.values():
        for i, a in enumerate(ops):
            for b in ops[i + 1 :]:
                if a.job != b.job:
                    pair = (a, b) if a.job < b.job else (b, a)
                    disjunctions.append(pair)
    disjunctions.sort()

    return SubProblem(
        free_ops=tuple(free),
        fixed=remaining,
        arcs=tuple(arcs),
        disjunctions=tuple(disjunctions),
        release=release,
        pred_completion=pred_completion,
        machine={ref: inst.machine(ref) for ref in free},
        processing={ref: inst.processing(ref) for ref in free},
        fixed_makespan=fixed_makespan,
    )


class _Indexed:
    """Array view of a subproblem for the search inner loops."""

    __slots__ = ("refs", "index", "proc", "base_lb", "job_arcs", "pairs", "fixed_makespan")

    def __init__(self, sp: SubProblem):
        self.refs = list(sp.free_ops)
        self.index = {ref: i for i, ref in enumerate(self.refs)}
        self.proc = [sp.processing[ref] for ref in self.refs]
        self.base_lb = [
            max(0, sp.pred_completion.get(ref, 0), sp.release.get(sp.machine[ref], 0))
            for ref in self.refs
        ]
        self.job_arcs = [(self.index[u], self.index[v]) for u, v in sp.arcs]
        self.pairs = [(self.index[a], self.index[b]) for a, b in sp.disjunctions]
        self.fixed_makespan = sp.fixed_makespan


def _longest_path(idx: _Indexed, adj, radj):
    """Earliest starts via Kahn's algorithm; returns (starts, cyclic)."""
    n = len(idx.refs)
    starts = list(idx.base_lb)
    indeg = [0] * n
    for u in range(n):
        for v in adj[u]:
            indeg[v] += 1
    ready = [u for u in range(n) if indeg[u] == 0]
    seen = 0
    proc = idx.proc
    while ready:
        u = ready.pop()
        seen += 1
        done = starts[u] + proc[u]
        for v in adj[u]:
            if starts[v] < done:
                starts[v] = done
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    return starts, seen < n


def _adjacency(idx: _Indexed, oriented: Iterable[tuple[int, bool]]):
    n = len(idx.refs)
    adj = [[] for _ in range(n)]
    radj = [[] for _ in range(n)]
    for u, v in idx.job_arcs:
        adj[u].append(v)
        radj[v].append(u)
    for k, first in oriented:
        a, b = idx.pairs[k]
        u, v = (a, b) if first else (b, a)
        adj[u].append(v)
        radj[v].append(u)
    return adj, radj


def _bound(idx: _Indexed, starts) -> int:
    mk = idx.fixed_makespan
    for start, p in zip(starts, idx.proc):
        if start + p > mk:
            mk = start + p
    return mk


def _orientation_items(sp: SubProblem, orientation: Orientation, total: bool):
    idx = sp._indexed
    pair_index = {pair: k for k, pair in enumerate(sp.disjunctions)}
    items = []
    for pair, first in orientation.items():
        if pair not in pair_index:
            raise ValueError(f"{pair} is not a disjunction of this subproblem")
        items.append((pair_index[pair], bool(first)))
    if total and len(items) != len(sp.disjunctions):
        raise ValueError("orientation must cover every disjunction")
    return idx, items


def earliest_starts(sp: SubProblem, orientation: Orientation) -> Schedule:
    """Canonical smallest start times for a total orientation.

    Raises CycleError when the orientation is inconsistent with the
    precedence arcs.
    """
    idx, items = _orientation_items(sp, orientation, total=True)
    adj, radj = _adjacency(idx, items)
    starts, cyclic = _longest_path(idx, adj, radj)
    if cyclic:
        raise CycleError("orientation closes a precedence cycle")
    return Schedule({ref: starts[i] for i, ref in enumerate(idx.refs)})


def critical_path_bound(sp: SubProblem, orientation: Orientation) -> int:
    """Longest-path makespan ignoring unoriented disjunctions.

    Admissible: no completion of the partial orientation can finish below
    this value.
    """
    idx, items = _orientation_items(sp, orientation, total=False)
    adj, radj = _adjacency(idx, items)
    starts, cyclic = _longest_path(idx, adj, radj)
    if cyclic:
        raise CycleError("orientation closes a precedence cycle")
    return _bound(idx, starts)


def window_makespan(sp: SubProblem, starts: Schedule) -> int:
    """Makespan over fixed and free operations together."""
    mk = sp.fixed_makespan
    for ref in sp.free_ops:
        done = starts[ref] + sp.processing[ref]
        if done > mk:
            mk = done
    return mk


def greedy_incumbent(sp: SubProblem) -> SolveResult:
    """List-scheduling start: repeatedly dispatch the ready operation with
    the smallest (earliest feasible start, processing, job, step) key."""
    t0 = time.monotonic()
    idx = sp._indexed
    n = len(idx.refs)
    free_pred = [-1] * n
    for u, v in idx.job_arcs:
        free_pred[v] = u

    machine_avail: dict[int, int] = dict(sp.release)
    starts = [0] * n
    scheduled = [False] * n
    pred_done = list(idx.base_lb)

    for _ in range(n):
        best = None
        best_key = None
        for i in range(n):
            if scheduled[i]:
                continue
            p = free_pred[i]
            if p >= 0 and not scheduled[p]:
                continue
            ref = idx.refs[i]
            est = max(pred_done[i], machine_avail[sp.machine[ref]])
            key = (est, idx.proc[i], ref.job, ref.step)
            if best_key is None or key < best_key:
                best, best_key = i, key
        assert best is not None
        ref = idx.refs[best]
        start = best_key[0]
        starts[best] = start
        scheduled[best] = True
        machine_avail[sp.machine[ref]] = start + idx.proc[best]
        succ = OperationRef(ref.job, ref.step + 1)
        if succ in idx.index:
            j = idx.index[succ]
            pred_done[j] = max(pred_done[j], start + idx.proc[best])

    sched = Schedule({ref: starts[i] for i, ref in enumerate(idx.refs)})
    return SolveResult(
        starts=sched,
        window_makespan=window_makespan(sp, sched),
        status=STATUS_FEASIBLE,
        nodes=0,
        elapsed_ms=(time.monotonic() - t0) * 1000.0,
    )


def _critical_set(idx: _Indexed, starts, radj) -> set[int]:
    n = len(idx.refs)
    if n == 0:
        return set()
    comp = [starts[i] + idx.proc[i] for i in range(n)]
    mk = max(comp)
    stack = [i for i in range(n) if comp[i] == mk]
    critical: set[int] = set()
    while stack:
        v = stack.pop()
        if v in critical:
            continue
        critical.add(v)
        for u in radj[v]:
            if starts[u] + idx.proc[u] == starts[v]:
                stack.append(u)
    return critical


def _pick_branch(idx: _Indexed, direction, critical) -> int | None:
    unoriented = [k for k, d in enumerate(direction) if d is None]
    if not unoriented:
        return None
    both = [
        k for k in unoriented
        if idx.pairs[k][0] in critical and idx.pairs[k][1] in critical
    ]
    candidates = both or [
        k for k in unoriented
        if idx.pairs[k][0] in critical or idx.pairs[k][1] in critical
    ]
    if not candidates:
        return unoriented[0]
    return min(
        candidates, key=lambda k: (-(idx.proc[idx.pairs[k][0]] + idx.proc[idx.pairs[k][1]]), k)
    )


_APPLY, _UNDO = 0, 1


def solve_window(
    sp: SubProblem, budget: Budget | None = None, trace: IO[str] | None = None
) -> SolveResult:
    """Minimize the window makespan by branch and bound over orientations.

    Branching picks an unoriented disjunction on the current critical path
    (largest combined processing first) and tries the lexicographic job
    order before its inverse. Nodes whose longest-path bound reaches the
    incumbent are pruned, so recorded incumbents strictly decrease and
    natural exhaustion certifies optimality. Budget limits are polled at
    node boundaries; an exhausted budget returns the incumbent as
    ``feasible-interrupted``. With a node budget the search is
    deterministic and platform independent.
    """
    if budget is None:
        budget = Budget.unlimited()
    t0 = time.monotonic()
    idx = sp._indexed
    n_pairs = len(idx.pairs)

    seed = greedy_incumbent(sp)
    best_starts = [seed.starts[ref] for ref in idx.refs]
    best_mk = seed.window_makespan
    if trace is not None:
        trace.write(f"incumbent,0,{best_mk},{int((time.monotonic() - t0) * 1000)}\n")

    adj, radj = _adjacency(idx, ())
    direction: list[bool | None] = [None] * n_pairs
    nodes = 0
    interrupted = False
    stack: list[tuple[int, int, bool]] = [(_APPLY, -1, False)]

    while stack:
        kind, k, first = stack.pop()
        if kind == _UNDO:
            a, b = idx.pairs[k]
            u, v = (a, b) if first else (b, a)
            adj[u].pop()
            radj[v].pop()
            direction[k] = None
            continue
        if k >= 0:
            a, b = idx.pairs[k]
            u, v = (a, b) if first else (b, a)
            adj[u].append(v)
            radj[v].append(u)
            direction[k] = first
            stack.append((_UNDO, k, first))

        if budget.nodes is not None and nodes >= budget.nodes:
            interrupted = True
            break
        if budget.wall_ms is not None and (time.monotonic() - t0) * 1000.0 >= budget.wall_ms:
            interrupted = True
            break
        nodes += 1

        starts, cyclic = _longest_path(idx, adj, radj)
        if cyclic:
            continue
        bound = _bound(idx, starts)
        if bound >= best_mk:
            continue
        branch = _pick_branch(idx, direction, _critical_set(idx, starts, radj))
        if branch is None:
            best_mk = bound
            best_starts = starts[:]
            if trace is not None:
                trace.write(
                    f"incumbent,{nodes},{best_mk},{int((time.monotonic() - t0) * 1000)}\n"
                )
            continue
        stack.append((_APPLY, branch, False))
        stack.append((_APPLY, branch, True))

    return SolveResult(
        starts=Schedule({ref: best_starts[i] for i, ref in enumerate(idx.refs)}),
        window_makespan=best_mk,
        status=STATUS_INTERRUPTED if interrupted else STATUS_OPTIMAL,
        nodes=nodes,
        elapsed_ms=(time.monotonic() - t0) * 1000.0,
    )


def brute_force_optimum(sp: SubProblem, cap: int = 20) -> int:
    """Exact minimum window makespan by enumerating all acyclic total
    orientations; a testing oracle, capped to keep runtime sane."""
    idx = sp._indexed
    n_pairs = len(idx.pairs)
    if n_pairs > cap:
        raise ValueError(f"{n_pairs} disjunctions exceed the enumeration cap {cap}")

    best: int | None = None
    for mask in range(1 << n_pairs):
        oriented = [(k, bool(mask >> k & 1)) for k in range(n_pairs)]
        adj, radj = _adjacency(idx, oriented)
        starts, cyclic = _longest_path(idx, adj, radj)
        if cyclic:
            continue
        mk = _bound(idx, starts)
        if best is None or mk < best:
            best = mk
    assert best is not None  # index-order orientation is always acyclic
    return best
