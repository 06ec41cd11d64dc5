"""Ordering operations and splitting them into balanced time windows.

Four ranking strategies produce a total order of operations that respects
job precedence:

* ``j-est``  ascending earliest starting time, then processing, then job id.
* ``j-mtwr`` descending total work remaining, same tie-breaking.
* ``m-est`` / ``m-mtwr``  repeatedly pick the bottleneck machine (largest
  remaining load of unordered operations) and take its best operation by
  the EST or MTWR key, pulling any unordered job predecessors into the
  order directly before it.

Each strategy comes in a static flavour (measures from the bare instance)
and a dynamic one, where earliest starting times account for a partial
schedule of already committed operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import Instance, OperationRef, Schedule

FAMILIES = ("j-est", "j-mtwr", "m-est", "m-mtwr")


@dataclass(frozen=True)
class Strategy:
    family: str
    dynamic: bool = False

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown strategy family {self.family!r}")

    @property
    def mode(self) -> str:
        return "dynamic" if self.dynamic else "static"

    def __str__(self) -> str:
        return self.family + ("-dyn" if self.dynamic else "")


def parse_strategy(name: str) -> Strategy:
    """Parse ``m-est`` or ``m-est-dyn`` style strategy names."""
    if name.endswith("-dyn"):
        return Strategy(name[: -len("-dyn")], dynamic=True)
    return Strategy(name)


@dataclass(frozen=True)
class Measures:
    """Per-operation ranking measures with processing times alongside."""

    est: Mapping[OperationRef, int]
    mtwr: Mapping[OperationRef, int]
    processing: Mapping[OperationRef, int]

    @classmethod
    def compute(cls, inst: Instance, fixed: Schedule | None = None) -> "Measures":
        return cls(
            est=compute_est(inst, fixed),
            mtwr=compute_mtwr(inst),
            processing={op.ref: op.processing for op in inst.operations()},
        )


def _check_precedence_closed(inst: Instance, fixed: Schedule) -> None:
    for ref in fixed.covered:
        if ref.step > 1 and OperationRef(ref.job, ref.step - 1) not in fixed:
            raise ValueError(
                f"fixed schedule covers {ref} but not its job predecessor"
            )


def compute_est(inst: Instance, fixed: Schedule | None = None) -> dict[OperationRef, int]:
    """Earliest starting time of every operation.

    Without a partial schedule this is the chain sum of processing times of
    the job predecessors. Given ``fixed``, the value for an unscheduled
    operation is the max of its predecessor's completion (actual when fixed,
    estimated otherwise) and the release time of its machine over fixed
    operations; fixed operations keep their actual start.
    """
    if fixed is None:
        fixed = Schedule.empty()
    _check_precedence_closed(inst, fixed)

    release: dict[int, int] = {}
    for ref in fixed.covered:
        op = inst.op(ref)
        done = fixed[ref] + op.processing
        if done > release.get(op.machine, 0):
            release[op.machine] = done

    est: dict[OperationRef, int] = {}
    for job in inst.jobs:
        chain_done = 0
        for op in job:
            start = fixed.get(op.ref)
            if start is None:
                start = max(chain_done, release.get(op.machine, 0))
            est[op.ref] = start
            chain_done = start + op.processing
    return est


def compute_mtwr(inst: Instance) -> dict[OperationRef, int]:
    """Total work remaining: processing of the operation plus its job successors."""
    mtwr: dict[OperationRef, int] = {}
    for job in inst.jobs:
        acc = 0
        for op in reversed(job):
            acc += op.processing
            mtwr[op.ref] = acc
    return mtwr


def _est_key(inst, est):
    return lambda ref: (est[ref], inst.processing(ref), ref.job, ref.step)


def _mtwr_key(inst, mtwr):
    return lambda ref: (-mtwr[ref], inst.processing(ref), ref.job, ref.step)


def rank_operations(
    inst: Instance, strategy: Strategy, fixed: Schedule | None = None
) -> tuple[OperationRef, ...]:
    """Total order over the operations not covered by ``fixed``.

    Indexes increase along every job's step sequence: job-based keys grow
    (EST) or shrink (MTWR) strictly along a chain, and the machine-based
    loop inserts unordered predecessors right before a picked operation.
    """
    if fixed is None:
        fixed = Schedule.empty()
    if not strategy.dynamic and len(fixed):
        raise ValueError("static ranking does not take a partial schedule")

    pending = [ref for ref in inst.refs() if ref not in fixed]
    est = compute_est(inst, fixed)
    if strategy.family == "j-est":
        return tuple(sorted(pending, key=_est_key(inst, est)))
    if strategy.family == "j-mtwr":
        return tuple(sorted(pending, key=_mtwr_key(inst, compute_mtwr(inst))))
    if strategy.family == "m-est":
        return _rank_by_machine(inst, pending, _est_key(inst, est))
    return _rank_by_machine(inst, pending, _mtwr_key(inst, compute_mtwr(inst)))


def _rank_by_machine(inst, pending: list[OperationRef], key) -> tuple[OperationRef, ...]:
    remaining = set(pending)
    loads: dict[int, int] = {}
    for ref in remaining:
        op = inst.op(ref)
        loads[op.machine] = loads.get(op.machine, 0) + op.processing

    order: list[OperationRef] = []
    while remaining:
        machines = {inst.machine(ref) for ref in remaining}
        bottleneck = min(machines, key=lambda m: (-loads[m], m))
        candidates = [ref for ref in remaining if inst.machine(ref) == bottleneck]
        picked = min(candidates, key=key)
        chain = [
            OperationRef(picked.job, s)
            for s in range(1, picked.step)
            if OperationRef(picked.job, s) in remaining
        ]
        chain.append(picked)
        for ref in chain:
            order.append(ref)
            remaining.remove(ref)
            loads[inst.machine(ref)] -= inst.processing(ref)
    return tuple(order)


@dataclass(frozen=True)
class DecompositionPlan:
    """A total order plus a window number for every operation."""

    order: tuple[OperationRef, ...]
    window: Mapping[OperationRef, int]
    width: int

    @property
    def n_windows(self) -> int:
        return max(self.window.values()) if self.window else 0

    def window_ops(self, w: int) -> tuple[OperationRef, ...]:
        return tuple(ref for ref in self.order if self.window[ref] == w)


def assign_windows(order: Sequence[OperationRef], n: int) -> DecompositionPlan:
    """Chop a total order into n windows of width ceil(N/n).

    Every window holds exactly ``width`` operations except possibly the
    last; window numbers never decrease along any job chain because the
    order itself is job-monotone.
    """
    if n < 1:
        raise ValueError("window count must be >= 1")
    if len(set(order)) != len(order):
        raise ValueError("order contains duplicate operations")
    last_step: dict[int, int] = {}
    for ref in order:
        if last_step.get(ref.job, 0) >= ref.step:
            raise ValueError(f"order is not job-monotone at {ref}")
        last_step[ref.job] = ref.step

    width = math.ceil(len(order) / n)
    window = {ref: i // width + 1 for i, ref in enumerate(order)}
    return DecompositionPlan(tuple(order), window, width)


def next_window(
    inst: Instance, strategy: Strategy, fixed: Schedule, width: int
) -> tuple[OperationRef, ...]:
    """First ``width`` unscheduled operations of the strategy's ranking.

    The result is precedence-closed relative to ``fixed`` since rankings
    are job-monotone.
    """
    if width < 1:
        raise ValueError("window width must be >= 1")
    ranked = rank_operations(inst, strategy, fixed if strategy.dynamic else None)
    if not strategy.dynamic:
        ranked = tuple(ref for ref in ranked if ref not in fixed)
    return ranked[:width]


def emit_windows(plan: DecompositionPlan) -> str:
    """Window assignment as fact lines ``window(J,S,W).`` sorted by (job, step)."""
    lines = [
        f"window({ref.job},{ref.step},{plan.window[ref]})."
        for ref in sorted(plan.window)
    ]
    return "\n".join(lines) + "\n"
