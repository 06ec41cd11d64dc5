"""Data model for job-shop instances and schedules.

An instance is an ordered collection of jobs, each job an ordered sequence
of operations that must run on a specific machine for an integral duration.
A schedule maps operations to integer start times and may cover only a
subset of the instance; partial schedules are first-class because solutions
are built window by window and verified after every step.

Job, step and machine identifiers are contiguous 1-based integers inside
the model. Parsers normalize whatever a file uses and keep the original
labels for writing the instance back out.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence


class OperationRef(NamedTuple):
    """Identifies one operation as (job, step), both 1-based."""

    job: int
    step: int


@dataclass(frozen=True)
class Operation:
    ref: OperationRef
    machine: int
    processing: int


@dataclass(frozen=True)
class Instance:
    """Immutable job-shop instance.

    ``job_labels`` / ``machine_labels`` record the identifiers found in the
    source when they were not already contiguous 1-based ints; entry ``i``
    is the original label of normalized id ``i + 1``.
    """

    jobs: tuple[tuple[Operation, ...], ...]
    machines: frozenset[int]
    job_labels: tuple[int, ...] | None = None
    machine_labels: tuple[int, ...] | None = None

    @cached_property
    def _by_ref(self) -> dict[OperationRef, Operation]:
        return {op.ref: op for job in self.jobs for op in job}

    @cached_property
    def n_ops(self) -> int:
        return sum(len(job) for job in self.jobs)

    @property
    def n_jobs(self) -> int:
        return len(self.jobs)

    def operations(self) -> Iterator[Operation]:
        for job in self.jobs:
            yield from job

    def refs(self) -> Iterator[OperationRef]:
        for job in self.jobs:
            for op in job:
                yield op.ref

    def has(self, ref: OperationRef) -> bool:
        return ref in self._by_ref

    def op(self, ref: OperationRef) -> Operation:
        return self._by_ref[ref]

    def machine(self, ref: OperationRef) -> int:
        return self._by_ref[ref].machine

    def processing(self, ref: OperationRef) -> int:
        return self._by_ref[ref].processing

    def job_length(self, job: int) -> int:
        return len(self.jobs[job - 1])

    def job_label(self, job: int) -> int:
        return self.job_labels[job - 1] if self.job_labels else job

    def machine_label(self, machine: int) -> int:
        return self.machine_labels[machine - 1] if self.machine_labels else machine


def instance_from_jobs(
    rows: Sequence[Sequence[tuple[int, int]]],
    job_labels: Sequence[int] | None = None,
    machine_labels: Sequence[int] | None = None,
) -> Instance:
    """Build an Instance from per-job lists of (machine, processing) pairs."""
    jobs = tuple(
        tuple(
            Operation(OperationRef(j + 1, s + 1), machine, processing)
            for s, (machine, processing) in enumerate(row)
        )
        for j, row in enumerate(rows)
    )
    machines = frozenset(op.machine for job in jobs for op in job)
    return Instance(
        jobs,
        machines,
        tuple(job_labels) if job_labels is not None else None,
        tuple(machine_labels) if machine_labels is not None else None,
    )


@dataclass(frozen=True)
class Schedule:
    """Start times for a (possibly partial) set of operations.

    Treated as immutable; helpers return new Schedule objects.
    """

    starts: dict[OperationRef, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "starts", dict(self.starts))

    @classmethod
    def empty(cls) -> "Schedule":
        return cls({})

    def __len__(self) -> int:
        return len(self.starts)

    def __contains__(self, ref: OperationRef) -> bool:
        return ref in self.starts

    def __getitem__(self, ref: OperationRef) -> int:
        return self.starts[ref]

    def get(self, ref: OperationRef, default: int | None = None) -> int | None:
        return self.starts.get(ref, default)

    def items(self):
        return self.starts.items()

    @property
    def covered(self) -> frozenset[OperationRef]:
        return frozenset(self.starts)

    def completion(self, inst: Instance, ref: OperationRef) -> int:
        return self.starts[ref] + inst.processing(ref)

    def merged(self, other: "Schedule") -> "Schedule":
        """Union of two disjoint schedules; raises on overlapping coverage."""
        common = self.starts.keys() & other.starts.keys()
        if common:
            raise ValueError(f"schedules overlap on {sorted(common)}")
        combined = dict(self.starts)
        combined.update(other.starts)
        return Schedule(combined)

    def without(self, refs: Iterable[OperationRef]) -> "Schedule":
        drop = set(refs)
        missing = drop - self.starts.keys()
        if missing:
            raise KeyError(f"not covered: {sorted(missing)}")
        return Schedule({r: t for r, t in self.starts.items() if r not in drop})


PRECEDENCE = "precedence"
OVERLAP = "overlap"
NEGATIVE_START = "negative-start"
UNKNOWN_OPERATION = "unknown-operation"


@dataclass(frozen=True)
class Violation:
    kind: str
    ops: tuple[OperationRef, ...]
    detail: str


@dataclass(frozen=True)
class ViolationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def verify_schedule(inst: Instance, sched: Schedule) -> ViolationReport:
    """Check a (partial) schedule for feasibility over its covered set.

    Reports unknown operations, negative starts, broken job precedence
    between covered consecutive steps, and overlapping execution intervals
    on the same machine.
    """
    out: list[Violation] = []
    known: dict[OperationRef, int] = {}
    for ref, start in sched.items():
        if not inst.has(ref):
            out.append(Violation(UNKNOWN_OPERATION, (ref,), "not in instance"))
            continue
        known[ref] = start
        if start < 0:
            out.append(Violation(NEGATIVE_START, (ref,), f"start {start} < 0"))

    for ref, start in known.items():
        succ = OperationRef(ref.job, ref.step + 1)
        if succ in known:
            finish = start + inst.processing(ref)
            if finish > known[succ]:
                out.append(
                    Violation(
                        PRECEDENCE,
                        (ref, succ),
                        f"{ref} finishes {finish}, {succ} starts {known[succ]}",
                    )
                )

    per_machine: dict[int, list[tuple[int, int, OperationRef]]] = {}
    for ref, start in known.items():
        op = inst.op(ref)
        per_machine.setdefault(op.machine, []).append(
            (start, start + op.processing, ref)
        )
    for intervals in per_machine.values():
        intervals.sort()
        for (s1, e1, r1), (s2, e2, r2) in zip(intervals, intervals[1:]):
            if s2 < e1:
                out.append(
                    Violation(
                        OVERLAP,
                        (r1, r2),
                        f"[{s1},{e1}) and [{s2},{e2}) intersect",
                    )
                )

    out.sort(key=lambda v: (v.kind, v.ops))
    return ViolationReport(tuple(out))


def makespan(inst: Instance, sched: Schedule) -> int:
    """Latest completion time over the covered operations."""
    if len(sched) == 0:
        raise ValueError("makespan of an empty schedule is undefined")
    return max(start + inst.processing(ref) for ref, start in sched.items())


def validate_instance(inst: Instance) -> list[str]:
    """Return a list of invariant violations; empty means the instance is ok."""
    problems: list[str] = []
    seen: set[OperationRef] = set()
    for j, job in enumerate(inst.jobs, start=1):
        for s, op in enumerate(job, start=1):
            expected = OperationRef(j, s)
            if op.ref != expected:
                problems.append(
                    f"non-consecutive steps: job {j} position {s} holds {op.ref}"
                )
            if op.ref in seen:
                problems.append(f"duplicate operation ref {op.ref}")
            seen.add(op.ref)
            if op.processing < 1:
                problems.append(f"non-positive processing for {op.ref}")
            if op.machine not in inst.machines:
                problems.append(f"machine {op.machine} of {op.ref} not in machine set")
    return problems


def job_chain_bound(inst: Instance) -> int:
    """Max over jobs of the total processing time: a makespan lower bound."""
    return max(sum(op.processing for op in job) for job in inst.jobs)


def machine_loads(
    inst: Instance, ops: Iterable[OperationRef] | None = None
) -> dict[int, int]:
    """Total processing per machine, optionally restricted to a subset."""
    loads = {m: 0 for m in inst.machines}
    refs = inst.refs() if ops is None else ops
    for ref in refs:
        op = inst.op(ref)
        loads[op.machine] += op.processing
    return loads


def machine_load_bound(inst: Instance) -> int:
    """Max machine load: a makespan lower bound."""
    return max(machine_loads(inst).values())
