"""Reading and writing instances and schedules.

Three instance formats are supported:

``standard``
    First non-comment line ``J M``; then J lines, each with M pairs
    ``machine time`` where machine indices are 0-based. ``#`` starts a
    comment line.

``taillard``
    Line ``J M``; then a JxM matrix of processing times; then a JxM matrix
    of 1-based machine indices (row = job, column = step order).

``facts``
    Lines of the form ``operation(J,S,M,P).`` in any order, whitespace
    insensitive; ``%`` starts a comment. Job and machine identifiers may be
    arbitrary positive integers and are normalized to contiguous 1-based
    ids, keeping the original labels for emission.

Schedules are exchanged as CSV with header
``job,step,machine,start,processing``, sorted by (machine, start).
"""

from __future__ import annotations

import csv
import io
import re
from typing import IO

from .core import Instance, OperationRef, Schedule, instance_from_jobs

FORMATS = ("standard", "taillard", "facts")


class ParseError(ValueError):
    """Malformed instance or schedule text, with position when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


def _read(source: str | IO[str]) -> str:
    return source if isinstance(source, str) else source.read()


def parse_instance(source: str | IO[str], fmt: str = "standard") -> Instance:
    """Parse an instance from text in one of the supported formats."""
    text = _read(source)
    if fmt == "standard":
        return _parse_standard(text)
    if fmt == "taillard":
        return _parse_taillard(text)
    if fmt == "facts":
        return _parse_facts(text)
    raise ValueError(f"unknown instance format {fmt!r}")


def emit_instance(inst: Instance, fmt: str = "standard") -> str:
    """Render an instance; inverse of parse_instance for each format."""
    if fmt == "standard":
        return _emit_standard(inst)
    if fmt == "taillard":
        return _emit_taillard(inst)
    if fmt == "facts":
        return _emit_facts(inst)
    raise ValueError(f"unknown instance format {fmt!r}")


def _numeric_lines(text: str) -> list[tuple[int, list[str]]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line.split()))
    return out


def _int_token(token: str, lineno: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"expected integer {what}, got {token!r}", line=lineno) from None


def _parse_header(lines: list[tuple[int, list[str]]]) -> tuple[int, int]:
    if not lines:
        raise ParseError("empty instance text")
    lineno, tokens = lines[0]
    if len(tokens) < 2:
        raise ParseError("header must be 'jobs machines'", line=lineno)
    jobs = _int_token(tokens[0], lineno, "job count")
    machines = _int_token(tokens[1], lineno, "machine count")
    if jobs < 1 or machines < 1:
        raise ParseError("job and machine counts must be positive", line=lineno)
    return jobs, machines


def _parse_standard(text: str) -> Instance:
    lines = _numeric_lines(text)
    n_jobs, n_machines = _parse_header(lines)
    body = lines[1:]
    if len(body) != n_jobs:
        raise ParseError(
            f"declared {n_jobs} jobs but found {len(body)} data lines",
            line=body[-1][0] if body else lines[0][0],
        )
    rows: list[list[tuple[int, int]]] = []
    for lineno, tokens in body:
        if len(tokens) != 2 * n_machines:
            raise ParseError(
                f"expected {2 * n_machines} values per job line, got {len(tokens)}",
                line=lineno,
            )
        row = []
        for k in range(0, len(tokens), 2):
            machine = _int_token(tokens[k], lineno, "machine index")
            time = _int_token(tokens[k + 1], lineno, "processing time")
            if not 0 <= machine < n_machines:
                raise ParseError(f"machine index {machine} out of range", line=lineno)
            if time < 1:
                raise ParseError(f"non-positive processing time {time}", line=lineno)
            row.append((machine + 1, time))
        rows.append(row)
    inst = instance_from_jobs(rows)
    return Instance(inst.jobs, frozenset(range(1, n_machines + 1)))


def _parse_taillard(text: str) -> Instance:
    lines = _numeric_lines(text)
    n_jobs, n_machines = _parse_header(lines)
    body = lines[1:]
    if len(body) != 2 * n_jobs:
        raise ParseError(
            f"declared {n_jobs} jobs but found {len(body)} matrix lines "
            f"(need {2 * n_jobs})",
            line=body[-1][0] if body else lines[0][0],
        )

    def matrix(rows: list[tuple[int, list[str]]], what: str) -> list[list[int]]:
        out = []
        for lineno, tokens in rows:
            if len(tokens) != n_machines:
                raise ParseError(
                    f"expected {n_machines} {what} per line, got {len(tokens)}",
                    line=lineno,
                )
            out.append([_int_token(t, lineno, what) for t in tokens])
        return out

    times = matrix(body[:n_jobs], "processing times")
    machines = matrix(body[n_jobs:], "machine indices")
    rows = []
    for j in range(n_jobs):
        row = []
        for s in range(n_machines):
            machine, time = machines[j][s], times[j][s]
            if not 1 <= machine <= n_machines:
                raise ParseError(
                    f"machine index {machine} out of range", line=body[n_jobs + j][0]
                )
            if time < 1:
                raise ParseError(
                    f"non-positive processing time {time}", line=body[j][0]
                )
            row.append((machine, time))
        rows.append(row)
    inst = instance_from_jobs(rows)
    return Instance(inst.jobs, frozenset(range(1, n_machines + 1)))


_FACT_RE = re.compile(
    r"operation\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*\."
)


def _parse_facts(text: str) -> Instance:
    stripped_lines = [raw.split("%", 1)[0] for raw in text.splitlines()]
    stripped = "\n".join(stripped_lines)

    facts: list[tuple[int, int, int, int]] = []
    consumed = []
    for m in _FACT_RE.finditer(stripped):
        facts.append(tuple(int(g) for g in m.groups()))  # type: ignore[arg-type]
        consumed.append(m.span())

    leftovers = list(stripped)
    for a, b in consumed:
        for i in range(a, b):
            leftovers[i] = " "
    residue = "".join(leftovers)
    for offset, ch in enumerate(residue):
        if not ch.isspace():
            line = residue.count("\n", 0, offset) + 1
            column = offset - (residue.rfind("\n", 0, offset) + 1) + 1
            raise ParseError("unrecognized text in facts input", line=line, column=column)
    if not facts:
        raise ParseError("no operation facts found")

    per_job: dict[int, dict[int, tuple[int, int]]] = {}
    for job, step, machine, time in facts:
        if job < 1 or step < 1 or machine < 1:
            raise ParseError(
                f"operation({job},{step},{machine},{time}): identifiers must be positive"
            )
        if time < 1:
            raise ParseError(
                f"operation({job},{step},{machine},{time}): non-positive processing time"
            )
        steps = per_job.setdefault(job, {})
        if step in steps:
            raise ParseError(f"duplicate step {step} for job {job}")
        steps[step] = (machine, time)

    job_labels = sorted(per_job)
    machine_labels = sorted({m for steps in per_job.values() for m, _ in steps.values()})
    machine_id = {label: i + 1 for i, label in enumerate(machine_labels)}

    rows = []
    for label in job_labels:
        steps = per_job[label]
        if sorted(steps) != list(range(1, len(steps) + 1)):
            raise ParseError(f"non-consecutive steps for job {label}: {sorted(steps)}")
        rows.append([(machine_id[m], p) for _, (m, p) in sorted(steps.items())])

    identity_jobs = job_labels == list(range(1, len(job_labels) + 1))
    identity_machines = machine_labels == list(range(1, len(machine_labels) + 1))
    return instance_from_jobs(
        rows,
        job_labels=None if identity_jobs else job_labels,
        machine_labels=None if identity_machines else machine_labels,
    )


def _require_uniform(inst: Instance, fmt: str) -> int:
    lengths = {len(job) for job in inst.jobs}
    n_machines = len(inst.machines)
    if lengths != {n_machines}:
        raise ValueError(
            f"{fmt} format needs exactly one operation per machine count "
            f"({n_machines}) in every job"
        )
    return n_machines


def _emit_standard(inst: Instance) -> str:
    n_machines = _require_uniform(inst, "standard")
    lines = [f"{inst.n_jobs} {n_machines}"]
    for job in inst.jobs:
        lines.append(" ".join(f"{op.machine - 1} {op.processing}" for op in job))
    return "\n".join(lines) + "\n"


def _emit_taillard(inst: Instance) -> str:
    n_machines = _require_uniform(inst, "taillard")
    lines = [f"{inst.n_jobs} {n_machines}"]
    for job in inst.jobs:
        lines.append(" ".join(str(op.processing) for op in job))
    for job in inst.jobs:
        lines.append(" ".join(str(op.machine) for op in job))
    return "\n".join(lines) + "\n"


def _emit_facts(inst: Instance) -> str:
    lines = []
    for job in inst.jobs:
        for op in job:
            lines.append(
                f"operation({inst.job_label(op.ref.job)},{op.ref.step},"
                f"{inst.machine_label(op.machine)},{op.processing})."
            )
    return "\n".join(lines) + "\n"


SCHEDULE_HEADER = ["job", "step", "machine", "start", "processing"]


def emit_schedule_csv(inst: Instance, sched: Schedule) -> str:
    """Schedule as CSV rows sorted by (machine, start)."""
    rows = []
    for ref, start in sched.items():
        op = inst.op(ref)
        rows.append((op.machine, start, ref.job, ref.step, op.processing))
    rows.sort()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCHEDULE_HEADER)
    for machine, start, job, step, processing in rows:
        writer.writerow([job, step, machine, start, processing])
    return buf.getvalue()


def parse_schedule_csv(inst: Instance, source: str | IO[str]) -> Schedule:
    """Read a schedule CSV back; machine/processing columns are cross-checked."""
    text = _read(source)
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows or [c.strip() for c in rows[0]] != SCHEDULE_HEADER:
        raise ParseError(f"expected header {','.join(SCHEDULE_HEADER)}", line=1)
    starts: dict[OperationRef, int] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 5:
            raise ParseError("expected 5 columns", line=lineno)
        try:
            job, step, machine, start, processing = (int(c) for c in row)
        except ValueError:
            raise ParseError("non-integer field", line=lineno) from None
        ref = OperationRef(job, step)
        if ref in starts:
            raise ParseError(f"duplicate row for {ref}", line=lineno)
        if inst.has(ref):
            op = inst.op(ref)
            if (machine, processing) != (op.machine, op.processing):
                raise ParseError(
                    f"row for {ref} disagrees with instance "
                    f"(machine {op.machine}, processing {op.processing})",
                    line=lineno,
                )
        starts[ref] = start
    return Schedule(starts)
