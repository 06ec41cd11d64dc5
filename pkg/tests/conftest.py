from __future__ import annotations

import random

import pytest

from jobshop.core import Instance, OperationRef, Schedule, instance_from_jobs


def R(job: int, step: int) -> OperationRef:
    return OperationRef(job, step)


@pytest.fixture
def example() -> Instance:
    """3 jobs x 3 machines; optimal makespan 20."""
    return instance_from_jobs(
        [
            [(1, 3), (2, 3), (3, 1)],
            [(2, 4), (1, 6), (3, 2)],
            [(3, 9), (1, 3), (2, 8)],
        ]
    )


@pytest.fixture
def optimal_schedule() -> Schedule:
    """An optimal schedule for the example instance (makespan 20)."""
    return Schedule(
        {
            R(1, 1): 0, R(1, 2): 4, R(1, 3): 9,
            R(2, 1): 0, R(2, 2): 12, R(2, 3): 18,
            R(3, 1): 0, R(3, 2): 9, R(3, 3): 12,
        }
    )


@pytest.fixture
def decomposed_schedule() -> Schedule:
    """The two-window schedule of the example instance (makespan 21)."""
    return Schedule(
        {
            R(1, 1): 0, R(1, 2): 4, R(1, 3): 12,
            R(2, 1): 0, R(2, 2): 4, R(2, 3): 10,
            R(3, 1): 0, R(3, 2): 10, R(3, 3): 13,
        }
    )


@pytest.fixture
def window1_schedule() -> Schedule:
    """First-window part of the decomposed schedule (its unique optimum)."""
    return Schedule({R(1, 1): 0, R(2, 1): 0, R(3, 1): 0, R(1, 2): 4, R(2, 2): 4})


WINDOW2_OPS = (R(3, 2), R(1, 3), R(2, 3), R(3, 3))


def random_multivisit_instance(rng: random.Random, max_jobs=3, max_machines=3) -> Instance:
    """Small instance where jobs may revisit machines; exercises the
    no-single-visit-assumption paths."""
    jobs = rng.randint(1, max_jobs)
    machines = rng.randint(1, max_machines)
    rows = []
    for _ in range(jobs):
        steps = rng.randint(1, 4)
        rows.append([(rng.randint(1, machines), rng.randint(1, 9)) for _ in range(steps)])
    return instance_from_jobs(rows)
