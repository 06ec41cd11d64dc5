from __future__ import annotations

import io
import itertools
import random

import pytest

from jobshop.bench import generate_instance
from jobshop.core import Schedule, instance_from_jobs, makespan, verify_schedule
from jobshop.solve import (
    Budget,
    CycleError,
    STATUS_FEASIBLE,
    STATUS_INTERRUPTED,
    STATUS_OPTIMAL,
    brute_force_optimum,
    build_subproblem,
    critical_path_bound,
    earliest_starts,
    greedy_incumbent,
    solve_window,
    window_makespan,
)
from .conftest import R, WINDOW2_OPS


def whole_instance_subproblem(inst):
    return build_subproblem(inst, list(inst.refs()), [], Schedule.empty())


@pytest.fixture
def window2(example, window1_schedule):
    return build_subproblem(example, WINDOW2_OPS, [], window1_schedule)


class TestBuildSubproblem:
    def test_window2_releases_and_disjunctions(self, window2):
        assert dict(window2.release) == {1: 10, 2: 7, 3: 9}
        assert window2.disjunctions == ((R(1, 3), R(2, 3)),)
        assert window2.pred_completion[R(3, 2)] == 9
        assert window2.pred_completion[R(1, 3)] == 7
        assert window2.pred_completion[R(2, 3)] == 10
        assert window2.pred_completion[R(3, 3)] == 0  # predecessor is free
        assert (R(3, 2), R(3, 3)) in window2.arcs
        assert window2.fixed_makespan == 10

    def test_window1_from_scratch(self, example):
        window1 = [R(1, 1), R(2, 1), R(3, 1), R(1, 2), R(2, 2)]
        sub = build_subproblem(example, window1, [], Schedule.empty())
        assert all(v == 0 for v in sub.release.values())
        assert set(map(frozenset, sub.disjunctions)) == {
            frozenset({R(1, 1), R(2, 2)}),
            frozenset({R(2, 1), R(1, 2)}),
        }

    def test_single_free_operation(self):
        inst = instance_from_jobs([[(1, 5)]])
        sub = whole_instance_subproblem(inst)
        assert sub.disjunctions == ()
        assert sub.pred_completion[R(1, 1)] == 0

    def test_overlap_moves_fixed_to_free(self, example, window1_schedule):
        sub = build_subproblem(example, WINDOW2_OPS, [R(2, 2)], window1_schedule)
        assert R(2, 2) in sub.free_ops
        assert R(2, 2) not in sub.fixed
        # machine 1 release drops to (1,1)'s completion
        assert sub.release[1] == 3
        assert frozenset({R(2, 2), R(3, 2)}) in set(map(frozenset, sub.disjunctions))

    def test_missing_predecessor_rejected(self, example):
        with pytest.raises(ValueError, match="neither fixed nor free"):
            build_subproblem(example, [R(3, 3)], [], Schedule.empty())

    def test_window_already_fixed_rejected(self, example, window1_schedule):
        with pytest.raises(ValueError, match="already fixed"):
            build_subproblem(example, [R(1, 1)], [], window1_schedule)

    def test_overlap_not_fixed_rejected(self, example, window1_schedule):
        with pytest.raises(ValueError, match="not fixed"):
            build_subproblem(example, WINDOW2_OPS, [R(3, 3)], window1_schedule)

    def test_same_job_machine_revisit_is_not_a_disjunction(self):
        inst = instance_from_jobs([[(1, 2), (1, 3)]])
        sub = whole_instance_subproblem(inst)
        assert sub.disjunctions == ()
        assert sub.arcs == ((R(1, 1), R(1, 2)),)


class TestEarliestStarts:
    def test_both_orientations_reach_21(self, example, window2, window1_schedule):
        pair = window2.disjunctions[0]
        late = earliest_starts(window2, {pair: False})  # (2,3) before (1,3)
        assert dict(late.items()) == {R(3, 2): 10, R(2, 3): 10, R(1, 3): 12, R(3, 3): 13}
        assert window_makespan(window2, late) == 21

        early = earliest_starts(window2, {pair: True})
        assert dict(early.items()) == {R(1, 3): 9, R(2, 3): 10, R(3, 2): 10, R(3, 3): 13}
        assert window_makespan(window2, early) == 21

        merged = window1_schedule.merged(late)
        assert verify_schedule(example, merged).ok
        assert makespan(example, merged) == 21

    def test_single_op_starts_at_zero(self):
        inst = instance_from_jobs([[(1, 5)]])
        sub = whole_instance_subproblem(inst)
        assert dict(earliest_starts(sub, {}).items()) == {R(1, 1): 0}

    def test_cycle_detected(self):
        # two jobs crossing two machines in opposite directions
        inst = instance_from_jobs([[(1, 2), (2, 2)], [(2, 2), (1, 2)]])
        sub = whole_instance_subproblem(inst)
        assert set(sub.disjunctions) == {(R(1, 1), R(2, 2)), (R(1, 2), R(2, 1))}
        # (2,2) before (1,1) on m1 plus (1,2) before (2,1) on m2 closes a loop
        orientation = {(R(1, 1), R(2, 2)): False, (R(1, 2), R(2, 1)): True}
        with pytest.raises(CycleError):
            earliest_starts(sub, orientation)

    def test_partial_orientation_rejected(self, example):
        sub = whole_instance_subproblem(example)
        with pytest.raises(ValueError, match="every disjunction"):
            earliest_starts(sub, {})

    def test_unknown_pair_rejected(self, window2):
        with pytest.raises(ValueError, match="not a disjunction"):
            earliest_starts(window2, {(R(9, 1), R(8, 1)): True})

    def test_pointwise_minimality(self):
        # decrementing any start must violate a lower bound or an arc
        rng = random.Random(11)
        for case in range(40):
            inst = generate_instance(rng.randint(1, 3), rng.randint(1, 3), 1, 9, seed=1500 + case)
            sub = whole_instance_subproblem(inst)
            orientation = {p: rng.random() < 0.5 for p in sub.disjunctions}
            try:
                starts = earliest_starts(sub, orientation)
            except CycleError:
                continue
            arcs = list(sub.arcs)
            for (a, b), first in orientation.items():
                arcs.append((a, b) if first else (b, a))
            for ref in sub.free_ops:
                lowered = starts[ref] - 1
                binding = lowered < 0 or lowered < sub.pred_completion[ref]
                binding = binding or lowered < sub.release[sub.machine[ref]]
                for u, v in arcs:
                    if v == ref and lowered < starts[u] + sub.processing[u]:
                        binding = True
                assert binding, f"{ref} could start earlier"

    def test_dominates_any_feasible_shift(self, window2):
        pair = window2.disjunctions[0]
        base = earliest_starts(window2, {pair: True})
        shifted = {r: t + 3 for r, t in base.items()}
        for ref in window2.free_ops:
            assert base[ref] <= shifted[ref]


class TestCriticalPathBound:
    def test_empty_orientation_bound_is_21(self, window2):
        # release(m1)=10 -> (3,2) -> (3,3) is the binding chain
        assert critical_path_bound(window2, {}) == 21

    def test_fully_oriented_equals_earliest(self, window2):
        for first in (True, False):
            orientation = {window2.disjunctions[0]: first}
            starts = earliest_starts(window2, orientation)
            assert critical_path_bound(window2, orientation) == window_makespan(window2, starts)

    def test_no_free_ops(self, example, optimal_schedule):
        sub = build_subproblem(example, [], [], optimal_schedule)
        assert critical_path_bound(sub, {}) == 20

    def test_admissibility_on_random_partials(self):
        rng = random.Random(23)
        for case in range(25):
            inst = generate_instance(rng.randint(2, 3), rng.randint(2, 3), 1, 9, seed=2500 + case)
            sub = whole_instance_subproblem(inst)
            pairs = list(sub.disjunctions)
            oriented = {p: rng.random() < 0.5 for p in rng.sample(pairs, rng.randint(0, len(pairs)))}
            try:
                bound = critical_path_bound(sub, oriented)
            except CycleError:
                continue
            free = [p for p in pairs if p not in oriented]
            best = None
            for assignment in itertools.product((True, False), repeat=len(free)):
                full = dict(oriented)
                full.update(zip(free, assignment))
                try:
                    starts = earliest_starts(sub, full)
                except CycleError:
                    continue
                mk = window_makespan(sub, starts)
                best = mk if best is None else min(best, mk)
            if best is not None:
                assert bound <= best


class TestGreedy:
    def test_window2_feasible_at_least_21(self, example, window2, window1_schedule):
        res = greedy_incumbent(window2)
        assert res.status == STATUS_FEASIBLE
        assert res.window_makespan >= 21
        assert verify_schedule(example, window1_schedule.merged(res.starts)).ok

    def test_single_op_trivially_optimal(self):
        inst = instance_from_jobs([[(1, 5)]])
        res = greedy_incumbent(whole_instance_subproblem(inst))
        assert res.window_makespan == 5

    def test_window1_at_least_10(self, example):
        window1 = [R(1, 1), R(2, 1), R(3, 1), R(1, 2), R(2, 2)]
        sub = build_subproblem(example, window1, [], Schedule.empty())
        res = greedy_incumbent(sub)
        assert res.window_makespan >= 10
        assert verify_schedule(example, res.starts).ok

    def test_greedy_is_canonical_for_its_orientation(self):
        rng = random.Random(31)
        for case in range(30):
            inst = generate_instance(rng.randint(1, 4), rng.randint(1, 3), 1, 9, seed=3100 + case)
            sub = whole_instance_subproblem(inst)
            res = greedy_incumbent(sub)
            orientation = {
                (a, b): res.starts[a] < res.starts[b] for a, b in sub.disjunctions
            }
            assert earliest_starts(sub, orientation) == res.starts


class TestSolveWindow:
    def test_whole_example_optimal_20(self, example):
        res = solve_window(whole_instance_subproblem(example))
        assert res.status == STATUS_OPTIMAL
        assert res.window_makespan == 20
        assert verify_schedule(example, res.starts).ok
        assert makespan(example, res.starts) == 20

    def test_window2_optimal_21(self, window2):
        res = solve_window(window2)
        assert res.status == STATUS_OPTIMAL
        assert res.window_makespan == 21

    def test_node_budget_zero_returns_greedy(self, window2):
        res = solve_window(window2, Budget(nodes=0))
        assert res.status == STATUS_INTERRUPTED
        assert res.nodes == 0
        assert res.starts == greedy_incumbent(window2).starts

    def test_deterministic(self, example):
        sub = whole_instance_subproblem(example)
        a = solve_window(sub, Budget(nodes=50))
        b = solve_window(sub, Budget(nodes=50))
        assert a.starts == b.starts
        assert (a.window_makespan, a.status, a.nodes) == (b.window_makespan, b.status, b.nodes)

    def test_incumbent_trace_strictly_decreases(self, example):
        buf = io.StringIO()
        solve_window(whole_instance_subproblem(example), trace=buf)
        lines = [line.split(",") for line in buf.getvalue().splitlines()]
        assert all(line[0] == "incumbent" for line in lines)
        values = [int(line[2]) for line in lines]
        assert values == sorted(values, reverse=True)
        assert len(set(values)) == len(values)
        assert values[-1] == 20

    def test_merged_with_fixed_verifies(self, example, window2, window1_schedule):
        res = solve_window(window2)
        merged = window1_schedule.merged(res.starts)
        assert verify_schedule(example, merged).ok

    def test_interrupted_when_wall_budget_zero(self, example):
        res = solve_window(whole_instance_subproblem(example), Budget(wall_ms=0))
        assert res.status == STATUS_INTERRUPTED


class TestBruteForce:
    def test_whole_example(self, example):
        assert brute_force_optimum(whole_instance_subproblem(example)) == 20

    def test_window2(self, window2):
        assert brute_force_optimum(window2) == 21

    def test_one_machine_two_jobs(self):
        inst = instance_from_jobs([[(1, 2)], [(1, 3)]])
        assert brute_force_optimum(whole_instance_subproblem(inst)) == 5

    def test_cap(self, example):
        with pytest.raises(ValueError, match="cap"):
            brute_force_optimum(whole_instance_subproblem(example), cap=3)


def test_oracle_equivalence_on_random_instances():
    rng = random.Random(12345)
    for case in range(60):
        if case % 3 == 0:
            inst = generate_instance(rng.randint(1, 3), rng.randint(1, 3), 1, 9, seed=400 + case)
        else:
            from .conftest import random_multivisit_instance

            inst = random_multivisit_instance(rng)
        sub = whole_instance_subproblem(inst)
        if len(sub.disjunctions) > 12:
            continue
        res = solve_window(sub)
        assert res.status == STATUS_OPTIMAL
        assert res.window_makespan == brute_force_optimum(sub)
