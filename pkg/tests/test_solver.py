import random

from maxwshop.checker import brute_force_optimum, check_schedule
from maxwshop.jps import reconstruct
from maxwshop.model import build_plan, required_rest
from maxwshop.solver import (
    OPTIMAL,
    SAT,
    UNSAT,
    initial_upper_bound,
    minimize_makespan,
    solve_decision,
)
from testutil import make_instance, random_tiny_instance


class TestInitialUpperBound:
    def test_single_task_no_constraints(self):
        inst = make_instance([[(0, 3)]], 1)
        ub, sol, sched = initial_upper_bound(inst, build_plan(inst))
        assert ub == 3
        assert sol.c_max == 3
        assert sched.work_shifts(0) == [0, 1, 2]

    def test_workload_cap_forces_gap(self):
        inst = make_instance([[(0, 3)]], 1, [(0, 1, 0, 3)])
        ub, sol, sched = initial_upper_bound(inst, build_plan(inst))
        assert ub == 5
        assert sched.work_shifts(0) == [0, 3, 4]

    def test_independent_operators_overlap(self):
        inst = make_instance([[(0, 2)], [(1, 2)]], 2)
        ub, _, _ = initial_upper_bound(inst, build_plan(inst))
        assert ub == 2

    def test_companion_solution_is_model_feasible(self):
        rng = random.Random(31)
        for _ in range(40):
            inst = random_tiny_instance(rng)
            plan = build_plan(inst)
            ub, sol, sched = initial_upper_bound(inst, plan)
            rebuilt = reconstruct(sol, plan, inst)
            report = check_schedule(rebuilt, inst, sol.c_max)
            assert report.ok, report.violations
            # the explicit greedy schedule is feasible for the whole pool too
            assert check_schedule(sched, inst, ub).ok


class TestSolveDecision:
    def test_sat_at_exact_fit(self):
        inst = make_instance([[(0, 3)]], 1)
        status, sol, _ = solve_decision(inst, build_plan(inst), 3)
        assert status == SAT
        assert sol.starts[(0, 0)] == 0
        assert sol.ends[(0, 0)] == 3

    def test_unsat_below_duration(self):
        inst = make_instance([[(0, 3)]], 1)
        status, sol, _ = solve_decision(inst, build_plan(inst), 2)
        assert status == UNSAT
        assert sol is None

    def test_overlapping_caps_with_rest_budget(self):
        inst = make_instance([[(0, 5)]], 1, [(0, 5, 0, 6), (0, 2, 4, 9)])
        plan = build_plan(inst)
        status, sol, _ = solve_decision(inst, plan, 9)
        assert status == SAT
        assert sum(sol.rests[q] for q in plan.covered[0]) >= required_rest(inst.maxw[0])
        assert sum(sol.rests[q] for q in plan.covered[1]) >= required_rest(inst.maxw[1])
        assert sol.c_max <= 9
        assert check_schedule(reconstruct(sol, plan, inst), inst, sol.c_max).ok


class TestMinimize:
    def test_single_task(self):
        inst = make_instance([[(0, 3)]], 1)
        out = minimize_makespan(inst, build_plan(inst))
        assert out.status == OPTIMAL
        assert out.best.c_max == 3
        assert out.makespan_iterations >= 1

    def test_disjunctive_sum(self):
        inst = make_instance([[(0, 2)], [(0, 2)]], 1)
        out = minimize_makespan(inst, build_plan(inst))
        assert out.status == OPTIMAL
        assert out.best.c_max == 4

    def test_known_gap_instance(self):
        inst = make_instance([[(0, 3)]], 1, [(0, 1, 0, 3)])
        out = minimize_makespan(inst, build_plan(inst))
        assert out.status == OPTIMAL
        assert out.best.c_max == 5

    def test_matches_oracle_on_random_instances(self):
        rng = random.Random(33)
        for _ in range(30):
            inst = random_tiny_instance(rng)
            plan = build_plan(inst)
            out = minimize_makespan(inst, plan)
            assert out.status == OPTIMAL
            assert out.best.c_max == brute_force_optimum(inst)
            sched = reconstruct(out.best, plan, inst)
            assert check_schedule(sched, inst, out.best.c_max).ok

    def test_lower_bound_short_circuits(self):
        inst = make_instance([[(0, 3)]], 1)
        out = minimize_makespan(inst, build_plan(inst), lower_bound=3)
        assert out.status == OPTIMAL
        assert out.best.c_max == 3
        assert out.nodes == 0
