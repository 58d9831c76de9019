"""Branch-and-bound makespan minimization over the window model.

A decision solve looks for windows and rest durations within a makespan
cap: propagate to a fixpoint, split the domain of an unfixed variable at
its midpoint (low half first), backtrack on conflict. A fully fixed state
that survives propagation satisfies every model rule exactly, since the
chain arithmetic, rest sums and the per-operator interval-energy check are
all decided at fixed values.

Minimization is a linear descent: start from the greedy bound, repeatedly
ask for makespan at most best - 1, stop at the first refusal. Improving
solutions are counted, with the greedy one as the first.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass

from .jps import REST, WORK, ShiftSchedule
from .model import Instance, SubintervalPlan, required_rest
from .propagation import CMAX, D, E, S, Conflict, SearchState, propagate_all

OPTIMAL = "optimal"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
TIMEOUT = "timeout"

SAT = "sat"
UNSAT = "unsat"

_BRANCH_KINDS = (S, D, E, CMAX)


class SearchTimeout(Exception):
    pass


class InfeasibleInstanceError(RuntimeError):
    """The greedy placement ran past its safe horizon bound."""


@dataclass(frozen=True)
class WindowSolution:
    """Fixed windows, rest durations and makespan of one model solution."""

    starts: dict
    ends: dict
    rests: tuple
    c_max: int


@dataclass
class SolveOutcome:
    status: str
    best: WindowSolution | None
    makespan_iterations: int
    nodes: int
    elapsed: float


def initial_upper_bound(
    instance: Instance, plan: SubintervalPlan
) -> tuple[int, WindowSolution, ShiftSchedule]:
    """Greedy serial schedule respecting the FULL constraint pool.

    Jobs are processed in order; each task takes the earliest shifts where
    its operator is free and no workload window in the pool, active or
    not, would exceed its cap. The resulting makespan is a valid bound for
    any activation subset, and the explicit schedule is feasible for the
    whole pool.
    """
    pool = instance.maxw
    used = [0] * len(pool)
    by_op: dict[int, list[int]] = {}
    for n, c in enumerate(pool):
        by_op.setdefault(c.operator, []).append(n)
    busy: list[set[int]] = [set() for _ in range(instance.num_operators)]
    guard = (
        instance.total_work()
        + sum(required_rest(c) for c in pool)
        + max((c.hi for c in pool), default=0)
    )

    starts: dict = {}
    ends: dict = {}
    units: dict = {}
    for job in instance.jobs:
        cursor = 0
        for t in job:
            placed = []
            shift = cursor
            while len(placed) < t.duration:
                if shift > guard:
                    raise InfeasibleInstanceError(
                        f"{instance.name}: greedy placement passed shift {guard}"
                    )
                free = shift not in busy[t.operator]
                if free:
                    for n in by_op.get(t.operator, ()):
                        c = pool[n]
                        if c.lo <= shift < c.hi and used[n] >= c.delta:
                            free = False
                            break
                if free:
                    placed.append(shift)
                    busy[t.operator].add(shift)
                    for n in by_op.get(t.operator, ()):
                        c = pool[n]
                        if c.lo <= shift < c.hi:
                            used[n] += 1
                shift += 1
            units[(t.job, t.pos)] = placed
            # First window of a job opens at shift 0 regardless of where
            # the work landed; later windows open at the first unit.
            starts[(t.job, t.pos)] = 0 if t.pos == 0 else placed[0]
            ends[(t.job, t.pos)] = placed[-1] + 1
            cursor = placed[-1] + 1

    ub = max(ends.values(), default=0)
    rests = []
    for q in plan.subintervals:
        worked = sum(1 for s in busy[q.operator] if q.lo <= s < q.hi)
        rests.append(min(q.length - worked, q.rest_ub))
    solution = WindowSolution(starts=starts, ends=ends, rests=tuple(rests), c_max=ub)

    horizon = max([ub] + [q.hi for q in plan.subintervals])
    cells = [[None] * horizon for _ in range(instance.num_operators)]
    for (i, j), shifts in units.items():
        t = instance.jobs[i][j]
        for s in shifts:
            cells[t.operator][s] = (WORK, i, j)
    for qi, q in enumerate(plan.subintervals):
        left = rests[qi]
        for s in range(q.lo, q.hi):
            if left == 0:
                break
            if cells[q.operator][s] is None:
                cells[q.operator][s] = (REST, qi)
                left -= 1
    return ub, solution, ShiftSchedule(horizon=horizon, cells=cells)


def _pick_branch_var(state: SearchState) -> tuple[str, int] | None:
    """Smallest domain, then lowest lower bound, then starts before rests
    before ends before the makespan."""
    best = None
    best_key = None
    for rank, kind in enumerate(_BRANCH_KINDS):
        for idx in range(len(state._lo[kind])):
            lo, hi = state.lo(kind, idx), state.hi(kind, idx)
            if lo == hi:
                continue
            key = (hi - lo + 1, lo, rank, idx)
            if best_key is None or key < best_key:
                best_key = key
                best = (kind, idx)
    return best


def _extract_solution(state: SearchState) -> WindowSolution:
    starts = {}
    ends = {}
    for n, t in enumerate(state.tasks):
        starts[(t.job, t.pos)] = state.lo(S, n)
        ends[(t.job, t.pos)] = state.lo(E, n)
    rests = tuple(state.lo(D, q) for q in range(len(state.plan.subintervals)))
    return WindowSolution(starts=starts, ends=ends, rests=rests, c_max=state.lo(CMAX))


def solve_decision(
    instance: Instance,
    plan: SubintervalPlan,
    cmax_cap: int,
    deadline: float | None = None,
) -> tuple[str, WindowSolution | None, int]:
    """Find any solution with makespan at most cmax_cap.

    Returns (SAT, solution, nodes), (UNSAT, None, nodes) or
    ("timeout", None, nodes).
    """
    if cmax_cap < 0:
        return UNSAT, None, 0
    min_depth = 4 * len(list(instance.all_tasks())) + len(plan.subintervals) + 64
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 40 * min_depth))
    state = SearchState(instance, plan, ub=cmax_cap)
    nodes = 0

    def dfs() -> WindowSolution | None:
        nonlocal nodes
        nodes += 1
        if deadline is not None and time.monotonic() > deadline:
            raise SearchTimeout
        propagate_all(state)
        var = _pick_branch_var(state)
        if var is None:
            return _extract_solution(state)
        kind, idx = var
        lo, hi = state.lo(kind, idx), state.hi(kind, idx)
        mid = (lo + hi) // 2
        for setter, value in ((state.set_hi, mid), (state.set_lo, mid + 1)):
            state.push()
            try:
                setter(kind, idx, value)
                found = dfs()
                if found is not None:
                    return found
            except Conflict:
                pass
            finally:
                state.pop()
        return None

    try:
        solution = dfs()
    except SearchTimeout:
        return TIMEOUT, None, nodes
    except Conflict:
        return UNSAT, None, nodes
    if solution is None:
        return UNSAT, None, nodes
    return SAT, solution, nodes


def minimize_makespan(
    instance: Instance,
    plan: SubintervalPlan,
    deadline: float | None = None,
    lower_bound: int = 0,
) -> SolveOutcome:
    """Linear-descent optimization for one activation of the pool.

    `lower_bound` lets a caller pass a proven bound (e.g. from an earlier
    relaxation) so optimality closes without a final refutation solve.
    """
    t0 = time.monotonic()
    try:
        ub, best, _ = initial_upper_bound(instance, plan)
    except InfeasibleInstanceError:
        return SolveOutcome(INFEASIBLE, None, 0, 0, time.monotonic() - t0)
    iterations = 1
    nodes = 0
    status = OPTIMAL
    while best.c_max > lower_bound:
        result, solution, n = solve_decision(instance, plan, best.c_max - 1, deadline)
        nodes += n
        if result == SAT:
            best = solution
            iterations += 1
        elif result == UNSAT:
            status = OPTIMAL
            break
        else:
            status = FEASIBLE
            break
    return SolveOutcome(status, best, iterations, nodes, time.monotonic() - t0)
