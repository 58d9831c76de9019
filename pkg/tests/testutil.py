"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import itertools
import random

from maxwshop.jps import REST, WORK, WindowedTask, check_horn
from maxwshop.model import Instance, build_plan, required_rest, validate_instance
from maxwshop.propagation import CMAX, D, E, S, SearchState


def make_instance(jobs, num_operators, maxw=(), name="t") -> Instance:
    """jobs: per job a list of (operator, duration); maxw: (op, delta, lo, hi)."""
    return validate_instance(
        {"name": name, "num_operators": num_operators, "jobs": jobs, "maxw": list(maxw)}
    )


def random_windowed_tasks(rng: random.Random, max_tasks=8, horizon=20):
    """Task sets mixing work and rest kinds, feasible and overloaded."""
    n = rng.randint(1, max_tasks)
    tasks = []
    for i in range(n):
        release = rng.randint(0, horizon - 1)
        deadline = rng.randint(release + 1, horizon)
        window = deadline - release
        if rng.random() < 0.2:
            duration = rng.randint(1, window + 3)  # may not even fit its own window
        else:
            duration = rng.randint(1, window)
        kind = WORK if rng.random() < 0.7 else REST
        ident = (kind, i, 0) if kind == WORK else (kind, i)
        tasks.append(
            WindowedTask(
                id=ident, release=release, deadline=deadline, duration=duration, kind=kind
            )
        )
    return tasks


def random_tiny_instance(rng: random.Random, with_maxw=True) -> Instance:
    """Within the oracle's comfort zone: work <= 12, at most 2 operators."""
    num_operators = rng.randint(1, 2)
    jobs = []
    budget = 12
    for _ in range(rng.randint(1, 3)):
        body = []
        for _ in range(rng.randint(1, 2)):
            dur = rng.randint(1, min(3, budget))
            budget -= dur
            body.append((rng.randrange(num_operators), dur))
            if budget <= 0:
                break
        if body:
            jobs.append(body)
        if budget <= 0:
            break
    maxw = []
    if with_maxw:
        for _ in range(rng.randint(0, 3)):
            op = rng.randrange(num_operators)
            lo = rng.randint(0, 8)
            length = rng.randint(1, 6)
            delta = rng.randint(0, length)  # sometimes vacuous
            maxw.append((op, delta, lo, lo + length))
    return make_instance(jobs, num_operators, maxw, name=f"tiny{rng.random():.6f}")


def random_base(rng: random.Random, name: str, num_jobs=3, tasks_per_job=2) -> Instance:
    """Constraint-free base for generated suites."""
    jobs = [
        [(rng.randrange(2), rng.randint(2, 5)) for _ in range(tasks_per_job)]
        for _ in range(num_jobs)
    ]
    return make_instance(jobs, 2, name=name)


# -- independent fixed-value model check ------------------------------------


def assignment_satisfies(instance, plan, starts, ends, rests, cmax) -> bool:
    """Direct evaluation of every model rule at fixed values."""
    for job in instance.jobs:
        prev_end = None
        for t in job:
            s, e = starts[(t.job, t.pos)], ends[(t.job, t.pos)]
            if e < s + t.duration:
                return False
            if t.pos == 0 and s != 0:
                return False
            if prev_end is not None and s < prev_end:
                return False
            prev_end = e
        if prev_end is not None and prev_end > cmax:
            return False
    for cidx, qs in plan.covered.items():
        if sum(rests[q] for q in qs) < required_rest(instance.maxw[cidx]):
            return False
    for k in range(instance.num_operators):
        tasks = [
            WindowedTask(
                id=(WORK, t.job, t.pos),
                release=starts[(t.job, t.pos)],
                deadline=ends[(t.job, t.pos)],
                duration=t.duration,
                kind=WORK,
            )
            for t in instance.tasks_of(k)
        ]
        for q in plan.indices_for_operator(k):
            sub = plan.subintervals[q]
            tasks.append(
                WindowedTask(
                    id=(REST, q),
                    release=sub.lo,
                    deadline=sub.hi,
                    duration=rests[q],
                    kind=REST,
                )
            )
        if check_horn(tasks) is not None:
            return False
    return True


def enumeration_space(state: SearchState) -> int:
    """Upper bound on the number of fixed assignments inside the bounds."""
    total = 1
    for kind in (S, E, D, CMAX):
        for idx in range(len(state._lo[kind])):
            total *= state.hi(kind, idx) - state.lo(kind, idx) + 1
            if total > 10**9:
                return total
    return total


def enumerate_satisfying(state: SearchState):
    """Yield every fixed assignment within the state's bounds that passes
    the direct model check. Independent of the propagators under test."""
    instance, plan = state.instance, state.plan

    per_job_choices = []
    for job in instance.jobs:
        choices = []

        def rec(j, prev_end, acc, job=job, choices=choices):
            if j == len(job):
                choices.append(tuple(acc))
                return
            t = job[j]
            n = state.task_index[(t.job, t.pos)]
            s_lo, s_hi = state.lo(S, n), state.hi(S, n)
            e_lo, e_hi = state.lo(E, n), state.hi(E, n)
            if j == 0:
                s_values = [0] if s_lo <= 0 <= s_hi else []
            else:
                s_values = range(max(s_lo, prev_end), s_hi + 1)
            for s in s_values:
                for e in range(max(e_lo, s + t.duration), e_hi + 1):
                    acc.append(((t.job, t.pos), s, e))
                    rec(j + 1, e, acc)
                    acc.pop()

        rec(0, None, [])
        per_job_choices.append(choices)

    nq = len(plan.subintervals)
    rest_ranges = [range(state.lo(D, q), state.hi(D, q) + 1) for q in range(nq)]
    rest_combos = [
        combo
        for combo in itertools.product(*rest_ranges)
        if all(
            sum(combo[q] for q in qs) >= required_rest(instance.maxw[cidx])
            for cidx, qs in plan.covered.items()
        )
    ]

    for windows in itertools.product(*per_job_choices):
        starts, ends = {}, {}
        for job_choice in windows:
            for key, s, e in job_choice:
                starts[key] = s
                ends[key] = e
        last = max(
            (ends[(job[-1].job, job[-1].pos)] for job in instance.jobs if job),
            default=0,
        )
        cmax_lo = max(state.lo(CMAX), last)
        if cmax_lo > state.hi(CMAX):
            continue
        for rests in rest_combos:
            if not assignment_satisfies(instance, plan, starts, ends, rests, cmax_lo):
                continue
            for cmax in range(cmax_lo, state.hi(CMAX) + 1):
                yield dict(starts), dict(ends), rests, cmax


def random_tiny_state(rng: random.Random):
    """A small instance plus a partially tightened search state."""
    num_operators = rng.randint(1, 2)
    jobs = []
    total_tasks = rng.randint(1, 3)
    while total_tasks > 0:
        size = rng.randint(1, min(2, total_tasks))
        jobs.append([(rng.randrange(num_operators), rng.randint(1, 3)) for _ in range(size)])
        total_tasks -= size
    maxw = []
    for _ in range(rng.randint(0, 2)):
        op = rng.randrange(num_operators)
        lo = rng.randint(0, 4)
        length = rng.randint(1, 3)
        maxw.append((op, rng.randint(0, length), lo, lo + length))
    instance = make_instance(jobs, num_operators, maxw)
    ub = rng.randint(3, 7)
    plan = build_plan(instance)
    state = SearchState(instance, plan, ub=ub)

    # tighten a few variables at random so mid-search shapes are covered
    for kind in (S, E, D, CMAX):
        for idx in range(len(state._lo[kind])):
            if rng.random() < 0.35:
                lo, hi = state.lo(kind, idx), state.hi(kind, idx)
                if lo < hi:
                    a = rng.randint(lo, hi)
                    b = rng.randint(a, hi)
                    state._lo[kind][idx] = a
                    state._hi[kind][idx] = b
    return instance, plan, state
