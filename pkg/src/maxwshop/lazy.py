"""Progressive activation of workload constraints.

Solve the relaxed master with only an active subset, rebuild the explicit
schedule, recount worked shifts against the inactive constraints, activate
a greedy non-overlapping set of the most violated ones, and repeat. When
the rebuilt schedule violates nothing and the master was optimal, the
relaxation's optimum is the true optimum.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .jps import ShiftSchedule, reconstruct
from .model import Instance, MaxWConstraint, build_plan, required_rest
from .solver import (
    FEASIBLE,
    OPTIMAL,
    TIMEOUT,
    SolveOutcome,
    initial_upper_bound,
    minimize_makespan,
)


@dataclass(frozen=True)
class Violation:
    constraint: int  # pool index
    amount: int  # worked shifts beyond the cap, >= 1


@dataclass(frozen=True)
class IterationRecord:
    index: int
    activated: tuple  # pool indices newly activated going into this round
    active_total: int
    cmax: int
    master_status: str
    violated: int
    elapsed_ms: float

    def to_json_dict(self) -> dict:
        return {
            "iter": self.index,
            "activated": list(self.activated),
            "active_total": self.active_total,
            "cmax": self.cmax,
            "violated": self.violated,
            "elapsed_ms": round(self.elapsed_ms, 3),
        }


@dataclass
class ActivationState:
    pool_size: int
    active: set = field(default_factory=set)
    rounds: list = field(default_factory=list)


@dataclass
class IterativeResult:
    outcome: SolveOutcome
    schedule: ShiftSchedule | None
    activation: ActivationState


def separate(
    schedule: ShiftSchedule,
    instance: Instance,
    active: set,
    debug: bool = False,
) -> list[Violation]:
    """Recount worked shifts against every inactive constraint.

    Active constraints cannot be violated by a reconstructed master
    solution; with debug on they are recounted anyway as a sanity check.
    """
    out = []
    for idx, c in enumerate(instance.maxw):
        worked = schedule.worked_in(c.operator, c.lo, c.hi)
        if idx in active:
            if debug and worked > c.delta:
                raise AssertionError(
                    f"active constraint {idx} violated by {worked - c.delta}"
                )
            continue
        if worked > c.delta:
            out.append(Violation(constraint=idx, amount=worked - c.delta))
    return out


def select_activation(violations: list[Violation], pool: tuple) -> set:
    """Greedy maximal non-overlapping set of the most violated constraints.

    Per operator: take the largest violation (ties to the smaller window
    start, then the smaller pool index), drop every violated constraint
    whose window overlaps it, repeat.
    """
    per_op: dict[int, list[Violation]] = {}
    for v in violations:
        per_op.setdefault(pool[v.constraint].operator, []).append(v)
    chosen: set = set()
    for k in sorted(per_op):
        ordered = sorted(
            per_op[k], key=lambda v: (-v.amount, pool[v.constraint].lo, v.constraint)
        )
        taken: list[MaxWConstraint] = []
        for v in ordered:
            c = pool[v.constraint]
            if all(not c.overlaps(w) for w in taken):
                chosen.add(v.constraint)
                taken.append(c)
    return chosen


def initial_pool(instance: Instance) -> set:
    """Starting active set: treat every non-vacuous constraint as violated
    by its required rest and run the same greedy selection."""
    violations = [
        Violation(constraint=i, amount=required_rest(c))
        for i, c in enumerate(instance.maxw)
        if not c.is_vacuous
    ]
    return select_activation(violations, instance.maxw)


def solve_iterative(
    instance: Instance,
    deadline: float | None = None,
    debug: bool = False,
) -> IterativeResult:
    """Run the activation loop until the rebuilt schedule is clean.

    Each round rebuilds the model for the grown active set and restarts
    the master from scratch. A proven master optimum carries forward as a
    lower bound, since adding constraints cannot shrink the optimum. On
    deadline the greedy full-pool schedule is returned as the best known
    feasible answer.
    """
    t0 = time.monotonic()
    pool = instance.maxw
    active = initial_pool(instance)
    activation = ActivationState(pool_size=len(pool), active=set(active))
    newly = tuple(sorted(active))
    lower_bound = 0
    total_iterations = 0
    total_nodes = 0
    fallback_solution = None
    fallback_schedule = None

    while True:
        plan = build_plan(instance, active)
        if fallback_schedule is None:
            _, fallback_solution, fallback_schedule = initial_upper_bound(instance, plan)
        outcome = minimize_makespan(instance, plan, deadline, lower_bound=lower_bound)
        total_iterations += outcome.makespan_iterations
        total_nodes += outcome.nodes
        elapsed = time.monotonic() - t0
        if outcome.best is None:
            final = SolveOutcome(
                outcome.status, None, total_iterations, total_nodes, elapsed
            )
            return IterativeResult(final, None, activation)

        schedule = reconstruct(outcome.best, plan, instance)
        violations = separate(schedule, instance, active, debug=debug)
        activation.rounds.append(
            IterationRecord(
                index=len(activation.rounds) + 1,
                activated=newly,
                active_total=len(active),
                cmax=outcome.best.c_max,
                master_status=outcome.status,
                violated=len(violations),
                elapsed_ms=elapsed * 1000,
            )
        )

        if not violations:
            status = OPTIMAL if outcome.status == OPTIMAL else FEASIBLE
            final = SolveOutcome(
                status, outcome.best, total_iterations, total_nodes, elapsed
            )
            return IterativeResult(final, schedule, activation)

        out_of_time = outcome.status != OPTIMAL or (
            deadline is not None and time.monotonic() >= deadline
        )
        if out_of_time:
            final = SolveOutcome(
                TIMEOUT, fallback_solution, total_iterations, total_nodes, elapsed
            )
            return IterativeResult(final, fallback_schedule, activation)

        newly = tuple(sorted(select_activation(violations, pool)))
        active |= set(newly)
        activation.active = set(active)
        lower_bound = max(lower_bound, outcome.best.c_max)
