"""Ground truth: full legality checking and a tiny-instance exact optimizer.

The oracle enumerates shift by shift what each operator does, counting
worked shifts directly against every workload window. It knows nothing of
task windows, rest tasks or subintervals, so it cannot share a bug with
the window model it is used to judge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

from .jps import WORK, ShiftSchedule
from .model import Instance

DURATION = "duration"
PRECEDENCE = "precedence"
OVERLAP = "overlap"
SAME_OPERATOR = "same-operator"
MAXW = "maxw"
MAKESPAN = "makespan"


@dataclass(frozen=True)
class RuleViolation:
    rule: str
    location: str
    detail: str


@dataclass
class CheckReport:
    ok: bool
    violations: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"rule": v.rule, "location": v.location, "detail": v.detail}
                for v in self.violations
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


def check_schedule(
    schedule: ShiftSchedule, instance: Instance, claimed_cmax: int
) -> CheckReport:
    """Verify every problem rule on an explicit schedule. Reports, never raises."""
    violations: list[RuleViolation] = []

    def bad(rule: str, location: str, detail: str) -> None:
        violations.append(RuleViolation(rule, location, detail))

    if len(schedule.cells) != instance.num_operators:
        bad(
            OVERLAP,
            "grid",
            f"{len(schedule.cells)} rows for {instance.num_operators} operators",
        )
    for k, row in enumerate(schedule.cells):
        if len(row) != schedule.horizon:
            bad(OVERLAP, f"operator {k}", f"row length {len(row)} != horizon {schedule.horizon}")

    known = {(t.job, t.pos): t for t in instance.all_tasks()}
    cells_of: dict = {key: [] for key in known}
    for k, row in enumerate(schedule.cells):
        for s, cell in enumerate(row):
            if cell is None or cell[0] != WORK:
                continue
            key = (cell[1], cell[2])
            if key not in known:
                bad(DURATION, f"operator {k} shift {s}", f"work cell for unknown task {key}")
                continue
            cells_of[key].append((k, s))

    for key, task in known.items():
        placed = cells_of[key]
        wrong_rows = [(k, s) for k, s in placed if k != task.operator]
        for k, s in wrong_rows:
            bad(
                SAME_OPERATOR,
                f"task {key}",
                f"unit at shift {s} on operator {k}, assigned operator is {task.operator}",
            )
        count = len(placed)
        if count != task.duration:
            bad(DURATION, f"task {key}", f"{count} work cells for duration {task.duration}")

    for job in instance.jobs:
        for prev, nxt in zip(job, job[1:]):
            a = cells_of[(prev.job, prev.pos)]
            b = cells_of[(nxt.job, nxt.pos)]
            if a and b:
                last_prev = max(s for _, s in a)
                first_next = min(s for _, s in b)
                if first_next <= last_prev:
                    bad(
                        PRECEDENCE,
                        f"job {prev.job}",
                        f"task {nxt.pos} starts at {first_next}, "
                        f"task {prev.pos} still runs at {last_prev}",
                    )

    for n, c in enumerate(instance.maxw):
        if c.operator >= len(schedule.cells):
            continue
        worked = schedule.worked_in(c.operator, c.lo, c.hi)
        if worked > c.delta:
            bad(
                MAXW,
                f"constraint {n} operator {c.operator} window [{c.lo},{c.hi})",
                f"{worked} worked shifts, cap {c.delta}",
            )

    makespan = schedule.makespan()
    if makespan > claimed_cmax:
        bad(MAKESPAN, "schedule", f"last work shift ends at {makespan}, claimed {claimed_cmax}")

    return CheckReport(ok=not violations, violations=violations)


class OracleExhausted(Exception):
    """The exact search hit its node budget before finishing."""


def brute_force_optimum(
    instance: Instance,
    horizon_cap: int | None = None,
    node_cap: int = 2_000_000,
) -> int | None:
    """Exact minimum makespan by exhaustive shift-by-shift enumeration.

    At every shift each operator idles or works one unit of a task whose
    predecessor is finished and whose operator still has allowance in every
    workload window covering the shift. Memoized on (shift, remaining
    units, window usage); only meant for tiny instances. Returns None when
    no completion exists within horizon_cap, raises OracleExhausted past
    node_cap.
    """
    if horizon_cap is None:
        from .model import build_plan
        from .solver import initial_upper_bound

        horizon_cap, _, _ = initial_upper_bound(instance, build_plan(instance))

    tasks = list(instance.all_tasks())
    if not tasks:
        return 0
    index = {(t.job, t.pos): n for n, t in enumerate(tasks)}
    pred = [index[(t.job, t.pos - 1)] if t.pos > 0 else -1 for t in tasks]
    op_of = [t.operator for t in tasks]
    tasks_by_op = [
        [n for n, t in enumerate(tasks) if t.operator == k]
        for k in range(instance.num_operators)
    ]
    cons = [(n, c) for n, c in enumerate(instance.maxw) if not c.is_vacuous]
    cons_by_op: list[list[int]] = [[] for _ in range(instance.num_operators)]
    for slot, (_, c) in enumerate(cons):
        cons_by_op[c.operator].append(slot)

    chain_tail = [0] * len(tasks)
    for job in instance.jobs:
        total = 0
        for t in reversed(job):
            total += t.duration
            chain_tail[index[(t.job, t.pos)]] = total

    nodes = 0
    infinite = horizon_cap + 1

    @lru_cache(maxsize=None)
    def search(t: int, rem: tuple, used: tuple) -> int:
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            raise OracleExhausted(f"node budget {node_cap} exceeded")

        per_op = [0] * instance.num_operators
        chain_lb = 0
        for n, r in enumerate(rem):
            if r > 0:
                per_op[op_of[n]] += r
                chain_lb = max(chain_lb, chain_tail[n] - (tasks[n].duration - r))
        if t + max(max(per_op), chain_lb) > horizon_cap:
            return infinite

        options = []
        for k in range(instance.num_operators):
            ok_here = [-1]  # idle
            for n in tasks_by_op[k]:
                if rem[n] == 0:
                    continue
                if pred[n] >= 0 and rem[pred[n]] > 0:
                    continue
                blocked = False
                for slot in cons_by_op[k]:
                    _, c = cons[slot]
                    if c.lo <= t < c.hi and used[slot] >= c.delta:
                        blocked = True
                        break
                if not blocked:
                    ok_here.append(n)
            options.append(ok_here)

        best = infinite
        for moves in product(*options):
            if all(m == -1 for m in moves):
                best = min(best, search(t + 1, rem, used))
                continue
            new_rem = list(rem)
            new_used = list(used)
            for k, n in enumerate(moves):
                if n == -1:
                    continue
                new_rem[n] -= 1
                for slot in cons_by_op[k]:
                    _, c = cons[slot]
                    if c.lo <= t < c.hi:
                        new_used[slot] += 1
            if all(r == 0 for r in new_rem):
                best = min(best, t + 1)
            else:
                best = min(best, search(t + 1, tuple(new_rem), tuple(new_used)))
        return best

    rem0 = tuple(t.duration for t in tasks)
    used0 = tuple(0 for _ in cons)
    try:
        result = search(0, rem0, used0)
    finally:
        search.cache_clear()
    return None if result > horizon_cap else result
