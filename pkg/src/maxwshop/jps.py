"""Single-operator preemptive scheduling by earliest deadline first.

Feasibility of a set of windowed tasks on one operator is exactly the
interval-energy condition: for every release a and deadline b, the total
duration of tasks confined to [a, b) must fit in b - a shifts. When it
holds, the earliest-deadline-first sweep produces a schedule meeting every
deadline, one unit per shift, preempting freely.

Rest tasks are ordinary tasks here: a fixed window (their subinterval) and
a fixed duration (the rest shifts assigned by the solver). Work and rest
units are placed by the same sweep.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

from .model import Instance, SubintervalPlan

if TYPE_CHECKING:
    from .solver import WindowSolution

# Cell values: ("w", job, pos) for a work unit, ("r", subinterval) for a
# rest unit, None for an idle shift.
WORK = "w"
REST = "r"


@dataclass(frozen=True)
class WindowedTask:
    id: tuple
    release: int
    deadline: int
    duration: int
    kind: str  # WORK or REST


@dataclass(frozen=True)
class Overload:
    """Witness interval whose contained duration exceeds its length."""

    lo: int
    hi: int
    excess: int


class InfeasibleScheduleError(Exception):
    """EDF hit a shift where an unfinished task's deadline had passed."""

    def __init__(self, shift: int, task_id: tuple | None = None):
        self.shift = shift
        self.task_id = task_id
        super().__init__(f"unfinished task {task_id} past its deadline at shift {shift}")


class ReconstructionError(RuntimeError):
    """A solver solution failed to rebuild, which indicates a solver bug."""


def check_horn(tasks: Sequence[WindowedTask]) -> Overload | None:
    """Return None when the task set fits, else the first overloaded interval.

    Intervals are scanned with releases ascending, then deadlines ascending,
    so the reported witness is deterministic.
    """
    active = [t for t in tasks if t.duration > 0]
    for t in active:
        if t.duration > max(0, t.deadline - t.release):
            return Overload(
                lo=t.release,
                hi=t.deadline,
                excess=t.duration - max(0, t.deadline - t.release),
            )
    releases = sorted({t.release for t in active})
    deadlines = sorted({t.deadline for t in active})
    by_deadline = sorted(active, key=lambda t: t.deadline)
    for a in releases:
        energy = 0
        pos = 0
        for b in deadlines:
            while pos < len(by_deadline) and by_deadline[pos].deadline <= b:
                if by_deadline[pos].release >= a:
                    energy += by_deadline[pos].duration
                pos += 1
            if b > a and energy > b - a:
                return Overload(lo=a, hi=b, excess=energy - (b - a))
    return None


def _edf_key(task: WindowedTask) -> tuple:
    # Smallest deadline first, work before rest, then id: fixed tie-break
    # so identical inputs give bit-identical schedules.
    return (task.deadline, 0 if task.kind == WORK else 1, task.id)


def build_jps(tasks: Sequence[WindowedTask], horizon: int) -> list:
    """Earliest-deadline-first sweep over one operator's shifts.

    Returns one cell per shift in [0, horizon). Raises
    InfeasibleScheduleError at the first shift where a task with remaining
    units has run out of window; this happens exactly when check_horn
    reports an overload.
    """
    remaining = {t.id: t.duration for t in tasks}
    by_id = {t.id: t for t in tasks}
    cells: list = [None] * horizon
    pending = sorted((t for t in tasks if t.duration > 0), key=_edf_key)
    for shift in range(horizon):
        for t in pending:
            if remaining[t.id] > 0 and t.deadline <= shift:
                raise InfeasibleScheduleError(shift, t.id)
        chosen = None
        for t in pending:
            if remaining[t.id] > 0 and t.release <= shift < t.deadline:
                chosen = t
                break
        if chosen is not None:
            cells[shift] = chosen.id
            remaining[chosen.id] -= 1
    leftover = [tid for tid, r in remaining.items() if r > 0]
    if leftover:
        tid = min(leftover, key=lambda i: (_edf_key(by_id[i])))
        raise InfeasibleScheduleError(min(horizon, by_id[tid].deadline), tid)
    return cells


@dataclass
class ShiftSchedule:
    """Explicit per-operator, per-shift grid of work / rest / idle cells."""

    horizon: int
    cells: list = field(default_factory=list)  # cells[operator][shift]

    @property
    def num_operators(self) -> int:
        return len(self.cells)

    def work_shifts(self, operator: int) -> list[int]:
        return [
            s
            for s, cell in enumerate(self.cells[operator])
            if cell is not None and cell[0] == WORK
        ]

    def worked_in(self, operator: int, lo: int, hi: int) -> int:
        row = self.cells[operator]
        hi = min(hi, len(row))
        return sum(
            1 for s in range(max(0, lo), hi) if row[s] is not None and row[s][0] == WORK
        )

    def makespan(self) -> int:
        last = -1
        for k in range(self.num_operators):
            ws = self.work_shifts(k)
            if ws:
                last = max(last, ws[-1])
        return last + 1

    def to_json_dict(self) -> dict:
        def tag(cell):
            if cell is None:
                return None
            return ":".join(str(x) for x in cell)

        return {
            "horizon": self.horizon,
            "makespan": self.makespan(),
            "operators": [[tag(c) for c in row] for row in self.cells],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ShiftSchedule":
        def untag(tag):
            if tag is None:
                return None
            parts = tag.split(":")
            return (parts[0], *[int(p) for p in parts[1:]])

        cells = [[untag(t) for t in row] for row in data["operators"]]
        return cls(horizon=int(data["horizon"]), cells=cells)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ShiftSchedule":
        return cls.from_json_dict(json.loads(text))

    def gantt(self) -> str:
        """One row per operator, one character per shift: job letter, r, or dot."""
        rows = []
        for k, row in enumerate(self.cells):
            chars = []
            for cell in row:
                if cell is None:
                    chars.append(".")
                elif cell[0] == REST:
                    chars.append("r")
                else:
                    chars.append(chr(ord("A") + cell[1] % 26))
            rows.append(f"op{k:<3d} " + "".join(chars))
        return "\n".join(rows) + "\n"


def window_tasks_for_operator(
    solution: "WindowSolution",
    plan: SubintervalPlan,
    instance: Instance,
    operator: int,
) -> list[WindowedTask]:
    """Work tasks at their solved windows plus rest tasks at their solved durations."""
    tasks = []
    for t in instance.tasks_of(operator):
        tasks.append(
            WindowedTask(
                id=(WORK, t.job, t.pos),
                release=solution.starts[(t.job, t.pos)],
                deadline=solution.ends[(t.job, t.pos)],
                duration=t.duration,
                kind=WORK,
            )
        )
    for q in plan.indices_for_operator(operator):
        dur = solution.rests[q]
        if dur > 0:
            sub = plan.subintervals[q]
            tasks.append(
                WindowedTask(
                    id=(REST, q), release=sub.lo, deadline=sub.hi, duration=dur, kind=REST
                )
            )
    return tasks


def reconstruct(
    solution: "WindowSolution", plan: SubintervalPlan, instance: Instance
) -> ShiftSchedule:
    """Turn a window solution into an explicit shift schedule, operator by operator.

    Any EDF failure here means the solution did not actually satisfy the
    per-operator feasibility condition, i.e. a solver bug, so the error
    carries the full task dump.
    """
    horizon = solution.c_max
    for q in plan.subintervals:
        horizon = max(horizon, q.hi)
    cells = []
    for k in range(instance.num_operators):
        tasks = window_tasks_for_operator(solution, plan, instance, k)
        try:
            cells.append(build_jps(tasks, horizon))
        except InfeasibleScheduleError as exc:
            dump = "; ".join(
                f"{t.id}:[{t.release},{t.deadline}) dur={t.duration}" for t in tasks
            )
            raise ReconstructionError(
                f"operator {k}: solution not schedulable ({exc}); tasks: {dump}"
            ) from exc
    return ShiftSchedule(horizon=horizon, cells=cells)
