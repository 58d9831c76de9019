"""Problem data for the preemptive job shop with maximum-workload limits.

An instance is a classical job shop (jobs are chains of tasks, each task
pinned to one operator) plus a pool of workload constraints. A workload
constraint (delta, [lo, hi)) caps the number of shifts its operator may
work inside the half-open shift window [lo, hi).

The window boundaries of an operator's constraints partition the covered
part of the horizon into subintervals; each subinterval later carries a
variable-duration rest task in the solver model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence


class InstanceError(ValueError):
    """Raised when instance data violates a structural rule."""


@dataclass(frozen=True)
class Task:
    job: int
    pos: int
    operator: int
    duration: int  # in shifts, >= 1


@dataclass(frozen=True)
class MaxWConstraint:
    """Cap of `delta` worked shifts for `operator` inside [lo, hi)."""

    operator: int
    delta: int
    lo: int
    hi: int

    @property
    def length(self) -> int:
        return self.hi - self.lo

    @property
    def is_vacuous(self) -> bool:
        # A cap of at least the window length can never bind.
        return self.delta >= self.length

    def overlaps(self, other: "MaxWConstraint") -> bool:
        return self.lo < other.hi and other.lo < self.hi


def required_rest(c: MaxWConstraint) -> int:
    """Minimum rest shifts the window forces: (hi - lo) - delta, floored at 0."""
    return max(0, c.length - c.delta)


@dataclass(frozen=True)
class Subinterval:
    """Maximal window between consecutive constraint boundaries of one operator."""

    operator: int
    lo: int
    hi: int
    rest_ub: int  # cap on the rest duration variable placed in this window

    @property
    def length(self) -> int:
        return self.hi - self.lo


@dataclass(frozen=True)
class Instance:
    name: str
    num_operators: int
    jobs: tuple[tuple[Task, ...], ...]
    maxw: tuple[MaxWConstraint, ...]

    def all_tasks(self) -> Iterator[Task]:
        for job in self.jobs:
            yield from job

    def tasks_of(self, operator: int) -> list[Task]:
        return [t for t in self.all_tasks() if t.operator == operator]

    def total_work(self) -> int:
        return sum(t.duration for t in self.all_tasks())

    def constraints_of(self, operator: int) -> list[tuple[int, MaxWConstraint]]:
        """(pool index, constraint) pairs for one operator."""
        return [(i, c) for i, c in enumerate(self.maxw) if c.operator == operator]


def validate_instance(raw: dict) -> Instance:
    """Build a validated Instance from parsed data.

    `raw` carries: name (str), num_operators (int), jobs (per job a list of
    (operator, duration) pairs), maxw (list of (operator, delta, lo, hi)).
    Vacuous workload constraints are kept; `is_vacuous` flags them so
    solvers can skip them.
    """
    name = str(raw.get("name", ""))
    try:
        num_operators = int(raw["num_operators"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"{name}: missing or bad operator count") from exc
    if num_operators < 0:
        raise InstanceError(f"{name}: negative operator count")

    jobs: list[tuple[Task, ...]] = []
    for i, body in enumerate(raw.get("jobs", [])):
        if not body:
            raise InstanceError(f"{name}: job {i} has no tasks")
        tasks = []
        for j, (op, dur) in enumerate(body):
            op, dur = int(op), int(dur)
            if not 0 <= op < num_operators:
                raise InstanceError(
                    f"{name}: job {i} task {j} uses operator {op}, "
                    f"valid range is 0..{num_operators - 1}"
                )
            if dur < 1:
                raise InstanceError(f"{name}: job {i} task {j} has duration {dur}")
            tasks.append(Task(job=i, pos=j, operator=op, duration=dur))
        jobs.append(tuple(tasks))

    maxw: list[MaxWConstraint] = []
    for n, (op, delta, lo, hi) in enumerate(raw.get("maxw", [])):
        op, delta, lo, hi = int(op), int(delta), int(lo), int(hi)
        if not 0 <= op < num_operators:
            raise InstanceError(f"{name}: workload constraint {n} on unknown operator {op}")
        if lo < 0 or lo >= hi:
            raise InstanceError(f"{name}: workload constraint {n} has empty window [{lo},{hi})")
        if delta < 0:
            raise InstanceError(f"{name}: workload constraint {n} has negative cap {delta}")
        maxw.append(MaxWConstraint(operator=op, delta=delta, lo=lo, hi=hi))

    return Instance(
        name=name,
        num_operators=num_operators,
        jobs=tuple(jobs),
        maxw=tuple(maxw),
    )


def partition_subintervals(constraints: Sequence[MaxWConstraint]) -> tuple[Subinterval, ...]:
    """Split the union of the given windows at every window boundary.

    All constraints must belong to one operator. Every shift covered by some
    window ends up in exactly one subinterval and no subinterval crosses a
    window boundary. Shifts outside every window get no subinterval: the
    rest there would be capped at zero anyway.
    """
    if not constraints:
        return ()
    op = constraints[0].operator
    if any(c.operator != op for c in constraints):
        raise ValueError("partition_subintervals needs constraints of a single operator")

    bounds = sorted({b for c in constraints for b in (c.lo, c.hi)})
    out = []
    for lo, hi in zip(bounds, bounds[1:]):
        if any(c.lo <= lo and hi <= c.hi for c in constraints):
            out.append(
                Subinterval(
                    operator=op,
                    lo=lo,
                    hi=hi,
                    rest_ub=rest_upper_bound(lo, hi, constraints),
                )
            )
    return tuple(out)


def rest_upper_bound(lo: int, hi: int, constraints: Sequence[MaxWConstraint]) -> int:
    """Cap for the rest duration in window [lo, hi).

    The largest rest any covering constraint can demand, bounded by the
    window length. Zero when no constraint covers the window.
    """
    covering = [required_rest(c) for c in constraints if c.lo <= lo and hi <= c.hi]
    return min(hi - lo, max(covering, default=0))


@dataclass(frozen=True)
class SubintervalPlan:
    """Rest-task layout for one activation of the constraint pool.

    `subintervals` is flat, grouped by operator; `op_ranges[k]` slices out
    operator k's block; `covered` maps an active pool index to the flat
    subinterval ids that tile its window exactly.
    """

    subintervals: tuple[Subinterval, ...]
    op_ranges: tuple[tuple[int, int], ...]
    covered: dict[int, tuple[int, ...]]

    def for_operator(self, operator: int) -> tuple[Subinterval, ...]:
        a, b = self.op_ranges[operator]
        return self.subintervals[a:b]

    def indices_for_operator(self, operator: int) -> range:
        a, b = self.op_ranges[operator]
        return range(a, b)


def build_plan(instance: Instance, active: Iterable[int] | None = None) -> SubintervalPlan:
    """Partition every operator's horizon for the active constraint subset.

    `active` holds pool indices; None activates the whole pool. Vacuous
    constraints never contribute boundaries or coverage.
    """
    if active is None:
        active_ids = list(range(len(instance.maxw)))
    else:
        active_ids = sorted(set(active))

    per_op: dict[int, list[tuple[int, MaxWConstraint]]] = {}
    for idx in active_ids:
        c = instance.maxw[idx]
        if c.is_vacuous:
            continue
        per_op.setdefault(c.operator, []).append((idx, c))

    subintervals: list[Subinterval] = []
    op_ranges: list[tuple[int, int]] = []
    covered: dict[int, tuple[int, ...]] = {}
    for k in range(instance.num_operators):
        start = len(subintervals)
        pairs = per_op.get(k, [])
        qs = partition_subintervals([c for _, c in pairs])
        subintervals.extend(qs)
        op_ranges.append((start, len(subintervals)))
        for idx, c in pairs:
            covered[idx] = tuple(
                start + n for n, q in enumerate(qs) if c.lo <= q.lo and q.hi <= c.hi
            )
    return SubintervalPlan(
        subintervals=tuple(subintervals),
        op_ranges=tuple(op_ranges),
        covered=covered,
    )


# ---------------------------------------------------------------------------
# File formats. Text layout:
#   line 1: <num_jobs> <num_operators>
#   one line per job: pairs "<operator> <duration>"
#   one line: "MAXW <count>"
#   <count> lines: "<operator> <delta> <lo> <hi>"
# The JSON mirror carries the same fields (jobs, num_operators, maxw).


def parse_instance_text(text: str, name: str = "") -> Instance:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InstanceError(f"{name}: empty file")
    head = lines[0].split()
    if len(head) != 2:
        raise InstanceError(f"{name}: header must be '<num_jobs> <num_operators>'")
    try:
        num_jobs, num_operators = int(head[0]), int(head[1])
    except ValueError as exc:
        raise InstanceError(f"{name}: non-integer header") from exc
    if len(lines) < 1 + num_jobs + 1:
        raise InstanceError(f"{name}: truncated file")

    jobs = []
    for i in range(num_jobs):
        toks = lines[1 + i].split()
        if not toks or len(toks) % 2 != 0:
            raise InstanceError(f"{name}: job line {i} must hold operator/duration pairs")
        try:
            vals = [int(t) for t in toks]
        except ValueError as exc:
            raise InstanceError(f"{name}: non-integer token in job line {i}") from exc
        jobs.append(list(zip(vals[0::2], vals[1::2])))

    marker = lines[1 + num_jobs].split()
    if len(marker) != 2 or marker[0] != "MAXW":
        raise InstanceError(f"{name}: expected 'MAXW <count>' after job lines")
    try:
        count = int(marker[1])
    except ValueError as exc:
        raise InstanceError(f"{name}: bad MAXW count") from exc
    if len(lines) < 2 + num_jobs + count:
        raise InstanceError(f"{name}: truncated workload constraint section")

    maxw = []
    for n in range(count):
        toks = lines[2 + num_jobs + n].split()
        if len(toks) != 4:
            raise InstanceError(f"{name}: workload line {n} needs 4 fields")
        try:
            maxw.append(tuple(int(t) for t in toks))
        except ValueError as exc:
            raise InstanceError(f"{name}: non-integer token in workload line {n}") from exc

    return validate_instance(
        {"name": name, "num_operators": num_operators, "jobs": jobs, "maxw": maxw}
    )


def format_instance_text(instance: Instance) -> str:
    out = [f"{len(instance.jobs)} {instance.num_operators}"]
    for job in instance.jobs:
        out.append(" ".join(f"{t.operator} {t.duration}" for t in job))
    out.append(f"MAXW {len(instance.maxw)}")
    for c in instance.maxw:
        out.append(f"{c.operator} {c.delta} {c.lo} {c.hi}")
    return "\n".join(out) + "\n"


def instance_to_json_dict(instance: Instance) -> dict:
    return {
        "name": instance.name,
        "num_operators": instance.num_operators,
        "jobs": [[[t.operator, t.duration] for t in job] for job in instance.jobs],
        "maxw": [
            {"operator": c.operator, "delta": c.delta, "lo": c.lo, "hi": c.hi}
            for c in instance.maxw
        ],
    }


def parse_instance_json(text: str, name: str = "") -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{name}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InstanceError(f"{name}: JSON instance must be an object")
    maxw = []
    for c in data.get("maxw", []):
        if isinstance(c, dict):
            maxw.append((c["operator"], c["delta"], c["lo"], c["hi"]))
        else:
            maxw.append(tuple(c))
    return validate_instance(
        {
            "name": data.get("name", name) or name,
            "num_operators": data.get("num_operators"),
            "jobs": data.get("jobs", []),
            "maxw": maxw,
        }
    )


def load_instance(path: str | Path) -> Instance:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".json":
        return parse_instance_json(text, name=path.stem)
    return parse_instance_text(text, name=path.stem)


def save_instance(instance: Instance, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(instance_to_json_dict(instance), indent=2) + "\n")
    else:
        path.write_text(format_instance_text(instance))
