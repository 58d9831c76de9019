"""Bound propagation over task windows, rest durations and the makespan.

A SearchState holds [lo, hi] bounds for every start, end and rest-duration
variable plus the makespan, with a trail so the search can undo bound
changes in O(1) per change. Propagators only ever tighten bounds; crossing
bounds raise Conflict.

The disjunctive reasoning treats rest tasks at their minimum duration,
which may undercount mandatory rest but never removes a feasible
assignment.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .jps import REST, WORK, WindowedTask, check_horn
from .model import Instance, SubintervalPlan, required_rest

# Variable kinds, in branching preference order.
S = "s"  # task window start
D = "d"  # rest duration of a subinterval
E = "e"  # task window end
CMAX = "cmax"

KINDS = (S, D, E, CMAX)


class Conflict(Exception):
    """A bound update emptied a domain or a check found an impossibility."""

    def __init__(self, reason: str, witness: tuple | None = None):
        self.reason = reason
        self.witness = witness
        super().__init__(reason if witness is None else f"{reason} {witness}")


@dataclass(frozen=True)
class VarBounds:
    lo: int
    hi: int

    @property
    def fixed(self) -> bool:
        return self.lo == self.hi

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


class SearchState:
    """Reversible bound store for one solver run.

    Start variables range over [0, ub - duration], ends over [duration, ub],
    the makespan over [0, ub]. Each rest duration starts at [0, rest_ub] of
    its subinterval, so the domain cap on rest is built in from the start.
    """

    def __init__(self, instance: Instance, plan: SubintervalPlan, ub: int):
        self.instance = instance
        self.plan = plan
        self.ub = ub
        self.tasks = list(instance.all_tasks())
        self.task_index = {(t.job, t.pos): n for n, t in enumerate(self.tasks)}
        nt = len(self.tasks)
        self._lo = {
            S: [0] * nt,
            E: [t.duration for t in self.tasks],
            D: [0] * len(plan.subintervals),
            CMAX: [0],
        }
        self._hi = {
            S: [ub - t.duration for t in self.tasks],
            E: [ub] * nt,
            D: [q.rest_ub for q in plan.subintervals],
            CMAX: [ub],
        }
        self._trail: list[tuple[str, int, bool, int]] = []
        self._marks: list[int] = []

        self._op_tasks: list[list[int]] = [[] for _ in range(instance.num_operators)]
        for n, t in enumerate(self.tasks):
            self._op_tasks[t.operator].append(n)
        self._op_subs = [
            sorted(plan.indices_for_operator(k), key=lambda q: plan.subintervals[q].hi)
            for k in range(instance.num_operators)
        ]
        # Best total required rest over pairwise-disjoint active windows, as
        # a prefix function of the window end: disjoint windows force
        # disjoint rest, so their demands add up. Static per activation.
        self._rest_demand: list[tuple[list[int], list[int]]] = []
        for k in range(instance.num_operators):
            windows = sorted(
                (
                    (instance.maxw[ci].lo, instance.maxw[ci].hi, required_rest(instance.maxw[ci]))
                    for ci in plan.covered
                    if instance.maxw[ci].operator == k
                ),
                key=lambda w: (w[1], w[0]),
            )
            his: list[int] = []
            best: list[int] = []
            for lo, hi, need in windows:
                j = bisect_right(his, lo) - 1
                take = need + (best[j] if j >= 0 else 0)
                keep = best[-1] if best else 0
                his.append(hi)
                best.append(max(keep, take))
            self._rest_demand.append((his, best))

    # -- bound access -------------------------------------------------

    def lo(self, kind: str, idx: int = 0) -> int:
        return self._lo[kind][idx]

    def hi(self, kind: str, idx: int = 0) -> int:
        return self._hi[kind][idx]

    def bounds(self, kind: str, idx: int = 0) -> VarBounds:
        return VarBounds(self._lo[kind][idx], self._hi[kind][idx])

    def is_fixed(self, kind: str, idx: int = 0) -> bool:
        return self._lo[kind][idx] == self._hi[kind][idx]

    def set_lo(self, kind: str, idx: int, value: int) -> bool:
        if value <= self._lo[kind][idx]:
            return False
        if value > self._hi[kind][idx]:
            raise Conflict(f"{kind}[{idx}] lower bound {value} above upper "
                           f"{self._hi[kind][idx]}")
        self._trail.append((kind, idx, True, self._lo[kind][idx]))
        self._lo[kind][idx] = value
        return True

    def set_hi(self, kind: str, idx: int, value: int) -> bool:
        if value >= self._hi[kind][idx]:
            return False
        if value < self._lo[kind][idx]:
            raise Conflict(f"{kind}[{idx}] upper bound {value} below lower "
                           f"{self._lo[kind][idx]}")
        self._trail.append((kind, idx, False, self._hi[kind][idx]))
        self._hi[kind][idx] = value
        return True

    def check_consistent(self) -> None:
        """Catch domains that were born empty (e.g. ub below a duration)."""
        for kind in KINDS:
            for idx, (lo, hi) in enumerate(zip(self._lo[kind], self._hi[kind])):
                if lo > hi:
                    raise Conflict(f"{kind}[{idx}] has empty domain [{lo},{hi}]")

    # -- trail --------------------------------------------------------

    def push(self) -> None:
        self._marks.append(len(self._trail))

    def pop(self) -> None:
        mark = self._marks.pop()
        while len(self._trail) > mark:
            kind, idx, is_lo, old = self._trail.pop()
            if is_lo:
                self._lo[kind][idx] = old
            else:
                self._hi[kind][idx] = old

    def clone(self) -> "SearchState":
        other = SearchState.__new__(SearchState)
        other.instance = self.instance
        other.plan = self.plan
        other.ub = self.ub
        other.tasks = self.tasks
        other.task_index = self.task_index
        other._lo = {k: list(v) for k, v in self._lo.items()}
        other._hi = {k: list(v) for k, v in self._hi.items()}
        other._trail = []
        other._marks = []
        return other

    # -- derived views ------------------------------------------------

    def operator_window_tasks(self, operator: int) -> list[WindowedTask]:
        """Tasks of one operator at their current outer windows.

        Work tasks run over [s.lo, e.hi) with their full duration; rest
        tasks over their fixed subinterval with their minimum duration.
        """
        out = []
        for t in self.instance.tasks_of(operator):
            n = self.task_index[(t.job, t.pos)]
            out.append(
                WindowedTask(
                    id=(WORK, t.job, t.pos),
                    release=self._lo[S][n],
                    deadline=self._hi[E][n],
                    duration=t.duration,
                    kind=WORK,
                )
            )
        for q in self.plan.indices_for_operator(operator):
            sub = self.plan.subintervals[q]
            out.append(
                WindowedTask(
                    id=(REST, q),
                    release=sub.lo,
                    deadline=sub.hi,
                    duration=self._lo[D][q],
                    kind=REST,
                )
            )
        return out


def propagate_chain(state: SearchState) -> bool:
    """Bound consistency of the job chains and the makespan link.

    Forward: first start fixed at 0, each end at least start plus duration,
    each successor start at least the predecessor end, makespan at least
    every last end. Backward: ends capped by the makespan / successor
    start, starts capped by end minus duration.
    """
    changed = False
    cmax_hi = state.hi(CMAX)
    for job in state.instance.jobs:
        idx = [state.task_index[(t.job, t.pos)] for t in job]
        first = idx[0]
        changed |= state.set_hi(S, first, 0)
        prev = None
        for n, t in zip(idx, job):
            if prev is not None:
                changed |= state.set_lo(S, n, state.lo(E, prev))
            changed |= state.set_lo(E, n, state.lo(S, n) + t.duration)
            prev = n
        changed |= state.set_lo(CMAX, 0, state.lo(E, idx[-1]))
        nxt = None
        for n, t in zip(reversed(idx), reversed(job)):
            limit = cmax_hi if nxt is None else state.hi(S, nxt)
            changed |= state.set_hi(E, n, limit)
            changed |= state.set_hi(S, n, state.hi(E, n) - t.duration)
            nxt = n
    return changed


def propagate_maxw(state: SearchState, active: list[int] | None = None) -> bool:
    """Push rest-duration lower bounds so each window's required rest fits.

    For a constraint needing R rest over subintervals Q, each d_q must be
    at least R minus what the other members of Q can still provide.
    """
    changed = False
    covered = state.plan.covered
    items = covered.items() if active is None else ((i, covered[i]) for i in active if i in covered)
    for cidx, qs in items:
        need = required_rest(state.instance.maxw[cidx])
        if need == 0 or not qs:
            if need > 0 and not qs:
                raise Conflict(f"constraint {cidx} needs {need} rest but covers nothing")
            continue
        total_hi = sum(state.hi(D, q) for q in qs)
        if total_hi < need:
            raise Conflict(
                f"constraint {cidx} needs {need} rest, capacity {total_hi}",
                witness=(state.instance.maxw[cidx].lo, state.instance.maxw[cidx].hi),
            )
        for q in qs:
            floor = need - (total_hi - state.hi(D, q))
            if floor > 0:
                changed |= state.set_lo(D, q, floor)
    return changed


def overload_check(state: SearchState, operator: int) -> None:
    """Interval-energy check on the operator's current outer windows."""
    witness = check_horn(state.operator_window_tasks(operator))
    if witness is not None:
        raise Conflict(
            f"operator {operator} overloaded in [{witness.lo},{witness.hi}) "
            f"by {witness.excess}",
            witness=(witness.lo, witness.hi),
        )


def _mandatory_inside(task: WindowedTask, a: int, b: int) -> int:
    """Units `task` must place inside [a, b) whatever its final window is.

    The units that do not fit in the part of its outer window lying
    outside [a, b).
    """
    overlap = max(0, min(b, task.deadline) - max(a, task.release))
    room_outside = (task.deadline - task.release) - overlap
    return max(0, task.duration - room_outside)


def filter_noverlap(state: SearchState, operator: int) -> bool:
    """Energy-based window tightening for one operator's work tasks.

    For each work task, find the earliest end x such that the task's units
    fit into [release, x) alongside the units other tasks are forced to
    place there; every smaller x is checked and rejected individually, so
    only assignments that fail the fixed-value feasibility condition are
    ever cut. The latest start is tightened symmetrically. Rest tasks
    contribute their minimum durations.
    """
    tasks = state.operator_window_tasks(operator)
    changed = False
    for t in tasks:
        if t.kind != WORK:
            continue
        n = state.task_index[(t.id[1], t.id[2])]
        others = [o for o in tasks if o.id != t.id and o.duration > 0]

        release = state.lo(S, n)
        e_lo, e_hi = state.lo(E, n), state.hi(E, n)
        x = max(e_lo, release + t.duration)
        while x <= e_hi:
            demand = t.duration + sum(_mandatory_inside(o, release, x) for o in others)
            if demand <= x - release:
                break
            x += 1
        if x > e_hi:
            raise Conflict(
                f"operator {operator} task {t.id} cannot finish by {e_hi}",
                witness=(release, e_hi),
            )
        changed |= state.set_lo(E, n, x)

        deadline = state.hi(E, n)
        s_lo, s_hi = state.lo(S, n), state.hi(S, n)
        y = min(s_hi, deadline - t.duration)
        while y >= s_lo:
            demand = t.duration + sum(_mandatory_inside(o, y, deadline) for o in others)
            if demand <= deadline - y:
                break
            y -= 1
        if y < s_lo:
            raise Conflict(
                f"operator {operator} task {t.id} cannot start from {s_lo}",
                witness=(s_lo, deadline),
            )
        changed |= state.set_hi(S, n, y)
    return changed


def propagate_all(state: SearchState) -> None:
    """Run all propagators round-robin until no bound moves.

    Order per round: chains, workload rest floors, then per-operator
    overload check and window filtering. The order is fixed so runs are
    reproducible; any fixpoint order would be equally sound.
    """
    state.check_consistent()
    changed = True
    while changed:
        changed = propagate_chain(state)
        changed |= propagate_maxw(state)
        for k in range(state.instance.num_operators):
            overload_check(state, k)
        for k in range(state.instance.num_operators):
            changed |= filter_noverlap(state, k)
