"""Command line front end: solve, bench, gen, check, oracle.

Every schedule written by `solve` or `bench` has passed the full legality
check against the complete constraint pool first. Exit codes: 0 success,
2 unreadable input, 3 legality check failed, 4 no solution in time,
5 oracle budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from . import checker, gen, lazy, solver
from .jps import reconstruct
from .model import (
    Instance,
    InstanceError,
    build_plan,
    format_instance_text,
    load_instance,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CHECK = 3
EXIT_NO_SOLUTION = 4
EXIT_EXHAUSTED = 5

RECORD_FIELDS = [
    "instance",
    "strategy",
    "status",
    "c_max",
    "elapsed_ms",
    "makespan_iterations",
    "maxw_iterations",
    "activated",
    "pool",
    "seed",
]


@dataclass
class RunRecord:
    instance: str
    strategy: str
    status: str
    c_max: int | None
    elapsed_ms: float
    makespan_iterations: int
    maxw_iterations: int | None
    activated: int | None
    pool: int
    seed: int | None


def run_strategy(instance: Instance, strategy: str, time_limit: float, seed=None):
    """Run one solve and return (record, schedule, activation-or-None)."""
    deadline = time.monotonic() + time_limit if time_limit else None
    if strategy == "allmaxw":
        plan = build_plan(instance)
        outcome = solver.minimize_makespan(instance, plan, deadline)
        schedule = (
            reconstruct(outcome.best, plan, instance) if outcome.best is not None else None
        )
        activation = None
        maxw_iterations = None
        activated = len(instance.maxw)
    elif strategy == "iterative":
        result = lazy.solve_iterative(instance, deadline)
        outcome = result.outcome
        schedule = result.schedule
        activation = result.activation
        maxw_iterations = len(activation.rounds)
        activated = len(activation.active)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    record = RunRecord(
        instance=instance.name,
        strategy=strategy,
        status=outcome.status,
        c_max=outcome.best.c_max if outcome.best is not None else None,
        elapsed_ms=round(outcome.elapsed * 1000, 3),
        makespan_iterations=outcome.makespan_iterations,
        maxw_iterations=maxw_iterations,
        activated=activated,
        pool=len(instance.maxw),
        seed=seed,
    )
    return record, schedule, activation


def cmd_solve(args) -> int:
    try:
        instance = load_instance(args.instance)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    record, schedule, activation = run_strategy(instance, args.strategy, args.time_limit)
    if schedule is None:
        print(f"{instance.name}: {record.status}, no schedule", file=sys.stderr)
        return EXIT_NO_SOLUTION

    claimed = record.c_max if record.c_max is not None else schedule.makespan()
    report = checker.check_schedule(schedule, instance, claimed)
    if not report.ok:
        print(report.to_json(), file=sys.stderr)
        return EXIT_CHECK

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = f"{instance.name}.{args.strategy}"
    (outdir / f"{stem}.schedule.json").write_text(schedule.to_json())
    (outdir / f"{stem}.gantt.txt").write_text(schedule.gantt())
    (outdir / f"{stem}.record.json").write_text(json.dumps(asdict(record), indent=2) + "\n")
    if activation is not None:
        lines = [json.dumps(r.to_json_dict()) for r in activation.rounds]
        (outdir / f"{stem}.iters.jsonl").write_text("\n".join(lines) + "\n")
    print(
        f"{instance.name}: {record.status} c_max={record.c_max} "
        f"({record.elapsed_ms:.0f} ms, {record.makespan_iterations} improving solutions)"
    )
    return EXIT_OK


def _bench_one(task: tuple) -> dict:
    path, strategy, time_limit, seed = task
    try:
        instance = load_instance(path)
        record, schedule, _ = run_strategy(instance, strategy, time_limit, seed=seed)
        if schedule is not None:
            claimed = record.c_max if record.c_max is not None else schedule.makespan()
            report = checker.check_schedule(schedule, instance, claimed)
            if not report.ok:
                record.status = "check-failed"
    except Exception as exc:  # record the failure, keep the batch going
        return {
            "instance": Path(path).stem,
            "strategy": strategy,
            "status": f"error: {exc}",
            "c_max": None,
            "elapsed_ms": None,
            "makespan_iterations": None,
            "maxw_iterations": None,
            "activated": None,
            "pool": None,
            "seed": seed,
        }
    return asdict(record)


def cmd_bench(args) -> int:
    manifest = Path(args.manifest)
    try:
        with manifest.open() as fh:
            entries = list(csv.DictReader(fh))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    tasks = []
    for row in entries:
        path = manifest.parent / row["instance"]
        for strategy in strategies:
            tasks.append((str(path), strategy, args.time_limit, int(row["seed"])))

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_bench_one, tasks))
    else:
        results = [_bench_one(t) for t in tasks]
    results.sort(key=lambda r: (r["instance"], r["strategy"]))

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    results_path = outdir / "results.csv"
    with results_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RECORD_FIELDS)
        writer.writeheader()
        writer.writerows(results)

    summary_path = outdir / "summary.csv"
    _write_summary(entries, results, strategies, summary_path)
    print(f"wrote {results_path} and {summary_path} ({len(results)} runs)")
    return EXIT_OK


def _write_summary(entries, results, strategies, path: Path) -> None:
    """Aggregate per density pair: optimal counts, activation, iterations."""
    density_of = {Path(e["instance"]).stem: (e["gd"], e["ld"]) for e in entries}
    groups: dict = {}
    for r in results:
        key = density_of.get(r["instance"])
        if key is None:
            continue
        groups.setdefault(key, []).append(r)

    def mean(xs):
        xs = [x for x in xs if x is not None]
        return round(sum(xs) / len(xs), 4) if xs else ""

    fields = ["gd", "ld", "n"]
    for s in strategies:
        fields += [f"solved_{s}", f"mean_makespan_iterations_{s}"]
    if "iterative" in strategies:
        fields += ["mean_activated_prop", "mean_maxw_iterations"]

    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for (gd, ld) in sorted(groups):
            rows = groups[(gd, ld)]
            out = {"gd": gd, "ld": ld, "n": len({r["instance"] for r in rows})}
            for s in strategies:
                mine = [r for r in rows if r["strategy"] == s]
                out[f"solved_{s}"] = sum(1 for r in mine if r["status"] == solver.OPTIMAL)
                out[f"mean_makespan_iterations_{s}"] = mean(
                    [r["makespan_iterations"] for r in mine]
                )
            if "iterative" in strategies:
                mine = [r for r in rows if r["strategy"] == "iterative"]
                props = [
                    r["activated"] / r["pool"]
                    for r in mine
                    if r["pool"] not in (None, 0) and r["activated"] is not None
                ]
                out["mean_activated_prop"] = mean(props)
                out["mean_maxw_iterations"] = mean([r["maxw_iterations"] for r in mine])
            writer.writerow(out)


def cmd_check(args) -> int:
    try:
        instance = load_instance(args.instance)
        data = json.loads(Path(args.schedule).read_text())
        schedule = checker.ShiftSchedule.from_json_dict(data)
    except (InstanceError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    claimed = int(data.get("makespan", schedule.makespan()))
    report = checker.check_schedule(schedule, instance, claimed)
    print(report.to_json(), end="")
    return EXIT_OK if report.ok else EXIT_CHECK


def cmd_oracle(args) -> int:
    try:
        instance = load_instance(args.instance)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        best = checker.brute_force_optimum(
            instance, horizon_cap=args.horizon_cap, node_cap=args.node_cap
        )
    except checker.OracleExhausted as exc:
        print(f"{instance.name}: exhausted ({exc})", file=sys.stderr)
        return EXIT_EXHAUSTED
    if best is None:
        print(f"{instance.name}: no schedule within horizon cap", file=sys.stderr)
        return EXIT_NO_SOLUTION
    print(f"{instance.name}: optimum c_max={best}")
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        if args.bases:
            bases = [load_instance(p) for p in args.bases]
            values = [float(x) for x in args.grid.split(",")]
            manifest = gen.generate_suite(
                bases,
                gen.density_grid(values),
                args.master_seed,
                args.outdir,
                horizon=args.horizon,
            )
            print(f"wrote {manifest}")
            return EXIT_OK
        if not args.base or not args.output:
            print("error: need --base and -o (or --bases for a suite)", file=sys.stderr)
            return EXIT_PARSE
        base = load_instance(args.base)
        horizon = args.horizon or gen.default_horizon(base)
        params = gen.GenParams(gd=args.gd, ld=args.ld, seed=args.seed, horizon=horizon)
        inst = gen.generate_maxw(base, params)
        Path(args.output).write_text(format_instance_text(inst))
        print(f"wrote {args.output} ({len(inst.maxw)} constraints)")
        return EXIT_OK
    except (InstanceError, gen.GenerationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxwshop",
        description="Preemptive job-shop scheduling under maximum-workload constraints",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance and write its schedule")
    p.add_argument("instance")
    p.add_argument("--strategy", choices=["allmaxw", "iterative"], default="iterative")
    p.add_argument("--time-limit", type=float, default=60.0, metavar="SECONDS")
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run a generated suite and aggregate results")
    p.add_argument("manifest")
    p.add_argument("--strategies", default="allmaxw,iterative")
    p.add_argument("--time-limit", type=float, default=60.0, metavar="SECONDS")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="augment base instances with workload constraints")
    p.add_argument("--base")
    p.add_argument("--gd", type=float, default=0.25)
    p.add_argument("--ld", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("-o", "--output")
    p.add_argument("--bases", nargs="*", help="suite mode: base instance files")
    p.add_argument("--grid", default="0.1,0.25,0.4", help="suite mode: density values")
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--outdir", default="suite")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="verify a schedule file against its instance")
    p.add_argument("instance")
    p.add_argument("schedule")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle", help="exact optimum of a tiny instance")
    p.add_argument("instance")
    p.add_argument("--horizon-cap", type=int, default=None)
    p.add_argument("--node-cap", type=int, default=2_000_000)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
