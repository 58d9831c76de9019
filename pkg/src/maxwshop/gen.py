"""Workload-constraint instance generation.

Each operator accumulates random constraint windows until the rest they
force reaches a global density target over the horizon. Window lengths are
uniform in [3, floor(0.2 * horizon)]; the rest proportion inside a window
is normal around the local density with a quarter of it as spread, clamped
to [0, 1], rounded half-up to shifts.

Randomness comes from a counter-based Philox generator keyed directly by
the seed, so (base, gd, ld, seed) fully determines the output bytes. Suite
seeds derive from sha256 of "name|gd|ld|master", truncated to 64 bits.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import (
    Instance,
    MaxWConstraint,
    build_plan,
    format_instance_text,
    required_rest,
    validate_instance,
)


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenParams:
    gd: float  # global rest density over the horizon
    ld: float  # local rest density inside one window
    seed: int
    horizon: int

    def __post_init__(self):
        if not 0 < self.gd < 1:
            raise GenerationError(f"global density {self.gd} outside (0,1)")
        if not 0 < self.ld < 1:
            raise GenerationError(f"local density {self.ld} outside (0,1)")
        if self.horizon < 15:
            raise GenerationError(
                f"horizon {self.horizon} too short, need >= 15 so windows of "
                f"length 3 fit under the 0.2 * horizon cap"
            )


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def draw_constraint(
    rng: np.random.Generator, operator: int, horizon: int, ld: float
) -> tuple[MaxWConstraint, int, float]:
    """One random window with its rest count and the clamped proportion drawn."""
    max_len = math.floor(0.2 * horizon)
    length = int(rng.integers(3, max_len + 1))
    start = int(rng.integers(0, horizon - length + 1))
    p = float(rng.normal(ld, ld / 4.0))
    p = min(1.0, max(0.0, p))
    rest = math.floor(p * length + 0.5)  # round half-up
    c = MaxWConstraint(operator=operator, delta=length - rest, lo=start, hi=start + length)
    return c, rest, p


def generate_maxw(base: Instance, params: GenParams) -> Instance:
    """Append randomized workload constraints to a constraint-free base.

    Per operator, windows are drawn until their accumulated rest reaches
    ceil(gd * horizon); draws that round to zero rest are emitted as
    vacuous constraints but do not advance the accumulator.
    """
    if base.maxw:
        raise GenerationError(f"{base.name}: base instance already carries constraints")
    rng = make_rng(params.seed)
    target = math.ceil(params.gd * params.horizon - 1e-9)
    max_len = math.floor(0.2 * params.horizon)
    expected_per_draw = max(params.ld * (3 + max_len) / 2.0, 1e-9)
    draw_cap = max(10, math.ceil(10 * target / expected_per_draw))

    constraints = []
    for k in range(base.num_operators):
        accumulated = 0
        draws = 0
        while accumulated < target:
            if draws >= draw_cap:
                raise GenerationError(
                    f"{base.name}: seed {params.seed} operator {k} needed more than "
                    f"{draw_cap} draws to reach {target} rest shifts"
                )
            c, rest, _ = draw_constraint(rng, k, params.horizon, params.ld)
            draws += 1
            constraints.append(c)
            accumulated += rest

    return validate_instance(
        {
            "name": base.name,
            "num_operators": base.num_operators,
            "jobs": [[(t.operator, t.duration) for t in job] for job in base.jobs],
            "maxw": [(c.operator, c.delta, c.lo, c.hi) for c in base.maxw]
            + [(c.operator, c.delta, c.lo, c.hi) for c in constraints],
        }
    )


def default_horizon(base: Instance) -> int:
    """Greedy makespan of the bare instance, floored at the generator minimum."""
    from .solver import initial_upper_bound

    ub, _, _ = initial_upper_bound(base, build_plan(base))
    return max(ub, 15)


def derive_seed(name: str, gd: float, ld: float, master_seed: int) -> int:
    digest = hashlib.sha256(f"{name}|{gd:.6f}|{ld:.6f}|{master_seed}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _density_tag(x: float) -> str:
    return f"{x:g}"


MANIFEST_FIELDS = ["instance", "gd", "ld", "seed", "num_constraints", "total_required_rest"]


def generate_suite(
    bases: Sequence[Instance],
    grid: Sequence[tuple[float, float]],
    master_seed: int,
    outdir: str | Path,
    horizon: int | None = None,
) -> Path:
    """Write one augmented instance per (base, density pair) plus a manifest.

    The per-instance seed is a stable hash of (base name, densities, master
    seed), so regeneration with the same master seed is byte-identical.
    Returns the manifest path.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for base in bases:
        h = horizon if horizon is not None else default_horizon(base)
        for gd, ld in grid:
            seed = derive_seed(base.name, gd, ld, master_seed)
            inst = generate_maxw(base, GenParams(gd=gd, ld=ld, seed=seed, horizon=h))
            fname = f"{base.name}_gd{_density_tag(gd)}_ld{_density_tag(ld)}.txt"
            (outdir / fname).write_text(format_instance_text(inst))
            rows.append(
                {
                    "instance": fname,
                    "gd": _density_tag(gd),
                    "ld": _density_tag(ld),
                    "seed": seed,
                    "num_constraints": len(inst.maxw),
                    "total_required_rest": sum(required_rest(c) for c in inst.maxw),
                }
            )
    manifest = outdir / "manifest.csv"
    with manifest.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    return manifest


def density_grid(values: Sequence[float]) -> list[tuple[float, float]]:
    return [(gd, ld) for gd in values for ld in values]
