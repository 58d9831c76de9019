"""Preemptive job-shop scheduling under maximum-workload constraints."""

from .checker import CheckReport, brute_force_optimum, check_schedule
from .gen import GenParams, generate_maxw, generate_suite
from .jps import ShiftSchedule, WindowedTask, build_jps, check_horn, reconstruct
from .lazy import solve_iterative
from .model import (
    Instance,
    InstanceError,
    MaxWConstraint,
    Subinterval,
    SubintervalPlan,
    Task,
    build_plan,
    load_instance,
    partition_subintervals,
    required_rest,
    rest_upper_bound,
    save_instance,
    validate_instance,
)
from .solver import SolveOutcome, WindowSolution, initial_upper_bound, minimize_makespan

__version__ = "0.1.0"

__all__ = [
    "CheckReport",
    "GenParams",
    "Instance",
    "InstanceError",
    "MaxWConstraint",
    "ShiftSchedule",
    "SolveOutcome",
    "Subinterval",
    "SubintervalPlan",
    "Task",
    "WindowSolution",
    "WindowedTask",
    "brute_force_optimum",
    "build_jps",
    "build_plan",
    "check_horn",
    "check_schedule",
    "generate_maxw",
    "generate_suite",
    "initial_upper_bound",
    "load_instance",
    "minimize_makespan",
    "partition_subintervals",
    "reconstruct",
    "required_rest",
    "rest_upper_bound",
    "save_instance",
    "solve_iterative",
    "validate_instance",
]
