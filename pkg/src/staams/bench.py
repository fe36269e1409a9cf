"""Benchmark sweeps: seed x size grids with per-instance lower bounds,
aggregate CSV emission, and trace CSV writing."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

from .cp import SolveBudget
from .linker import AssembleOptions, assemble
from .motion import load_workcell
from .scenarios import generate_sorting_scenario
from .strategies import (
    TraceRecord,
    baseline_strategy,
    phased_strategy,
    relaxed_lower_bound,
    solve_instance,
)
from .task import load_task

BENCHMARK_HEADER = ("n_objects,seed,strategy,first_makespan_ms,best_makespan_ms,"
                    "lower_bound_ms,first_norm,best_norm,first_time_ms,budget_ms")

TRACE_HEADER = "wall_ms,makespan_ms,event"


@dataclass
class BenchRecord:
    n_objects: int
    seed: int
    strategy: str
    first_makespan: Optional[int]
    best_makespan: Optional[int]
    lower_bound: Optional[int]
    first_time_ms: Optional[float]
    budget_ms: float

    def row(self) -> list[str]:
        def num(x):
            return "" if x is None else str(x)

        def norm(x):
            if x is None or not self.lower_bound:
                return ""
            return f"{x / self.lower_bound:.4f}"

        return [str(self.n_objects), str(self.seed), self.strategy,
                num(self.first_makespan), num(self.best_makespan),
                num(self.lower_bound), norm(self.first_makespan),
                norm(self.best_makespan),
                "" if self.first_time_ms is None else f"{self.first_time_ms:.1f}",
                f"{self.budget_ms:.0f}"]


def emit_benchmark(records: list[BenchRecord], path: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCHMARK_HEADER.split(","))
        for rec in records:
            writer.writerow(rec.row())


def write_trace(trace: list[TraceRecord], path: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER.split(","))
        for rec in trace:
            writer.writerow([f"{rec.wall_ms:.1f}",
                             "" if rec.makespan is None else str(rec.makespan),
                             rec.event])


def run_sorting_trial(n: int, conflict: float, seed: int, strategy_name: str,
                      budget: SolveBudget, lb_budget: Optional[SolveBudget] = None,
                      options: Optional[AssembleOptions] = None) -> BenchRecord:
    """One generated instance: relaxation bound, then the full solve."""
    wc_doc, task_doc = generate_sorting_scenario(n, conflict, seed)
    workcell = load_workcell(wc_doc)
    task = load_task(task_doc)

    lower_bound = None
    try:
        lower_bound, _optimal = relaxed_lower_bound(
            task, workcell, lb_budget or budget, seed=seed, options=options)
    except Exception:
        lower_bound = None

    instance = assemble(task, workcell, options)
    strat = (phased_strategy(instance, seed) if strategy_name == "phased"
             else baseline_strategy(instance, seed))
    result, trace = solve_instance(instance, strat, budget)
    first = result.solutions[0] if result.solutions else None
    best = result.best
    return BenchRecord(
        n_objects=n, seed=seed, strategy=strategy_name,
        first_makespan=None if first is None else first.objective,
        best_makespan=None if best is None else best.objective,
        lower_bound=lower_bound,
        first_time_ms=None if first is None else first.wall_ms,
        budget_ms=budget.wall_ms if budget.wall_ms is not None else 0.0)
