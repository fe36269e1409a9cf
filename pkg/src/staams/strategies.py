"""Search strategies, the collision-ignoring relaxation, and the
fixed-order time-scaling baseline.

The phased strategy decides locations, then components, then connection
variables, horizons, configurations, and finally the time-scaling of the
waiting intervals.  Restarts follow a Luby schedule and only count
failures from the time-scaling phase; branch-and-bound cuts survive them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .cp import (
    LubyRestarts,
    Phase,
    SearchStrategy,
    SolveBudget,
    SolveResult,
    SolveStatus,
    ValueOrder,
    VarOrder,
    solve,
)
from .linker import AssembleOptions, StaamsInstance, assemble
from .motion import Workcell
from .plan import Plan, extract_plan
from .task import TaskModel

DEFAULT_LUBY_SCALE = 100

EVENT_SOLUTION = "solution"
EVENT_RESTART = "restart"
EVENT_OPTIMAL = "optimal-proof"
EVENT_EXHAUSTED = "budget-exhausted"


class InfeasibleTaskError(Exception):
    """Raised when an instance (or its relaxation) has no solution."""


@dataclass
class TraceRecord:
    wall_ms: float
    makespan: Optional[int]
    event: str


def phased_strategy(instance: StaamsInstance, seed: int = 0,
                    luby_scale: int = DEFAULT_LUBY_SCALE) -> SearchStrategy:
    """Six decision phases; random values for locations/components/configs,
    minimum values for connections, horizons, and interval starts."""
    phases = [
        Phase("locations", instance.location_vars,
              VarOrder.FIRST_UNBOUND, ValueOrder.RANDOM),
        Phase("components", instance.component_vars,
              VarOrder.FIRST_UNBOUND, ValueOrder.RANDOM),
        Phase("connections", instance.connection_vars,
              VarOrder.FIRST_UNBOUND, ValueOrder.MIN),
        Phase("horizons", instance.horizon_vars,
              VarOrder.FIRST_UNBOUND, ValueOrder.MIN),
        Phase("configurations", instance.config_vars,
              VarOrder.FIRST_UNBOUND, ValueOrder.RANDOM),
        Phase("intervals", instance.interval_vars,
              VarOrder.FIRST_UNBOUND, ValueOrder.MIN),
    ]
    restarts = LubyRestarts(scale=luby_scale, phase_scope=5)
    return SearchStrategy(phases=phases, restarts=restarts, seed=seed)


def baseline_strategy(instance: StaamsInstance, seed: int = 0,
                      luby_scale: int = DEFAULT_LUBY_SCALE) -> SearchStrategy:
    """General-purpose reference: one phase over every decision variable,
    minimum-domain variable selection, random values."""
    phase = Phase("all", instance.decision_vars(),
                  VarOrder.MIN_DOMAIN, ValueOrder.RANDOM)
    restarts = LubyRestarts(scale=luby_scale, phase_scope=None)
    return SearchStrategy(phases=[phase], restarts=restarts, seed=seed)


def time_scaling_strategy(instance: StaamsInstance, seed: int = 0,
                          luby_scale: int = DEFAULT_LUBY_SCALE) -> SearchStrategy:
    """Only the final phase: earliest feasible starts on a fixed structure."""
    phase = Phase("intervals", instance.interval_vars,
                  VarOrder.FIRST_UNBOUND, ValueOrder.MIN)
    return SearchStrategy(phases=[phase],
                          restarts=LubyRestarts(scale=luby_scale, phase_scope=None),
                          seed=seed)


def solve_instance(instance: StaamsInstance, strategy: SearchStrategy,
                   budget: SolveBudget) -> tuple[SolveResult, list[TraceRecord]]:
    """Minimize the makespan, recording a trace row per solution/restart and
    a terminal row for proofs and fruitless budget exhaustion."""
    trace: list[TraceRecord] = []
    incumbent: list[Optional[int]] = [None]

    def on_solution(sol):
        incumbent[0] = sol.objective
        trace.append(TraceRecord(sol.wall_ms, sol.objective, EVENT_SOLUTION))

    def on_restart(_k):
        trace.append(TraceRecord(0.0, incumbent[0], EVENT_RESTART))

    result = solve(instance.model, strategy, budget, objective=instance.makespan,
                   on_solution=on_solution, on_restart=on_restart)
    # restart rows get their wall time patched in order
    last = 0.0
    for rec in trace:
        if rec.event == EVENT_RESTART:
            rec.wall_ms = last
        else:
            last = rec.wall_ms
    if result.status is SolveStatus.OPTIMAL:
        trace.append(TraceRecord(result.wall_ms, incumbent[0], EVENT_OPTIMAL))
    elif result.status is SolveStatus.UNKNOWN:
        trace.append(TraceRecord(result.wall_ms, None, EVENT_EXHAUSTED))
    return result, trace


def relaxed_lower_bound(task: TaskModel, workcell: Workcell, budget: SolveBudget,
                        seed: int = 0, options: Optional[AssembleOptions] = None,
                        ) -> tuple[int, bool]:
    """Best makespan of the collision-ignoring relaxation and whether it was
    proved optimal.  A lower bound of the full problem when optimal."""
    base = options or AssembleOptions()
    relaxed = AssembleOptions(collisions=False,
                              evasive_slack=base.evasive_slack,
                              horizon_caps=base.horizon_caps,
                              time_ub=base.time_ub)
    instance = assemble(task, workcell, relaxed)
    if instance.inconsistent:
        raise InfeasibleTaskError("relaxation is infeasible, so the task is infeasible")
    result, _ = solve_instance(instance, phased_strategy(instance, seed), budget)
    if not result.solutions:
        if result.status is SolveStatus.INFEASIBLE:
            raise InfeasibleTaskError("relaxation is infeasible, so the task is infeasible")
        raise InfeasibleTaskError("relaxation found no solution within budget")
    return result.best.objective, result.status is SolveStatus.OPTIMAL


@dataclass
class FixedOrderOutcome:
    plan: Optional[Plan]
    trace: list[TraceRecord]
    result: SolveResult
    attempts: int


def fixed_order_baseline(task: TaskModel, workcell: Workcell, seed: int,
                         budget: SolveBudget,
                         options: Optional[AssembleOptions] = None,
                         retry_limit: int = 10) -> FixedOrderOutcome:
    """Draw a random component assignment and per-component OVC order, fix
    connections/locations/configurations accordingly, and solve only the
    time-scaling.  Infeasible draws are redrawn up to retry_limit times."""
    rng = random.Random(seed)
    attempts = 0
    while attempts < retry_limit:
        attempts += 1
        instance = assemble(task, workcell, options)
        if instance.inconsistent:
            raise InfeasibleTaskError("instance is infeasible at the root")
        ok = _fix_random_order(instance, rng)
        if not ok:
            continue
        strategy = time_scaling_strategy(instance, seed=rng.randrange(1 << 30))
        result, trace = solve_instance(instance, strategy, budget)
        if result.solutions:
            plan = extract_plan(instance, result.best)
            return FixedOrderOutcome(plan, trace, result, attempts)
        if result.status is SolveStatus.UNKNOWN:
            return FixedOrderOutcome(None, trace, result, attempts)
        # proven infeasible order: redraw
    raise InfeasibleTaskError(
        f"no feasible fixed order found in {retry_limit} draws")


def _fix_random_order(instance: StaamsInstance, rng: random.Random) -> bool:
    """Fix assignment, order, locations, and configurations at the root.
    Returns False when the draw is inconsistent."""
    model = instance.model
    workcell = instance.workcell

    by_comp: dict[str, list] = {c: [] for c in instance.component_ids}
    for ov in instance.ovcs:
        codes = list(ov.component.domain_values())
        code = codes[rng.randrange(len(codes))]
        comp = instance.component_ids[code]
        if not (ov.component.fix(code) and model.propagate()):
            return False
        by_comp[comp].append(ov)

    for comp in instance.component_ids:
        group = by_comp[comp]
        rng.shuffle(group)
        position = 2
        for ov in group:
            for x in ov.connections:
                if not (x.fix(position) and model.propagate()):
                    return False
                position += 1
        series = instance.series[comp]
        if not (series.horizon.fix(min(position - 1, series.m)) and model.propagate()):
            return False

    for ov in instance.ovcs:
        comp = instance.component_ids[ov.component.value()]
        rm = workcell.roadmaps[comp]
        for j, slot in enumerate(ov.spec.slots):
            loc_var = ov.locations[j]
            cands = [l for l in list(loc_var.domain_values())
                     if workcell.reachable_nodes(comp, instance.location_ids[l])]
            if not cands:
                return False
            loc = cands[rng.randrange(len(cands))]
            if not (loc_var.fix(loc) and model.propagate()):
                return False
            nodes = workcell.reachable_nodes(comp, instance.location_ids[loc])
            codes = [rm.code(n) for n in nodes]
            position = ov.connections[j].value()
            config = series_config(instance, comp, position)
            codes = [c for c in codes if config.contains(c)]
            if not codes:
                return False
            if not (config.fix(codes[rng.randrange(len(codes))]) and model.propagate()):
                return False
        for p in ov.actions:
            vals = list(p.domain_values())
            if not (p.fix(vals[rng.randrange(len(vals))]) and model.propagate()):
                return False
    return True


def series_config(instance: StaamsInstance, comp: str, position: int):
    return instance.series[comp].configs[position - 1]
