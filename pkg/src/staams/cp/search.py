"""Depth-first backtracking search with phases, branch-and-bound, and restarts.

Branching is binary: try var == value, on failure remove the value and
continue.  Each improving incumbent tightens the objective upper bound,
which is re-applied after every backtrack and survives restarts, so the
search remains complete for both satisfaction and optimization queries.
"""

from __future__ import annotations

import enum
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .model import IntVar, Model, ModelError


def _luby_term(k: int) -> int:
    # L(k) = 2^(i-1) when k = 2^i - 1, else L(k - (2^i - 1)) for the largest
    # i with 2^i - 1 <= k; yields 1,1,2,1,1,2,4,1,1,2,1,1,2,4,8,...
    while True:
        i = 1
        while (1 << (i + 1)) - 1 <= k:
            i += 1
        if (1 << i) - 1 == k:
            return 1 << (i - 1)
        k -= (1 << i) - 1


def luby_restart_length(k: int, scale: int) -> int:
    """Failure budget before the k-th restart: scale times the k-th Luby term."""
    if k < 1 or scale < 1:
        raise ValueError("k and scale must be positive")
    return scale * _luby_term(k)


class VarOrder(enum.Enum):
    FIRST_UNBOUND = "first_unbound"
    MIN_DOMAIN = "min_domain"


class ValueOrder(enum.Enum):
    MIN = "min"
    RANDOM = "random"


@dataclass
class Phase:
    """One stage of the search: a variable group with its two heuristics."""
    name: str
    vars: Sequence[IntVar]
    var_order: VarOrder = VarOrder.FIRST_UNBOUND
    value_order: ValueOrder = ValueOrder.MIN


@dataclass
class LubyRestarts:
    """Restart on a Luby failure schedule; scope limits which phase's
    failures are counted (None counts all)."""
    scale: int = 100
    phase_scope: Optional[int] = None


@dataclass
class SearchStrategy:
    phases: list[Phase]
    restarts: Optional[LubyRestarts] = None
    seed: int = 0


@dataclass
class SolveBudget:
    """Solve limits; at least one must be finite."""
    wall_ms: Optional[float] = None
    failures: Optional[int] = None
    solutions: Optional[int] = None

    def __post_init__(self):
        if self.wall_ms is None and self.failures is None and self.solutions is None:
            raise ValueError("at least one budget limit must be set")


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNKNOWN = "unknown"  # budget exhausted with no solution


class Solution:
    """Snapshot of all variable values at a solution, with solve statistics."""

    __slots__ = ("values", "objective", "wall_ms", "failures")

    def __init__(self, values, objective, wall_ms, failures):
        self.values = values
        self.objective = objective
        self.wall_ms = wall_ms
        self.failures = failures

    def value(self, var: IntVar) -> int:
        return self.values[var.index]


@dataclass
class SolveResult:
    status: SolveStatus
    solutions: list[Solution] = field(default_factory=list)
    failures: int = 0
    restarts: int = 0
    wall_ms: float = 0.0

    @property
    def best(self) -> Optional[Solution]:
        return self.solutions[-1] if self.solutions else None


class _Decision:
    __slots__ = ("var", "value", "phase", "right_tried")

    def __init__(self, var, value, phase):
        self.var = var
        self.value = value
        self.phase = phase
        self.right_tried = False


def solve(model: Model,
          strategy: SearchStrategy,
          budget: SolveBudget,
          objective: Optional[IntVar] = None,
          on_solution: Optional[Callable[[Solution], None]] = None,
          on_restart: Optional[Callable[[int], None]] = None,
          on_decision: Optional[Callable[[IntVar, int, int], None]] = None,
          ) -> SolveResult:
    """Search the model, minimizing the objective if one is given.

    Emits each solution (improving solutions under an objective) through
    on_solution.  Deterministic for a fixed seed when budgeted by failures.
    """
    rng = random.Random(strategy.seed)
    t0 = time.monotonic()
    result = SolveResult(status=SolveStatus.UNKNOWN)
    deadline = None if budget.wall_ms is None else t0 + budget.wall_ms / 1000.0

    if model.depth != 0:
        raise ModelError("model is already inside a search")
    if model.inconsistent or not model.propagate():
        model.inconsistent = True
        result.status = SolveStatus.INFEASIBLE
        return result

    phases = strategy.phases
    decisions: list[_Decision] = []
    cap: Optional[int] = None          # objective must stay <= cap
    restart_index = 1
    fails_toward_restart = 0
    restart_budget = (strategy.restarts.scale * _luby_term(1)
                      if strategy.restarts else None)
    steps = 0
    out_of_budget = False
    exhausted = False

    def wall_ms() -> float:
        return (time.monotonic() - t0) * 1000.0

    def select():
        for pi, phase in enumerate(phases):
            if phase.var_order is VarOrder.FIRST_UNBOUND:
                for v in phase.vars:
                    if v.lo != v.hi:
                        return v, pi
            else:
                best = None
                for v in phase.vars:
                    if v.lo != v.hi and (best is None or v.size < best.size):
                        best = v
                if best is not None:
                    return best, pi
        for v in model.vars:               # safety net for channeled leftovers
            if v.lo != v.hi:
                return v, len(phases)
        return None, None

    def choose_value(var, phase_idx):
        if phase_idx < len(phases) and phases[phase_idx].value_order is ValueOrder.RANDOM:
            return var.random_value(rng)
        return var.lo

    def apply_cap() -> bool:
        if cap is None or objective is None:
            return True
        return objective.set_max(cap)

    def unwind_all():
        # decisions and pushed levels can be off by one mid-backtrack
        decisions.clear()
        while model.depth:
            model.pop_level()

    while True:
        steps += 1
        if steps % 64 == 0 and deadline is not None and time.monotonic() > deadline:
            out_of_budget = True
            break

        var, phase_idx = select()
        if var is None:
            # all variables fixed: a solution
            sol = Solution([v.lo for v in model.vars],
                           objective.lo if objective is not None else None,
                           wall_ms(), result.failures)
            result.solutions.append(sol)
            if on_solution is not None:
                on_solution(sol)
            if budget.solutions is not None and len(result.solutions) >= budget.solutions:
                out_of_budget = True
                break
            if objective is not None:
                cap = objective.lo - 1
            # leave this solution: backtrack to the most recent open decision
            retry = True
        else:
            value = choose_value(var, phase_idx)
            if on_decision is not None:
                on_decision(var, value, phase_idx)
            decisions.append(_Decision(var, value, phase_idx))
            model.push_level()
            ok = var.fix(value) and apply_cap() and model.propagate()
            retry = not ok

        while retry:
            if not decisions:
                exhausted = True
                break
            d = decisions[-1]
            model.pop_level()
            if d.right_tried:
                decisions.pop()
                # exhausting both branches of d is itself a failure at the parent
                continue
            # count the failure that brought us here
            result.failures += 1
            if budget.failures is not None and result.failures >= budget.failures:
                out_of_budget = True
                break
            if restart_budget is not None:
                scope = strategy.restarts.phase_scope
                if scope is None or (d.phase is not None and d.phase >= scope):
                    fails_toward_restart += 1
                if fails_toward_restart >= restart_budget:
                    unwind_all()
                    restart_index += 1
                    fails_toward_restart = 0
                    restart_budget = strategy.restarts.scale * _luby_term(restart_index)
                    result.restarts += 1
                    if on_restart is not None:
                        on_restart(restart_index)
                    if not apply_cap() or not model.propagate():
                        exhausted = True
                    retry = False
                    break
            d.right_tried = True
            model.push_level()
            if d.value == d.var.lo:
                ok = d.var.set_min(d.value + 1)
            elif d.value == d.var.hi:
                ok = d.var.set_max(d.value - 1)
            else:
                ok = d.var.remove_value(d.value)
            ok = ok and apply_cap() and model.propagate()
            retry = not ok

        if exhausted or out_of_budget:
            break

    unwind_all()
    result.wall_ms = wall_ms()

    if exhausted:
        if result.solutions:
            result.status = SolveStatus.OPTIMAL if objective is not None else SolveStatus.FEASIBLE
        else:
            result.status = SolveStatus.INFEASIBLE
    else:
        result.status = SolveStatus.FEASIBLE if result.solutions else SolveStatus.UNKNOWN
    return result
