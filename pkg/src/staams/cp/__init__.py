"""Finite-domain constraint engine: model, propagators, and search."""

from .model import Constraint, IntervalVar, IntVar, Model, ModelError
from .search import (
    LubyRestarts,
    Phase,
    SearchStrategy,
    Solution,
    SolveBudget,
    SolveResult,
    SolveStatus,
    ValueOrder,
    VarOrder,
    luby_restart_length,
    solve,
)

__all__ = [
    "Constraint",
    "IntervalVar",
    "IntVar",
    "LubyRestarts",
    "Model",
    "ModelError",
    "Phase",
    "SearchStrategy",
    "Solution",
    "SolveBudget",
    "SolveResult",
    "SolveStatus",
    "ValueOrder",
    "VarOrder",
    "luby_restart_length",
    "solve",
]
