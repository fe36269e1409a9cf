"""Command-line workbench: solve, validate, generate, benchmark.

Exit codes: 0 on success/valid plan, 1 on infeasible instances or invalid
plans, 2 on input errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bench import BenchRecord, emit_benchmark, run_sorting_trial, write_trace
from .cp import SolveBudget, SolveStatus
from .linker import AssembleOptions, AssemblyError, assemble
from .motion import WorkcellError, load_workcell
from .plan import Plan, extract_plan
from .scenarios import dump_documents, generate_sorting_scenario
from .strategies import (
    InfeasibleTaskError,
    baseline_strategy,
    phased_strategy,
    relaxed_lower_bound,
    solve_instance,
)
from .task import TaskError, load_task
from .validate import validate_plan

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INPUT = 2


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise SystemExit(_input_error(f"cannot read {path}"))
    except json.JSONDecodeError as exc:
        raise SystemExit(_input_error(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}"))


def _input_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INPUT


def _budget_from_args(args) -> SolveBudget:
    return SolveBudget(
        wall_ms=args.budget_ms,
        failures=getattr(args, "budget_failures", None),
        solutions=getattr(args, "solution_limit", None))


def _options_from_args(args) -> AssembleOptions:
    return AssembleOptions(
        collisions=not getattr(args, "no_collisions", False),
        evasive_slack=getattr(args, "slack", 2))


def cmd_solve(args) -> int:
    try:
        workcell = load_workcell(_load_json(args.workcell))
        task = load_task(_load_json(args.task))
    except (WorkcellError, TaskError) as exc:
        return _input_error(str(exc))

    budget = _budget_from_args(args)
    options = _options_from_args(args)

    if args.lower_bound:
        try:
            bound, optimal = relaxed_lower_bound(task, workcell, budget,
                                                 seed=args.seed, options=options)
        except InfeasibleTaskError as exc:
            print(f"infeasible: {exc}")
            return EXIT_INFEASIBLE
        print(f"lower_bound_ms={bound}")
        print(f"optimal={'true' if optimal else 'false'}")
        return EXIT_OK

    try:
        instance = assemble(task, workcell, options)
    except AssemblyError as exc:
        return _input_error(str(exc))
    if instance.inconsistent:
        print("infeasible: root propagation failed")
        return EXIT_INFEASIBLE

    strat = (phased_strategy(instance, args.seed) if args.strategy == "phased"
             else baseline_strategy(instance, args.seed))
    result, trace = solve_instance(instance, strat, budget)

    if args.trace:
        write_trace(trace, args.trace)
    print(f"status={result.status.value}")
    print(f"failures={result.failures}")
    print(f"restarts={result.restarts}")
    if result.best is not None:
        print(f"makespan_ms={result.best.objective}")
        if args.plan:
            extract_plan(instance, result.best).dump(args.plan)
        return EXIT_OK
    if result.status is SolveStatus.INFEASIBLE:
        print("infeasible: proven")
    else:
        print("no solution found within budget")
    return EXIT_INFEASIBLE


def cmd_validate(args) -> int:
    try:
        workcell = load_workcell(_load_json(args.workcell))
        task = load_task(_load_json(args.task))
    except (WorkcellError, TaskError) as exc:
        return _input_error(str(exc))
    plan = Plan.from_document(_load_json(args.plan))
    report = validate_plan(workcell, task, plan)
    print(f"status={report.status}")
    for v in report.violations:
        print(f"{v.kind}: {v.details}")
    return EXIT_OK if report.ok else EXIT_INFEASIBLE


def cmd_gen_sorting(args) -> int:
    try:
        workcell, task = generate_sorting_scenario(args.objects, args.conflict,
                                                   args.seed)
    except ValueError as exc:
        return _input_error(str(exc))
    wc_path = args.workcell or f"{args.prefix}_workcell.json"
    task_path = args.task or f"{args.prefix}_task.json"
    dump_documents(workcell, task, wc_path, task_path)
    print(f"wrote {wc_path}")
    print(f"wrote {task_path}")
    return EXIT_OK


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    strategies = ["phased", "baseline"] if args.strategy == "both" else [args.strategy]
    budget = SolveBudget(wall_ms=args.budget_ms, failures=args.budget_failures)
    records: list[BenchRecord] = []
    for n in sizes:
        for seed in range(args.seeds):
            for strat in strategies:
                rec = run_sorting_trial(n, args.conflict, seed, strat, budget)
                records.append(rec)
                print(f"n={n} seed={seed} strategy={strat} "
                      f"best={rec.best_makespan} lb={rec.lower_bound}")
    emit_benchmark(records, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="staams",
        description="Constraint-based task allocation and motion scheduling")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a task on a workcell")
    p.add_argument("--workcell", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--strategy", choices=["phased", "baseline"], default="phased")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-ms", type=float, default=10_000.0)
    p.add_argument("--budget-failures", type=int, default=None)
    p.add_argument("--solution-limit", type=int, default=None)
    p.add_argument("--trace", help="write a trace CSV")
    p.add_argument("--plan", help="write the best plan as JSON")
    p.add_argument("--no-collisions", action="store_true",
                   help="drop collision constraints (relaxation)")
    p.add_argument("--lower-bound", action="store_true",
                   help="solve the collision-ignoring relaxation and report its bound")
    p.add_argument("--slack", type=int, default=2,
                   help="extra series positions for evasive movements")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="validate a plan against its documents")
    p.add_argument("--workcell", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen-sorting", help="generate a sorting scenario")
    p.add_argument("--objects", type=int, required=True)
    p.add_argument("--conflict", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prefix", default="sorting")
    p.add_argument("--workcell", help="explicit workcell output path")
    p.add_argument("--task", help="explicit task output path")
    p.set_defaults(func=cmd_gen_sorting)

    p = sub.add_parser("bench", help="run seed sweeps and emit aggregate CSV")
    p.add_argument("--sizes", default="12,20")
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--conflict", type=float, default=0.5)
    p.add_argument("--strategy", choices=["phased", "baseline", "both"],
                   default="phased")
    p.add_argument("--budget-ms", type=float, default=10_000.0)
    p.add_argument("--budget-failures", type=int, default=None)
    p.add_argument("--out", default="benchmark.csv")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
