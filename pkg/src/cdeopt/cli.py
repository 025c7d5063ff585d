"""Command-line front end: ``cdeopt {run,experiment,compare,list-problems}``.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import experiments as ex
from .core import ConfigError
from .engine import ALGORITHMS, run
from .problems import CLASSICAL, ENGINEERING, get_problem, problem_names
from .stats import build_report

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _timestamp_line(args) -> str:
    if args.no_timestamp:
        return ""
    now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    return f"# generated {now}\n"


def _resolve_problem(name: str):
    try:
        return get_problem(name)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def _resolve_algorithm(name: str) -> ex.AlgorithmSpec:
    if name not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {name!r}; valid names: {', '.join(sorted(ALGORITHMS))}")
    return ex.AlgorithmSpec(name=name, base=name)


def cmd_run(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for run")
    problem = _resolve_problem(args.problem)
    spec = _resolve_algorithm(args.algo)
    budget = args.budget if args.budget is not None else 10_000
    spec = ex.AlgorithmSpec(name=spec.name, base=spec.base, population_size=args.population)
    try:
        cfg = spec.config(budget, args.seed)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    result = run(problem, cfg)
    feasible = result.best_violation == 0.0
    if args.trace:
        ex.write_trace(Path(args.trace), result.trace.pairs())
    if args.json:
        print(json.dumps({
            "problem": problem.name,
            "algorithm": spec.name,
            "seed": args.seed,
            "fe_used": result.fe_used,
            "best_objective": result.best_objective,
            "best_violation": result.best_violation,
            "feasible": feasible,
            "best_vector": result.best_vector.tolist(),
            "initial_best": float(result.trace.best_objective[0]),
        }))
    else:
        print(f"problem:        {problem.name}")
        print(f"algorithm:      {spec.name}")
        print(f"best objective: {result.best_objective:.10g} ({'feasible' if feasible else f'infeasible, violation {result.best_violation:.3g}'})")
        print(f"best vector:    {np.array2string(result.best_vector, precision=8, separator=', ')}")
        print(f"fe used:        {result.fe_used}")
    return EXIT_OK


def _find_plan(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    bundled = resources.files("cdeopt") / "plans" / p.name
    if bundled.is_file():
        return Path(str(bundled))
    raise UsageError(f"plan file {path!r} not found")


def _load_plan(args) -> ex.ExperimentPlan:
    path = _find_plan(args.plan)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise UsageError(f"plan: not valid YAML ({exc})") from None
    if not isinstance(data, dict):
        raise UsageError("plan: top level must be a key/value mapping")
    data["base_seed"] = args.seed
    data.pop("seed", None)
    if args.budget is not None:
        data["budget"] = {"fixed": args.budget}
    try:
        plan = ex.plan_from_dict(data)
        plan.validate()
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    return plan


def write_convergence(out: Path, records) -> None:
    """Mean best-so-far per FE checkpoint, one file per problem, one column per algorithm."""
    conv_dir = out / "convergence"
    conv_dir.mkdir(exist_ok=True)
    traces: dict[str, dict[str, list]] = {}
    for r in records:
        trace = ex.read_trace(out / "traces" / ex.cell_filename(*r.key))
        traces.setdefault(r.problem, {}).setdefault(r.algorithm, []).append(trace)
    for problem, by_algo in traces.items():
        algos = list(by_algo)
        columns = {}
        fes: set[int] = set()
        for algo, runs in by_algo.items():
            per_fe: dict[int, list[float]] = {}
            for trace in runs:
                for fe, best in trace:
                    per_fe.setdefault(fe, []).append(best)
            columns[algo] = {fe: float(np.mean(v)) for fe, v in per_fe.items() if len(v) == len(runs)}
            fes |= set(columns[algo])
        with open(conv_dir / f"{problem.replace(':', '-')}.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["fe"] + algos)
            for fe in sorted(fes):
                w.writerow([fe] + [repr(columns[a][fe]) if fe in columns[a] else "" for a in algos])


def cmd_experiment(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for experiment")
    plan = _load_plan(args)
    out = Path(args.out)
    records = ex.execute(plan, out, jobs=args.jobs)
    summaries = ex.write_summary(out / "summary.csv", records)
    write_convergence(out, records)
    lines = [f"{'problem':<14}{'algorithm':<12}{'mean':>14}{'std':>14}  feasible"]
    for s in summaries:
        lines.append(f"{s.problem:<14}{s.algorithm:<12}{s.mean:>14.6e}{s.std:>14.6e}  {s.feasible}/{s.trials}")
    text = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(_timestamp_line(args) + text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def cmd_compare(args) -> int:
    if not 0 < args.alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    results_dir = Path(args.results_dir)
    records = ex.read_results(results_dir)
    if not records:
        raise UsageError(f"no results found in {results_dir}")
    algorithms = {r.algorithm for r in records}
    if args.reference not in algorithms:
        raise UsageError(f"reference {args.reference!r} not in results; have {sorted(algorithms)}")
    missing = ex.missing_cells(records)
    if missing:
        listing = "\n".join(f"  {p},{a},{t}" for p, a, t in missing)
        print(f"incomplete result grid, missing cells:\n{listing}", file=sys.stderr)
        return EXIT_RUNTIME
    report = build_report(args.reference, ex.samples_by_problem(records), args.alpha)
    out = Path(args.out) if args.out else results_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    text = report.to_text()
    (out / "report.txt").write_text(_timestamp_line(args) + text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def cmd_list_problems(args) -> int:
    for name in ENGINEERING:
        p = get_problem(name)
        print(f"{name:<12} D={p.dimension:<3} constraints={len(p.constraints)}  known_best={p.known_best}")
    for name in CLASSICAL:
        print(f"{name + ':D':<12} unconstrained, any D >= 1, known_best=0")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="base random seed (required for run and experiment)")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header in text outputs")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="cdeopt", description="Competitive differential evolution experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", parents=[common], help="single optimization run")
    p.add_argument("--problem", required=True, help=f"one of: {', '.join(problem_names())}")
    p.add_argument("--algo", default="cde", help=f"one of: {', '.join(sorted(ALGORITHMS))}")
    p.add_argument("--budget", type=int, help="maximum fitness evaluations (default 10000)")
    p.add_argument("--population", type=int, default=100)
    p.add_argument("--trace", metavar="FILE", help="write fe,best_objective trace CSV")
    p.add_argument("--json", action="store_true", help="print a single-line JSON summary")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", parents=[common], help="run an experiment plan")
    p.add_argument("plan", help="plan file (YAML); bundled: engineering.plan, classical.plan")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--budget", type=int, help="override with a fixed FE budget")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("compare", parents=[common], help="statistical comparison of results")
    p.add_argument("results_dir")
    p.add_argument("--reference", default="cde")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", metavar="DIR", help="report directory (default: results_dir)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("list-problems", parents=[common], help="show the problem registry")
    p.set_defaults(func=cmd_list_problems)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"cdeopt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"cdeopt: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
