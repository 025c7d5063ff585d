"""Repeated seeded trials over a problem x algorithm grid, persisted as CSV.

A results directory holds::

    results.csv            one row per (problem, algorithm, trial) cell
    traces/<cell>.csv      fe,best_objective per cell
    summary.csv            mean/std per (problem, algorithm)

Rows are appended as cells finish, so an interrupted batch resumes where it
stopped; the file is rewritten in plan order once the grid is complete.
"""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import yaml

from .core import ConfigError
from .engine import (
    ALGORITHMS,
    ControlParams,
    Fixed,
    MutationStrategy,
    RunConfig,
    TrialResult,
    run,
    with_labels,
)
from .problems import get_problem
from .stats import MissingDataError

log = logging.getLogger(__name__)

RESULT_COLUMNS = [
    "problem", "algorithm", "trial", "seed", "fe_used",
    "best_objective", "best_violation", "best_vector",
]


class PlanError(ConfigError):
    """Malformed experiment plan; the message names the offending key."""


@dataclass(frozen=True)
class AlgorithmSpec:
    """A named algorithm: a preset (``cde`` or ``de``) plus overrides."""

    name: str
    base: str = "cde"
    population_size: int = 100
    f: float | None = None
    cr: float | None = None
    strategy: str | None = None

    def config(self, budget: int, seed: int) -> RunConfig:
        if self.base not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.base!r}; choose from {sorted(ALGORITHMS)}")
        cfg = ALGORITHMS[self.base](budget, seed, population_size=self.population_size)
        params = cfg.params
        if self.f is not None or self.cr is not None:
            params = ControlParams(
                f=Fixed(self.f) if self.f is not None else params.f,
                cr=Fixed(self.cr) if self.cr is not None else params.cr,
            )
        strategy = MutationStrategy(self.strategy) if self.strategy else cfg.strategy
        return RunConfig(
            budget=budget, strategy=strategy, params=params,
            population_size=self.population_size, seed=seed,
        )


@dataclass(frozen=True)
class ExperimentPlan:
    """Problems x algorithms x trials with a budget rule.

    ``budget_rule`` is ``("fixed", FE)`` or ``("per_dimension", k)``, the
    latter giving ``k * D`` evaluations. Trial ``t`` runs with seed
    ``base_seed + t``.
    """

    problems: Sequence[str]
    algorithms: Sequence[AlgorithmSpec]
    trials: int = 30
    base_seed: int = 0
    budget_rule: tuple[str, int] = ("fixed", 10_000)

    def __post_init__(self):
        if self.trials < 1:
            raise PlanError("trials: must be a positive integer")
        kind, amount = self.budget_rule
        if kind not in ("fixed", "per_dimension") or int(amount) < 1:
            raise PlanError("budget: expected fixed or per_dimension with a positive value")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            raise PlanError("algorithms: duplicate algorithm names")

    def budget_for(self, problem: str) -> int:
        kind, amount = self.budget_rule
        if kind == "fixed":
            return int(amount)
        return int(amount) * get_problem(problem).dimension

    def cells(self) -> list[tuple[str, AlgorithmSpec, int]]:
        return [
            (p, a, t)
            for p in self.problems
            for a in self.algorithms
            for t in range(self.trials)
        ]

    def validate(self) -> None:
        """Resolve every name before any run starts."""
        for p in self.problems:
            get_problem(p)
            budget = self.budget_for(p)
            for a in self.algorithms:
                a.config(budget, self.base_seed)


def _parse_algorithm(entry) -> AlgorithmSpec:
    if isinstance(entry, str):
        return AlgorithmSpec(name=entry, base=entry)
    if isinstance(entry, Mapping) and "name" in entry:
        allowed = {"name", "base", "population_size", "f", "cr", "strategy"}
        extra = set(entry) - allowed
        if extra:
            raise PlanError(f"algorithms.{entry['name']}: unknown key {sorted(extra)[0]!r}")
        kw = dict(entry)
        kw.setdefault("base", kw["name"])
        return AlgorithmSpec(**kw)
    raise PlanError(f"algorithms: cannot parse entry {entry!r}")


def plan_from_dict(data: Mapping) -> ExperimentPlan:
    if not isinstance(data, Mapping):
        raise PlanError("plan: top level must be a key/value mapping")
    known = {"problems", "algorithms", "trials", "base_seed", "seed", "budget"}
    for key in data:
        if key not in known:
            raise PlanError(f"{key}: unknown plan key")
    for key in ("problems", "algorithms"):
        if not isinstance(data.get(key), list) or not data[key]:
            raise PlanError(f"{key}: expected a non-empty list")
    trials = data.get("trials", 30)
    if not isinstance(trials, int):
        raise PlanError("trials: expected an integer")
    seed = data.get("base_seed", data.get("seed"))
    if not isinstance(seed, int):
        raise PlanError("base_seed: a seed is required for reproducibility")
    budget = data.get("budget", {"fixed": 10_000})
    if not isinstance(budget, Mapping) or len(budget) != 1:
        raise PlanError("budget: expected {fixed: FE} or {per_dimension: k}")
    (kind, amount), = budget.items()
    if not isinstance(amount, int):
        raise PlanError(f"budget.{kind}: expected an integer")
    return ExperimentPlan(
        problems=[str(p) for p in data["problems"]],
        algorithms=[_parse_algorithm(a) for a in data["algorithms"]],
        trials=trials,
        base_seed=seed,
        budget_rule=(kind, amount),
    )


def load_plan(path: str | os.PathLike) -> ExperimentPlan:
    """Read a YAML plan file."""
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise PlanError(f"plan: not valid YAML ({exc})") from None
    return plan_from_dict(data)


# ---------------------------------------------------------------------------
# Records and persistence


@dataclass(frozen=True)
class ResultRecord:
    """One row of the raw results file."""

    problem: str
    algorithm: str
    trial: int
    seed: int
    fe_used: int
    best_objective: float
    best_violation: float
    best_vector: tuple[float, ...]
    trace: tuple[tuple[int, float], ...] = field(default=(), compare=False)

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.problem, self.algorithm, self.trial)

    @property
    def feasible(self) -> bool:
        return self.best_violation == 0.0

    @classmethod
    def from_trial(cls, r: TrialResult) -> "ResultRecord":
        return cls(
            problem=r.problem,
            algorithm=r.algorithm,
            trial=r.trial_index,
            seed=r.seed,
            fe_used=r.fe_used,
            best_objective=float(r.best_objective),
            best_violation=float(r.best_violation),
            best_vector=tuple(float(v) for v in r.best_vector),
            trace=tuple(r.trace.pairs()),
        )

    def row(self) -> list[str]:
        return [
            self.problem, self.algorithm, str(self.trial), str(self.seed), str(self.fe_used),
            repr(self.best_objective), repr(self.best_violation),
            ";".join(repr(v) for v in self.best_vector),
        ]

    @classmethod
    def from_row(cls, row: Mapping[str, str]) -> "ResultRecord":
        return cls(
            problem=row["problem"],
            algorithm=row["algorithm"],
            trial=int(row["trial"]),
            seed=int(row["seed"]),
            fe_used=int(row["fe_used"]),
            best_objective=float(row["best_objective"]),
            best_violation=float(row["best_violation"]),
            best_vector=tuple(float(v) for v in row["best_vector"].split(";") if v),
        )


def cell_filename(problem: str, algorithm: str, trial: int) -> str:
    return f"{problem.replace(':', '-')}__{algorithm}__{trial:03d}.csv"


def write_results(path: Path, records: Iterable[ResultRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in records:
            w.writerow(r.row())


def read_results(path: str | os.PathLike) -> list[ResultRecord]:
    path = Path(path)
    if path.is_dir():
        path = path / "results.csv"
    if not path.exists():
        return []
    with open(path, encoding="utf-8", newline="") as fh:
        return [ResultRecord.from_row(row) for row in csv.DictReader(fh)]


def write_trace(path: Path, trace: Sequence[tuple[int, float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fe", "best_objective"])
        for fe, best in trace:
            w.writerow([fe, repr(float(best))])


def read_trace(path: str | os.PathLike) -> list[tuple[int, float]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [(int(r["fe"]), float(r["best_objective"])) for r in csv.DictReader(fh)]


# ---------------------------------------------------------------------------
# Execution


def run_cell(problem: str, spec: AlgorithmSpec, trial: int, budget: int, base_seed: int) -> TrialResult:
    """Run one grid cell with seed ``base_seed + trial``."""
    seed = base_seed + trial
    result = run(get_problem(problem), spec.config(budget, seed))
    return with_labels(result, problem, spec.name, trial)


def execute(
    plan: ExperimentPlan,
    out_dir: str | os.PathLike | None = None,
    jobs: int = 1,
) -> list[ResultRecord]:
    """Run every cell of ``plan``; with ``out_dir``, persist and resume.

    Returns records in plan order (problem, then algorithm, then trial).
    """
    plan.validate()
    done: dict[tuple[str, str, int], ResultRecord] = {}
    results_path = traces_dir = None
    if out_dir is not None:
        out = Path(out_dir)
        traces_dir = out / "traces"
        traces_dir.mkdir(parents=True, exist_ok=True)
        results_path = out / "results.csv"
        wanted = {(p, a.name, t) for p, a, t in plan.cells()}
        for rec in read_results(results_path):
            trace_file = traces_dir / cell_filename(*rec.key)
            if rec.key in wanted and trace_file.exists():
                done[rec.key] = rec
        # Rewrite so that stale or partial rows never survive a resume.
        write_results(results_path, done.values())

    todo = [(p, a, t) for p, a, t in plan.cells() if (p, a.name, t) not in done]
    log.info("%d cells done, %d to run", len(done), len(todo))

    def store(result: TrialResult) -> None:
        rec = ResultRecord.from_trial(result)
        done[rec.key] = rec
        if results_path is not None:
            write_trace(traces_dir / cell_filename(*rec.key), rec.trace)
            with open(results_path, "a", encoding="utf-8", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerow(rec.row())

    args = [(p, a, t, plan.budget_for(p), plan.base_seed) for p, a, t in todo]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for result in pool.map(run_cell, *zip(*args)):
                store(result)
    else:
        for a in args:
            store(run_cell(*a))

    ordered = [done[(p, a.name, t)] for p, a, t in plan.cells()]
    if results_path is not None:
        write_results(results_path, ordered)
    return ordered


# ---------------------------------------------------------------------------
# Summaries


@dataclass(frozen=True)
class CellSummary:
    problem: str
    algorithm: str
    trials: int
    mean: float
    std: float
    feasible: int

    @property
    def all_feasible(self) -> bool:
        return self.feasible == self.trials


def summarize(results: Iterable, problem: str) -> dict[str, CellSummary]:
    """Sample mean and ``n-1`` standard deviation of best objectives per algorithm.

    Infeasible finals are included at their objective value; ``feasible``
    counts how many were feasible.
    """
    by_algo: dict[str, list] = {}
    for r in results:
        if r.problem == problem:
            by_algo.setdefault(r.algorithm, []).append(r)
    if not by_algo:
        raise MissingDataError(f"no results for problem {problem!r}")
    counts = {len(v) for v in by_algo.values()}
    if len(counts) != 1:
        raise ValueError(f"{problem}: algorithms have unequal trial counts {sorted(counts)}")
    out = {}
    for algo, rs in by_algo.items():
        values = np.array([r.best_objective for r in rs], dtype=float)
        std = float(values.std(ddof=1)) if values.size > 1 else 0.0
        feasible = sum(1 for r in rs if r.best_violation == 0.0)
        out[algo] = CellSummary(problem, algo, values.size, float(values.mean()), std, feasible)
    return out


def write_summary(path: Path, records: Sequence[ResultRecord]) -> list[CellSummary]:
    problems = list(dict.fromkeys(r.problem for r in records))
    rows = [s for p in problems for s in summarize(records, p).values()]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["problem", "algorithm", "trials", "mean", "std", "feasible"])
        for s in rows:
            w.writerow([s.problem, s.algorithm, s.trials, f"{s.mean:.6e}", f"{s.std:.6e}", s.feasible])
    return rows


def samples_by_problem(records: Iterable[ResultRecord]) -> dict[str, dict[str, list[float]]]:
    out: dict[str, dict[str, list[float]]] = {}
    for r in sorted(records, key=lambda r: r.trial):
        out.setdefault(r.problem, {}).setdefault(r.algorithm, []).append(r.best_objective)
    return out


def missing_cells(records: Sequence[ResultRecord]) -> list[tuple[str, str, int]]:
    """Cells absent from an otherwise rectangular problem x algorithm x trial grid."""
    problems = list(dict.fromkeys(r.problem for r in records))
    algorithms = list(dict.fromkeys(r.algorithm for r in records))
    trials = sorted({r.trial for r in records})
    have = {r.key for r in records}
    return [
        (p, a, t) for p in problems for a in algorithms for t in trials if (p, a, t) not in have
    ]

