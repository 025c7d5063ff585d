"""Differential evolution main loop and its variation operators.

Classic DE (``rand_1``, ``cur_1``, ``best_1``) and competitive DE
(``winner_to_best_1``) share one generational loop: mutate every slot
against the frozen generation-``t`` population, clamp the mutant into the
box, apply binomial crossover, evaluate, then replace parents greedily.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .core import (
    BudgetExhausted,
    ConfigError,
    Evaluation,
    Individual,
    Ordering,
    Population,
    RngStream,
    compare_fitness,
    repair_to_bounds,
    sample_truncated_normal,
)
from .problems import EvaluationBudget, Problem, evaluate


class MutationStrategy(str, enum.Enum):
    RAND_1 = "rand_1"
    CUR_1 = "cur_1"
    BEST_1 = "best_1"
    WINNER_TO_BEST_1 = "winner_to_best_1"


CLASSIC_STRATEGIES = (MutationStrategy.RAND_1, MutationStrategy.CUR_1, MutationStrategy.BEST_1)


@dataclass(frozen=True)
class Fixed:
    value: float


@dataclass(frozen=True)
class Sampled:
    """Normal ``N(mu, sigma)`` draw, taken afresh per individual per generation."""

    mu: float = 0.5
    sigma: float = 0.3


@dataclass(frozen=True)
class ControlParams:
    """Scale factor and crossover-rate settings.

    ``per_dimension`` draws a separate sampled scale factor for each
    component instead of one per mutant vector.
    """

    f: Fixed | Sampled = Sampled()
    cr: Fixed | Sampled = Sampled()
    per_dimension: bool = False

    def __post_init__(self):
        if isinstance(self.f, Fixed) and not 0 < self.f.value <= 2:
            raise ConfigError(f"fixed F must lie in (0, 2], got {self.f.value}")
        if isinstance(self.cr, Fixed) and not 0 <= self.cr.value <= 1:
            raise ConfigError(f"fixed Cr must lie in [0, 1], got {self.cr.value}")
        for mode in (self.f, self.cr):
            if isinstance(mode, Sampled) and mode.sigma <= 0:
                raise ConfigError("sampled sigma must be positive")


@dataclass(frozen=True)
class RunConfig:
    budget: int
    strategy: MutationStrategy = MutationStrategy.WINNER_TO_BEST_1
    params: ControlParams = ControlParams()
    population_size: int = 100
    seed: int = 0
    trace_checkpoints: Sequence[int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "strategy", MutationStrategy(self.strategy))
        if self.population_size < 4:
            raise ConfigError("population size must be at least 4")
        if self.budget < self.population_size:
            raise ConfigError("budget must cover at least the initial population")


def cde_config(budget: int, seed: int = 0, **kw) -> RunConfig:
    """Competitive DE: winner-to-best/1 with F1, F2, Cr ~ N(0.5, 0.3)."""
    return RunConfig(budget=budget, seed=seed, **kw)


def de_config(budget: int, seed: int = 0, **kw) -> RunConfig:
    """Baseline DE/rand/1/bin with F = 0.5 and Cr = 0.8."""
    return RunConfig(
        budget=budget,
        seed=seed,
        strategy=MutationStrategy.RAND_1,
        params=ControlParams(f=Fixed(0.5), cr=Fixed(0.8)),
        **kw,
    )


ALGORITHMS = {"cde": cde_config, "de": de_config}


@dataclass(frozen=True)
class ConvergenceTrace:
    """Best-so-far objective (and violation) sampled at FE checkpoints."""

    fe: np.ndarray
    best_objective: np.ndarray
    best_violation: np.ndarray

    def __len__(self) -> int:
        return len(self.fe)

    def pairs(self) -> list[tuple[int, float]]:
        return [(int(a), float(b)) for a, b in zip(self.fe, self.best_objective)]


@dataclass(frozen=True)
class TrialResult:
    best: Individual
    trace: ConvergenceTrace
    fe_used: int
    seed: int
    problem: str = ""
    algorithm: str = ""
    trial_index: int = 0

    @property
    def best_objective(self) -> float:
        return self.best.eval.objective

    @property
    def best_violation(self) -> float:
        return self.best.eval.violation

    @property
    def best_vector(self) -> np.ndarray:
        return self.best.vector


# ---------------------------------------------------------------------------
# Operators


def draw_distinct(rng: RngStream, n: int, k: int, exclude: Sequence[int] = ()) -> list[int]:
    """Draw ``k`` mutually distinct indices from ``range(n)`` avoiding ``exclude``.

    Each index is drawn uniformly with rejection, so the RNG consumption
    depends only on the draws themselves.
    """
    if n - len(set(exclude)) < k:
        raise ConfigError(f"cannot draw {k} distinct indices from {n} excluding {len(set(exclude))}")
    taken = set(exclude)
    out = []
    while len(out) < k:
        r = rng.integers(0, n)
        if r not in taken:
            taken.add(r)
            out.append(r)
    return out


def initialize(p: Problem, cfg: RunConfig, rng: RngStream, budget: EvaluationBudget) -> Population:
    """Uniform random population in the box, fully evaluated."""
    n = cfg.population_size
    if budget.remaining < n:
        raise BudgetExhausted(f"budget of {budget.max_fe} cannot cover {n} initial evaluations")
    lb, width = p.bounds.lower, p.bounds.width
    x = np.empty((n, p.dimension))
    for i in range(n):
        x[i] = rng.uniform(p.dimension) * width + lb
    evals = [evaluate(p, x[i], budget) for i in range(n)]
    return Population(x, evals, generation=0)


def mutate_classic(
    pop: Population,
    i: int,
    kind: MutationStrategy | str,
    F,
    rng: RngStream,
    best: int | None = None,
) -> np.ndarray:
    """DE/rand/1, DE/cur/1 or DE/best/1 mutant for slot ``i`` (not repaired).

    ``best`` is the generation's best index; it is computed when omitted.
    """
    kind = MutationStrategy(kind)
    if pop.size < 4:
        raise ConfigError("mutation requires a population of at least 4")
    x = pop.x
    if kind is MutationStrategy.RAND_1:
        r1, r2, r3 = draw_distinct(rng, pop.size, 3, (i,))
        return x[r1] + F * (x[r2] - x[r3])
    r1, r2 = draw_distinct(rng, pop.size, 2, (i,))
    if kind is MutationStrategy.CUR_1:
        return x[i] + F * (x[r1] - x[r2])
    if kind is MutationStrategy.BEST_1:
        if best is None:
            best = pop.best_index()
        return x[best] + F * (x[r1] - x[r2])
    raise ConfigError(f"{kind.value} is not a classic mutation scheme")


def mutate_winner_to_best(
    pop: Population,
    i: int,
    F1,
    F2,
    rng: RngStream,
    best: int | None = None,
) -> np.ndarray:
    """DE/winner-to-best/1 mutant for slot ``i`` (not repaired).

    A random competitor ``r1`` challenges ``x_i``; the strictly better of the
    two becomes the base vector (the incumbent keeps ties). The base is then
    pulled toward the best member and perturbed by a random difference of
    two further members.
    """
    if pop.size < 4:
        raise ConfigError("mutation requires a population of at least 4")
    if best is None:
        best = pop.best_index()
    x = pop.x
    (r1,) = draw_distinct(rng, pop.size, 1, (i,))
    if compare_fitness(pop.evals[r1], pop.evals[i]) is Ordering.A_BETTER:
        base = x[r1]
    else:
        base = x[i]
    r2, r3 = draw_distinct(rng, pop.size, 2, (i, r1))
    return base + F1 * (x[best] - base) + F2 * (x[r2] - x[r3])


def crossover_binomial(target, mutant, cr: float, rng: RngStream) -> np.ndarray:
    """Take each gene from ``mutant`` with probability ``cr``; one gene always."""
    target = np.asarray(target, dtype=float)
    mutant = np.asarray(mutant, dtype=float)
    if target.shape != mutant.shape:
        raise ConfigError("target and mutant differ in dimension")
    d = target.shape[0]
    j_rand = rng.integers(0, d)
    mask = rng.uniform(d) <= cr
    mask[j_rand] = True
    return np.where(mask, mutant, target)


def select_greedy(parent: Individual, trial: Individual) -> Individual:
    """Keep the trial unless the parent is strictly better."""
    if compare_fitness(parent.eval, trial.eval) is Ordering.A_BETTER:
        return parent
    return trial


# ---------------------------------------------------------------------------
# Main loop


def _draw_scale(mode, rng: RngStream, size: int | None):
    if isinstance(mode, Fixed):
        return mode.value
    if size is None:
        return sample_truncated_normal(rng, mode.mu, mode.sigma, 0.0, 1.0)
    return np.array([sample_truncated_normal(rng, mode.mu, mode.sigma, 0.0, 1.0) for _ in range(size)])


def _draw_cr(mode, rng: RngStream) -> float:
    if isinstance(mode, Fixed):
        return mode.value
    return min(1.0, max(0.0, rng.normal(mode.mu, mode.sigma)))


def make_trial(p: Problem, pop: Population, i: int, best: int, cfg: RunConfig, rng: RngStream) -> np.ndarray:
    """Mutant, bound repair and crossover for one slot; no evaluation."""
    params = cfg.params
    size = p.dimension if params.per_dimension else None
    if cfg.strategy is MutationStrategy.WINNER_TO_BEST_1:
        f1 = _draw_scale(params.f, rng, size)
        f2 = _draw_scale(params.f, rng, size)
        mutant = mutate_winner_to_best(pop, i, f1, f2, rng, best)
    else:
        f = _draw_scale(params.f, rng, size)
        mutant = mutate_classic(pop, i, cfg.strategy, f, rng, best)
    cr = _draw_cr(params.cr, rng)
    return crossover_binomial(pop.x[i], repair_to_bounds(mutant, p.bounds), cr, rng)


def step(p: Problem, pop: Population, cfg: RunConfig, rng: RngStream, budget: EvaluationBudget) -> Population:
    """Advance ``pop`` by one full generation, spending ``N`` evaluations."""
    best = pop.best_index()
    n = pop.size
    trials = np.empty_like(pop.x)
    trial_evals: list[Evaluation] = []
    for i in range(n):
        trials[i] = make_trial(p, pop, i, best, cfg, rng)
        trial_evals.append(evaluate(p, trials[i], budget))
    new_x = np.empty_like(pop.x)
    new_evals = []
    for i in range(n):
        parent = Individual(pop.x[i], pop.evals[i])
        survivor = select_greedy(parent, Individual(trials[i], trial_evals[i]))
        new_x[i] = survivor.vector
        new_evals.append(survivor.eval)
    return Population(new_x, new_evals, pop.generation + 1)


def _sample_trace(fe, obj, viol, checkpoints) -> ConvergenceTrace:
    fe = np.asarray(fe, dtype=np.int64)
    obj = np.asarray(obj, dtype=float)
    viol = np.asarray(viol, dtype=float)
    if checkpoints is None:
        return ConvergenceTrace(fe, obj, viol)
    cps = sorted({int(c) for c in checkpoints if c >= fe[0]} | {int(fe[-1])})
    cps = [c for c in cps if c <= fe[-1]]
    idx = np.searchsorted(fe, cps, side="right") - 1
    return ConvergenceTrace(np.asarray(cps, dtype=np.int64), obj[idx], viol[idx])


def run(p: Problem, cfg: RunConfig) -> TrialResult:
    """One seeded optimization run of ``cfg`` on ``p``.

    Stops before any generation that would not fit into the remaining
    budget, so ``fe_used`` is always ``N * (generations + 1)``. The trace
    has one point per generation unless ``cfg.trace_checkpoints`` is given.
    """
    rng = RngStream(cfg.seed)
    budget = EvaluationBudget(cfg.budget)
    pop = initialize(p, cfg, rng, budget)
    best = pop.best_index()
    fe_hist = [budget.used_fe]
    obj_hist = [pop.evals[best].objective]
    viol_hist = [pop.evals[best].violation]
    try:
        while budget.remaining >= pop.size:
            pop = step(p, pop, cfg, rng, budget)
            best = pop.best_index()
            fe_hist.append(budget.used_fe)
            obj_hist.append(pop.evals[best].objective)
            viol_hist.append(pop.evals[best].violation)
    except BudgetExhausted:
        pass
    trace = _sample_trace(fe_hist, obj_hist, viol_hist, cfg.trace_checkpoints)
    winner = Individual(p.decode(pop.x[best]), pop.evals[best])
    return TrialResult(best=winner, trace=trace, fe_used=budget.used_fe, seed=cfg.seed)


def with_labels(result: TrialResult, problem: str, algorithm: str, trial_index: int) -> TrialResult:
    return replace(result, problem=problem, algorithm=algorithm, trial_index=trial_index)
