"""Instrumented engine runs and reference mutation operators for the test suite."""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from unittest import mock

import numpy as np

from cdeopt import engine
from cdeopt.core import Evaluation, Ordering, Population, RngStream, compare_fitness
from cdeopt.engine import ControlParams, Fixed, MutationStrategy, RunConfig, Sampled
from cdeopt.problems import EvaluationBudget, Problem, make_classical


# --- reference operators (own index protocol, no engine helpers) -------------

def _pick(rng: RngStream, n: int, taken: set[int]) -> int:
    while True:
        r = rng.integers(0, n)
        if r not in taken:
            taken.add(r)
            return r


def rand_to_best_1(pop: Population, i: int, f1, f2, rng: RngStream, best: int) -> np.ndarray:
    taken = {i}
    r1 = _pick(rng, pop.size, taken)
    r2 = _pick(rng, pop.size, taken)
    r3 = _pick(rng, pop.size, taken)
    x = pop.x
    return x[r1] + f1 * (x[best] - x[r1]) + f2 * (x[r2] - x[r3])


def cur_to_best_1(pop: Population, i: int, f1, f2, rng: RngStream, best: int) -> np.ndarray:
    taken = {i}
    _pick(rng, pop.size, taken)  # the losing competitor still consumes a draw
    r2 = _pick(rng, pop.size, taken)
    r3 = _pick(rng, pop.size, taken)
    x = pop.x
    return x[i] + f1 * (x[best] - x[i]) + f2 * (x[r2] - x[r3])


# --- randomized engine audits --------------------------------------------------

@dataclass
class Audit:
    index_draws: list = field(default_factory=list)
    scale_draws: list = field(default_factory=list)
    cr_draws: list = field(default_factory=list)


@contextmanager
def instrumented():
    """Record every index, scale-factor and crossover-rate draw the engine makes."""
    audit = Audit()
    real_draw, real_scale, real_cr = engine.draw_distinct, engine._draw_scale, engine._draw_cr

    def draw(rng, n, k, exclude=()):
        out = real_draw(rng, n, k, exclude)
        audit.index_draws.append((tuple(out), tuple(exclude), n))
        return out

    def scale(mode, rng, size):
        out = real_scale(mode, rng, size)
        audit.scale_draws.append((mode, np.atleast_1d(out).copy()))
        return out

    def cr(mode, rng):
        out = real_cr(mode, rng)
        audit.cr_draws.append(out)
        return out

    with mock.patch.object(engine, "draw_distinct", draw), \
            mock.patch.object(engine, "_draw_scale", scale), \
            mock.patch.object(engine, "_draw_cr", cr):
        yield audit


def random_case(rng: np.random.Generator):
    n = int(rng.integers(4, 13))
    d = int(rng.integers(1, 7))
    strategy = MutationStrategy(rng.choice([s.value for s in MutationStrategy]))
    if strategy is MutationStrategy.WINNER_TO_BEST_1 and n < 5:
        n = 5
    f = Sampled(float(rng.uniform(0.1, 0.9)), float(rng.uniform(0.05, 0.6))) if rng.random() < 0.6 \
        else Fixed(float(rng.uniform(0.05, 2.0)))
    cr = Sampled(float(rng.uniform(0.0, 1.0)), float(rng.uniform(0.05, 0.6))) if rng.random() < 0.6 \
        else Fixed(float(rng.uniform(0.0, 1.0)))
    params = ControlParams(f=f, cr=cr, per_dimension=bool(rng.random() < 0.3))
    generations = int(rng.integers(1, 6))
    budget = n * (generations + 1) + int(rng.integers(0, n))
    name = rng.choice(["sphere", "rastrigin", "rosenbrock", "ackley", "griewank"])
    problem = make_classical(str(name), d)
    if rng.random() < 0.3:
        problem = _constrained(problem)
    cfg = RunConfig(budget=budget, strategy=strategy, params=params, population_size=n,
                    seed=int(rng.integers(0, 2**63)))
    return problem, cfg


def _constrained(p: Problem) -> Problem:
    # Half-space constraint that keeps a good share of random points infeasible.
    return Problem(p.name + "+c", p.bounds, p.objective, (lambda x: float(np.sum(x)),))


def audit_case(problem: Problem, cfg: RunConfig) -> dict[str, bool]:
    """Check every engine invariant on one randomized configuration."""
    ok = {}
    n = cfg.population_size
    with instrumented() as audit:
        rng = RngStream(cfg.seed)
        budget = EvaluationBudget(cfg.budget)
        pop = engine.initialize(problem, cfg, rng, budget)
        elitist = True
        winners_ok = True
        while budget.remaining >= n:
            new = engine.step(problem, pop, cfg, rng, budget)
            for i in range(n):
                if compare_fitness(new.evals[i], pop.evals[i]) is Ordering.B_BETTER:
                    elitist = False
            pop = new
        ok["elitism"] = elitist
        generations = pop.generation

    ok["index_distinctness"] = all(
        len(set(out)) == len(out) and not set(out) & set(excl) and all(0 <= r < m for r in out)
        for out, excl, m in audit.index_draws
    ) and len(audit.index_draws) > 0
    sampled = [v for mode, v in audit.scale_draws if isinstance(mode, Sampled)]
    ok["f_range"] = all(np.all((v > 0) & (v <= 1)) for v in sampled)
    ok["cr_range"] = all(0.0 <= c <= 1.0 for c in audit.cr_draws)
    ok["fe_accounting"] = (
        budget.used_fe == n * (generations + 1) and budget.used_fe <= cfg.budget
        and cfg.budget - budget.used_fe < n
    )

    # winner dominance on the final population, zero scale factors expose the base vector
    rng2 = RngStream(cfg.seed ^ 0x5A5A)
    best = pop.best_index()
    if n >= 4:
        for i in range(n):
            base = engine.mutate_winner_to_best(pop, i, 0.0, 0.0, rng2, best)
            rows = [j for j in range(n) if np.array_equal(pop.x[j], base)]
            if not any(compare_fitness(pop.evals[j], pop.evals[i]) is not Ordering.B_BETTER for j in rows):
                winners_ok = False
    ok["winner_dominance"] = winners_ok

    # forced gene: every trial keeps at least one mutant component
    rng3 = RngStream(cfg.seed ^ 0xC0FFEE)
    d = problem.dimension
    target, mutant = np.zeros(d), np.ones(d)
    forced = True
    for cr in (0.0, 0.5, 1.0, float(rng3.uniform())):
        trial = engine.crossover_binomial(target, mutant, cr, rng3)
        forced &= bool(np.any(trial == mutant))
    ok["crossover_forced_gene"] = forced

    a, b = engine.run(problem, cfg), engine.run(problem, cfg)
    ok["bit_reproducibility"] = (
        np.array_equal(a.best.vector, b.best.vector) and a.best.eval == b.best.eval
        and np.array_equal(a.trace.fe, b.trace.fe)
        and np.array_equal(a.trace.best_objective, b.trace.best_objective, equal_nan=True)
        and a.fe_used == b.fe_used
    )
    return ok


def forced_population(n: int, d: int, seed: int, incumbent: int, branch: str) -> tuple[Population, int]:
    """Population whose evaluations force the competition outcome for ``incumbent``.

    ``branch="a"``: the incumbent is the unique worst, so any competitor wins.
    ``branch="b"``: the incumbent beats everybody it can meet; the best index
    returned for the mutation is a different member.
    """
    gen = np.random.default_rng(seed)
    x = gen.uniform(-5, 5, size=(n, d))
    objectives = gen.permutation(n).astype(float) + 1.0
    evals = [Evaluation(float(o)) for o in objectives]
    if branch == "a":
        evals[incumbent] = Evaluation(0.0, violation=1e6)
        best = int(np.argmin([e.objective if j != incumbent else np.inf for j, e in enumerate(evals)]))
    else:
        evals[incumbent] = Evaluation(-1.0)
        best = (incumbent + 1) % n
    return Population(x, evals), best


