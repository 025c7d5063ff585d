import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from _audit import audit_case, cur_to_best_1, forced_population, rand_to_best_1, random_case
from cdeopt.core import Bounds, ConfigError, Evaluation, Individual, Population, RngStream
from cdeopt.engine import (
    ControlParams,
    Fixed,
    MutationStrategy,
    RunConfig,
    Sampled,
    cde_config,
    crossover_binomial,
    de_config,
    draw_distinct,
    initialize,
    mutate_classic,
    mutate_winner_to_best,
    run,
    select_greedy,
)
from cdeopt.problems import EvaluationBudget, Problem, make_classical


def population(rows, objectives=None):
    x = np.asarray(rows, dtype=float)
    objectives = objectives if objectives is not None else range(len(x))
    return Population(x, [Evaluation(float(o)) for o in objectives])


class FixedDraws(RngStream):
    """Stream whose integer draws come from a script."""

    def __init__(self, ints):
        super().__init__(0)
        self._ints = list(ints)

    def integers(self, low, high):
        return self._ints.pop(0)


class TestInitialize:
    def test_unit_box(self):
        p = make_classical("sphere", 3)
        p = Problem("unit", Bounds.uniform(0.0, 1.0, 3), p.objective)
        cfg = RunConfig(budget=50, population_size=20)
        pop = initialize(p, cfg, RngStream(1), EvaluationBudget(50))
        assert pop.x.shape == (20, 3) and pop.generation == 0
        assert np.all(pop.x >= 0) and np.all(pop.x < 1)

    def test_tiny_box(self):
        eps = 1e-9
        p = Problem("tiny", Bounds([1.0], [1.0 + eps]), lambda x: float(x[0]))
        pop = initialize(p, RunConfig(budget=10, population_size=4), RngStream(0), EvaluationBudget(10))
        assert np.all(np.abs(pop.x - 1.0) <= eps)

    def test_deterministic(self):
        p = make_classical("rastrigin", 4)
        cfg = RunConfig(budget=100, population_size=10)
        a = initialize(p, cfg, RngStream(5), EvaluationBudget(100))
        b = initialize(p, cfg, RngStream(5), EvaluationBudget(100))
        np.testing.assert_array_equal(a.x, b.x)

    def test_budget_too_small(self):
        from cdeopt.core import BudgetExhausted
        p = make_classical("sphere", 2)
        with pytest.raises(BudgetExhausted):
            initialize(p, RunConfig(budget=10, population_size=10), RngStream(0), EvaluationBudget(5))


class TestClassicMutation:
    def test_rand_1_arithmetic(self):
        pop = population([[9, 9], [1, 1], [2, 2], [0, 0]])
        v = mutate_classic(pop, 0, "rand_1", 0.5, FixedDraws([1, 2, 3]))
        np.testing.assert_array_equal(v, [2.0, 2.0])

    def test_cur_1_zero_differential(self):
        pop = population([[3, 4], [1, 1], [1, 1], [0, 0]])
        v = mutate_classic(pop, 0, MutationStrategy.CUR_1, 0.9, FixedDraws([1, 2]))
        np.testing.assert_array_equal(v, [3, 4])

    def test_best_1_zero_scale(self):
        pop = population([[3, 4], [1, 1], [7, 8], [0, 0]], objectives=[3, 2, 0, 1])
        v = mutate_classic(pop, 0, "best_1", 0.0, RngStream(1))
        np.testing.assert_array_equal(v, [7, 8])

    def test_rejects_winner_strategy(self):
        pop = population(np.zeros((4, 2)))
        with pytest.raises(ConfigError):
            mutate_classic(pop, 0, "winner_to_best_1", 0.5, RngStream(0))

    def test_draw_distinct_needs_enough_members(self):
        with pytest.raises(ConfigError):
            draw_distinct(RngStream(0), 3, 3, (0,))


class TestWinnerToBest:
    def test_competitor_wins(self):
        # slot 0 has f=5, competitor 1 has f=2, best is row 2
        pop = population([[9, 9], [1, 1], [2, 2], [1, 0], [0, 1]], objectives=[5, 2, 0, 3, 4])
        v = mutate_winner_to_best(pop, 0, 0.5, 0.5, FixedDraws([1, 3, 4]), best=2)
        np.testing.assert_allclose(v, [2.0, 1.0])

    def test_incumbent_survives(self):
        pop = population([[9, 9], [1, 1], [2, 2], [1, 0], [0, 1]], objectives=[1, 9, 0, 3, 4])
        v = mutate_winner_to_best(pop, 0, 0.0, 0.0, FixedDraws([1, 3, 4]), best=2)
        np.testing.assert_array_equal(v, [9, 9])

    def test_tie_keeps_incumbent(self):
        pop = population([[9, 9], [1, 1], [2, 2], [1, 0], [0, 1]], objectives=[1, 1, 0, 3, 4])
        v = mutate_winner_to_best(pop, 0, 0.0, 0.0, FixedDraws([1, 3, 4]), best=2)
        np.testing.assert_array_equal(v, [9, 9])

    @pytest.mark.parametrize("seed", range(5))
    def test_full_pull_lands_on_best(self, seed):
        pop = population(np.random.default_rng(seed).normal(size=(8, 3)))
        best = pop.best_index()
        v = mutate_winner_to_best(pop, 3, 1.0, 0.0, RngStream(seed), best)
        # base + 1*(best - base) is exact up to one rounding
        np.testing.assert_allclose(v, pop.x[best], rtol=0, atol=4 * np.finfo(float).eps * np.abs(pop.x).max())

    @pytest.mark.parametrize("seed", range(10))
    def test_branch_a_equals_rand_to_best(self, seed):
        pop, best = forced_population(9, 4, seed, incumbent=2, branch="a")
        got = mutate_winner_to_best(pop, 2, 0.3, 0.7, RngStream(seed), best)
        want = rand_to_best_1(pop, 2, 0.3, 0.7, RngStream(seed), best)
        np.testing.assert_array_equal(got, want)

    @pytest.mark.parametrize("seed", range(10))
    def test_branch_b_equals_cur_to_best(self, seed):
        pop, best = forced_population(9, 4, seed, incumbent=2, branch="b")
        got = mutate_winner_to_best(pop, 2, 0.3, 0.7, RngStream(seed), best)
        want = cur_to_best_1(pop, 2, 0.3, 0.7, RngStream(seed), best)
        np.testing.assert_array_equal(got, want)


class TestCrossover:
    def test_cr_one_takes_mutant(self):
        t = crossover_binomial(np.zeros(6), np.ones(6), 1.0, RngStream(0))
        np.testing.assert_array_equal(t, np.ones(6))

    @pytest.mark.parametrize("seed", range(10))
    def test_cr_zero_takes_exactly_one_gene(self, seed):
        t = crossover_binomial(np.zeros(6), np.ones(6), 0.0, RngStream(seed))
        assert t.sum() == 1

    def test_single_dimension(self):
        assert crossover_binomial([0.0], [1.0], 0.0, RngStream(3))[0] == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigError):
            crossover_binomial(np.zeros(3), np.zeros(4), 0.5, RngStream(0))


class TestSelection:
    def ind(self, obj, viol=0.0):
        return Individual(np.zeros(1), Evaluation(obj, viol))

    def test_improvement(self):
        trial = self.ind(1.0)
        assert select_greedy(self.ind(2.0), trial) is trial

    def test_tie_goes_to_trial(self):
        trial = self.ind(1.0)
        assert select_greedy(self.ind(1.0), trial) is trial

    def test_infeasible_trial_loses(self):
        parent = self.ind(5.0)
        assert select_greedy(parent, self.ind(0.0, 2.0)) is parent


class TestConfig:
    def test_invalid_values(self):
        with pytest.raises(ConfigError):
            ControlParams(f=Fixed(0.0))
        with pytest.raises(ConfigError):
            ControlParams(cr=Fixed(1.5))
        with pytest.raises(ConfigError):
            ControlParams(f=Sampled(0.5, 0.0))
        with pytest.raises(ConfigError):
            RunConfig(budget=100, population_size=3)
        with pytest.raises(ConfigError):
            RunConfig(budget=50, population_size=100)

    def test_presets(self):
        de = de_config(1000)
        assert de.strategy is MutationStrategy.RAND_1
        assert de.params.f == Fixed(0.5) and de.params.cr == Fixed(0.8)
        cde = cde_config(1000)
        assert cde.strategy is MutationStrategy.WINNER_TO_BEST_1
        assert cde.params.f == Sampled(0.5, 0.3) and cde.params.cr == Sampled(0.5, 0.3)
        assert cde.population_size == 100


class TestRun:
    def test_sphere_converges(self):
        result = run(make_classical("sphere", 10), cde_config(15_000, seed=3))
        assert result.best_objective < 1e-2
        assert result.fe_used == 15_000

    def test_fe_accounting_and_partial_generation(self):
        result = run(make_classical("sphere", 3), cde_config(1_050, seed=1))
        assert result.fe_used == 1_000
        assert result.trace.fe[0] == 100 and result.trace.fe[-1] == 1_000
        assert len(result.trace) == 10

    def test_trace_monotone(self):
        result = run(make_classical("rastrigin", 5), de_config(3_000, seed=2))
        assert np.all(np.diff(result.trace.best_objective) <= 0)

    def test_reproducible(self):
        p = make_classical("ackley", 4)
        a, b = run(p, cde_config(2_000, seed=11)), run(p, cde_config(2_000, seed=11))
        np.testing.assert_array_equal(a.best.vector, b.best.vector)
        np.testing.assert_array_equal(a.trace.best_objective, b.trace.best_objective)
        assert a.best.eval == b.best.eval

    def test_checkpoints(self):
        cfg = cde_config(1_000, seed=0, trace_checkpoints=[0, 150, 500, 10_000])
        result = run(make_classical("sphere", 2), cfg)
        assert result.trace.fe.tolist() == [150, 500, 1_000]
        full = run(make_classical("sphere", 2), cde_config(1_000, seed=0))
        lookup = dict(full.trace.pairs())
        assert result.trace.best_objective.tolist() == [lookup[100], lookup[500], lookup[1_000]]

    def test_per_dimension_scale_factors(self):
        cfg = RunConfig(budget=2_000, params=ControlParams(per_dimension=True), seed=4)
        assert run(make_classical("sphere", 5), cfg).best_objective < 1.0


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 2**32 - 1))
def test_engine_invariants_on_random_configs(seed):
    problem, cfg = random_case(np.random.default_rng(seed))
    failed = [k for k, v in audit_case(problem, cfg).items() if not v]
    assert not failed, (cfg, failed)
