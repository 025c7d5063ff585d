"""Competitive differential evolution and constrained engineering benchmarks."""

from .core import (
    BudgetExhausted,
    Bounds,
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
from .engine import (
    ControlParams,
    ConvergenceTrace,
    Fixed,
    MutationStrategy,
    RunConfig,
    Sampled,
    TrialResult,
    cde_config,
    crossover_binomial,
    de_config,
    initialize,
    mutate_classic,
    mutate_winner_to_best,
    run,
    select_greedy,
)
from .problems import EvaluationBudget, Problem, evaluate, get_problem, problem_names

__version__ = "0.1.0"
