"""Shared value types, the random stream, and constrained fitness ordering."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: Per-constraint slack below which ``g_i(x) <= 0`` counts as satisfied.
FEASIBILITY_TOL = 1e-9


class ConfigError(ValueError):
    """Raised for misconfigured problems, strategies, plans or names."""


class BudgetExhausted(Exception):
    """Signals that the fitness-evaluation budget has no evaluations left.

    This ends an optimization loop; it is not an error condition.
    """


class Ordering(enum.Enum):
    A_BETTER = "a-better"
    B_BETTER = "b-better"
    TIE = "tie"


@dataclass(frozen=True)
class Bounds:
    """Box constraints ``lower <= x <= upper``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).copy()
        upper = np.asarray(self.upper, dtype=float).copy()
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ConfigError("bounds must be two 1-d sequences of equal length")
        if not np.all(lower < upper):
            raise ConfigError("every lower bound must be strictly below its upper bound")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    @classmethod
    def uniform(cls, low: float, high: float, dimension: int) -> "Bounds":
        return cls(np.full(dimension, low), np.full(dimension, high))


@dataclass(frozen=True)
class Evaluation:
    """Cached result of one objective/constraint evaluation.

    Attributes
    ----------
    objective : float
        Objective value ``f(x)``; may be non-finite for pathological points.
    violation : float
        Aggregate constraint violation, ``0.0`` iff every constraint holds.
    fe_index : int
        1-based count of the fitness evaluation that produced this record.
    """

    objective: float
    violation: float = 0.0
    fe_index: int = 0

    @property
    def feasible(self) -> bool:
        return self.violation == 0.0


@dataclass(frozen=True)
class Individual:
    vector: np.ndarray
    eval: Evaluation


@dataclass
class Population:
    """``N`` decision vectors stored row-wise, with their evaluations.

    Rows of ``x`` and entries of ``evals`` are aligned; ``generation`` is the
    iteration counter ``t`` (0 right after initialization).
    """

    x: np.ndarray
    evals: list[Evaluation]
    generation: int = 0

    def __post_init__(self):
        if self.x.ndim != 2 or self.x.shape[0] != len(self.evals):
            raise ConfigError("population matrix and evaluation list disagree in size")
        if self.x.shape[0] < 4:
            raise ConfigError("population needs at least 4 members")

    @property
    def size(self) -> int:
        return self.x.shape[0]

    @property
    def dimension(self) -> int:
        return self.x.shape[1]

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, i: int) -> Individual:
        return Individual(self.x[i].copy(), self.evals[i])

    def best_index(self) -> int:
        """Index of the best member; the lowest index wins ties."""
        best = 0
        for i in range(1, self.size):
            if compare_fitness(self.evals[i], self.evals[best]) is Ordering.A_BETTER:
                best = i
        return best


class RngStream:
    """Seeded random stream; one per trial, never shared.

    Wraps a PCG64 ``numpy.random.Generator`` so equal seeds give
    bit-identical draw sequences.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def uniform(self, size: int | None = None):
        """Uniform draws on ``[0, 1)``."""
        return self._gen.random(size)

    def integers(self, low: int, high: int) -> int:
        """Uniform integer on ``[low, high)``."""
        return int(self._gen.integers(low, high))

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        return float(self._gen.normal(mu, sigma))


def _sort_key(e: Evaluation) -> tuple[int, float]:
    if not (math.isfinite(e.objective) and math.isfinite(e.violation)):
        return (2, 0.0)
    if e.violation == 0.0:
        return (0, e.objective)
    return (1, e.violation)


def compare_fitness(a: Evaluation, b: Evaluation) -> Ordering:
    """Order two evaluations by feasibility rules.

    Feasible beats infeasible, feasible pairs compare by objective and
    infeasible pairs by violation (smaller is better in both cases).
    Anything with a non-finite objective or violation ranks below every
    finite evaluation.
    """
    ka, kb = _sort_key(a), _sort_key(b)
    if ka < kb:
        return Ordering.A_BETTER
    if kb < ka:
        return Ordering.B_BETTER
    return Ordering.TIE


def aggregate_violation(constraint_values: Sequence[float], tol: float = FEASIBILITY_TOL) -> float:
    """Sum of positive constraint values, ignoring those within ``tol``."""
    total = 0.0
    for g in constraint_values:
        if g > tol:
            total += g
        elif math.isnan(g):
            return math.inf
    return total


def repair_to_bounds(v, bounds: Bounds) -> np.ndarray:
    """Clamp each component of ``v`` into ``[lower_j, upper_j]``."""
    v = np.asarray(v, dtype=float)
    if v.shape != bounds.lower.shape:
        raise ConfigError(
            f"vector of shape {v.shape} does not match {bounds.dimension}-d bounds"
        )
    return np.clip(v, bounds.lower, bounds.upper)


def sample_truncated_normal(
    rng: RngStream, mu: float, sigma: float, lo: float, hi: float
) -> float:
    """Draw from ``N(mu, sigma)`` restricted to ``(lo, hi]`` by rejection."""
    if not lo < hi:
        raise ConfigError("truncation interval must satisfy lo < hi")
    if sigma <= 0:
        raise ConfigError("sigma must be positive")
    while True:
        value = rng.normal(mu, sigma)
        if lo < value <= hi:
            return value
