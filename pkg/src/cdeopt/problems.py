"""Benchmark catalog and the fitness-evaluation authority.

Six constrained engineering design problems (cantilever beam, corrugated
bulkhead, gear train, three-bar truss, tubular column, welded beam) and a
handful of classical unconstrained test functions. Every constraint is
written in the ``g(x) <= 0`` convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    BudgetExhausted,
    Bounds,
    ConfigError,
    Evaluation,
    aggregate_violation,
    repair_to_bounds,
)

Function = Callable[[np.ndarray], float]

# Replaces zero lower bounds where the formulas divide by a design variable.
_POSITIVE_FLOOR = 1e-6


@dataclass(frozen=True)
class Problem:
    """A box-bounded minimization problem with inequality constraints.

    Attributes
    ----------
    name : str
        Registry name.
    bounds : Bounds
        Search box; its length fixes the dimension.
    objective : callable
        ``f(x) -> float``.
    constraints : tuple of callables
        Each ``g_i(x) -> float``, satisfied when ``<= 0``.
    integrality : ndarray of bool
        Dimensions that are rounded to integers before evaluation.
    known_best : float or None
        Reference optimum used by acceptance checks.
    """

    name: str
    bounds: Bounds
    objective: Function
    constraints: tuple[Function, ...] = ()
    integrality: np.ndarray | None = None
    known_best: float | None = None

    def __post_init__(self):
        mask = self.integrality
        if mask is None:
            mask = np.zeros(self.dimension, dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.dimension,):
            raise ConfigError(f"{self.name}: integrality mask length != dimension")
        object.__setattr__(self, "integrality", mask)
        object.__setattr__(self, "constraints", tuple(self.constraints))

    @property
    def dimension(self) -> int:
        return self.bounds.dimension

    def decode(self, v) -> np.ndarray:
        """Clamp ``v`` and round its integer dimensions (halves go up)."""
        x = repair_to_bounds(v, self.bounds)
        if self.integrality.any():
            x = x.copy()
            x[self.integrality] = np.floor(x[self.integrality] + 0.5)
            x = repair_to_bounds(x, self.bounds)
        return x

    def objective_and_constraints(self, v) -> tuple[float, list[float]]:
        """Raw ``f`` and ``g_i`` values at ``v``, without budget accounting."""
        x = self.decode(v)
        with np.errstate(all="ignore"):
            f = _safe(self.objective, x)
            gs = [_safe(g, x) for g in self.constraints]
        return f, gs


def _safe(fn: Function, x: np.ndarray) -> float:
    try:
        value = float(fn(x))
    except (ZeroDivisionError, OverflowError):
        return math.inf
    return value if not math.isnan(value) else math.inf


@dataclass
class EvaluationBudget:
    """Counts fitness evaluations against a hard ceiling."""

    max_fe: int
    used_fe: int = field(default=0)

    def __post_init__(self):
        if self.max_fe <= 0:
            raise ConfigError("max_fe must be positive")

    @property
    def remaining(self) -> int:
        return self.max_fe - self.used_fe

    @property
    def exhausted(self) -> bool:
        return self.used_fe >= self.max_fe

    def charge(self) -> int:
        if self.exhausted:
            raise BudgetExhausted(f"all {self.max_fe} evaluations used")
        self.used_fe += 1
        return self.used_fe


def evaluate(p: Problem, v, budget: EvaluationBudget) -> Evaluation:
    """Evaluate ``v`` on ``p``, consuming exactly one unit of ``budget``."""
    if budget.exhausted:
        raise BudgetExhausted(f"all {budget.max_fe} evaluations used")
    f, gs = p.objective_and_constraints(v)
    fe = budget.charge()
    return Evaluation(objective=f, violation=aggregate_violation(gs), fe_index=fe)


# ---------------------------------------------------------------------------
# Engineering design problems


def make_cbd() -> Problem:
    """Cantilever beam: minimize mass of five hollow square segments."""

    def f(x):
        return 0.0624 * float(np.sum(x))

    def g(x):
        x1, x2, x3, x4, x5 = x.tolist()
        return 61 / x1**3 + 37 / x2**3 + 19 / x3**3 + 7 / x4**3 + 1 / x5**3 - 1

    return Problem("cbd", Bounds.uniform(0.01, 100.0, 5), f, (g,), known_best=1.3399576)


def _cbhd_root(x1, x2, x3):
    return x1 + math.sqrt(abs(x3 * x3 - x2 * x2))


def make_cbhd() -> Problem:
    """Corrugated bulkhead: width, depth, length and plate thickness."""

    def f(x):
        x1, x2, x3, x4 = x.tolist()
        return 5.885 * x4 * (x1 + x3) / _cbhd_root(x1, x2, x3)

    def g1(x):
        x1, x2, x3, x4 = x.tolist()
        return -x4 * x2 * (0.4 * x1 + x3 / 6) + 8.94 * _cbhd_root(x1, x2, x3)

    def g2(x):
        x1, x2, x3, x4 = x.tolist()
        return -x4 * x2**2 * (0.2 * x1 + x3 / 12) + 2.2 * (
            8.94 * _cbhd_root(x1, x2, x3)
        ) ** (4 / 3)

    def g3(x):
        return -x[3] + 0.0156 * x[0] + 0.15

    def g4(x):
        return -x[3] + 0.0156 * x[2] + 0.15

    def g5(x):
        return -x[3] + 1.05

    def g6(x):
        return -x[2] + x[1]

    bounds = Bounds([_POSITIVE_FLOOR] * 3 + [0.0], [100.0, 100.0, 100.0, 5.0])
    return Problem("cbhd", bounds, f, (g1, g2, g3, g4, g5, g6), known_best=6.8429580)


GEAR_RATIO = 1 / 6.931


def make_gtd() -> Problem:
    """Gear train: match a 1/6.931 ratio with integer tooth counts in 12..60."""

    def f(x):
        x1, x2, x3, x4 = x.tolist()
        return (GEAR_RATIO - x3 * x2 / (x1 * x4)) ** 2

    return Problem(
        "gtd",
        Bounds.uniform(12.0, 60.0, 4),
        f,
        integrality=np.ones(4, dtype=bool),
        known_best=(GEAR_RATIO - 16 * 19 / (49 * 43)) ** 2,
    )


def make_tbtd(length=100.0, load=2.0, stress=2.0) -> Problem:
    """Three-bar truss: minimize volume over two cross-section areas."""
    r2 = math.sqrt(2.0)

    def f(x):
        x1, x2 = x.tolist()
        return (2 * r2 * x1 + x2) * length

    def g1(x):
        x1, x2 = x.tolist()
        return (r2 * x1 + x2) / (r2 * x1**2 + 2 * x1 * x2) * load - stress

    def g2(x):
        x1, x2 = x.tolist()
        return x2 / (r2 * x1**2 + 2 * x1 * x2) * load - stress

    def g3(x):
        x1, x2 = x.tolist()
        return load / (r2 * x2 + x1) - stress

    bounds = Bounds.uniform(_POSITIVE_FLOOR, 1.0, 2)
    return Problem("tbtd", bounds, f, (g1, g2, g3), known_best=263.8958434)


# Best of 30 CDE runs at 100,000 FE (N=100, seeds 0..29), see
# scripts/derive_tcd_reference.py.
TCD_REFERENCE_OPTIMUM = 26.499496875949646


def make_tcd(load=2500.0, yield_stress=500.0, modulus=0.85e6, length=250.0) -> Problem:
    """Tubular column: mean diameter and wall thickness under buckling limits."""

    def f(x):
        x1, x2 = x.tolist()
        return 9.8 * x1 * x2 + 2 * x1

    def g1(x):
        x1, x2 = x.tolist()
        return load / (math.pi * x1 * x2 * yield_stress) - 1

    def g2(x):
        x1, x2 = x.tolist()
        return 8 * load * length**2 / (math.pi**3 * modulus * x1 * x2 * (x1**2 + x2**2)) - 1

    return Problem(
        "tcd", Bounds([2.0, 0.2], [14.0, 8.0]), f, (g1, g2), known_best=TCD_REFERENCE_OPTIMUM
    )


@dataclass(frozen=True)
class WeldedBeamConstants:
    load: float = 6000.0
    length: float = 14.0
    modulus: float = 30e6
    shear_modulus: float = 12e6
    tau_max: float = 13600.0
    sigma_max: float = 30000.0
    delta_max: float = 0.25


def welded_beam_responses(x, c: WeldedBeamConstants = WeldedBeamConstants()):
    """Shear stress, bending stress, tip deflection and buckling load.

    Returns ``(tau, sigma, delta, p_c)`` for the design
    ``x = (weld thickness h, weld length l, bar height t, bar thickness b)``.
    """
    h, l, t, b = (float(v) for v in x)
    P, L, E, G = c.load, c.length, c.modulus, c.shear_modulus
    tau_p = P / (math.sqrt(2) * h * l)
    moment = P * (L + l / 2)
    radius = math.sqrt(l * l / 4 + ((h + t) / 2) ** 2)
    polar = 2 * math.sqrt(2) * h * l * (l * l / 12 + ((h + t) / 2) ** 2)
    tau_pp = moment * radius / polar
    tau = math.sqrt(tau_p**2 + 2 * tau_p * tau_pp * l / (2 * radius) + tau_pp**2)
    sigma = 6 * P * L / (b * t * t)
    delta = 4 * P * L**3 / (E * t**3 * b)
    p_c = (
        4.013 * E * math.sqrt(t * t * b**6 / 36) / L**2
        * (1 - t / (2 * L) * math.sqrt(E / (4 * G)))
    )
    return tau, sigma, delta, p_c


def _wbd_cost(x):
    x1, x2, x3, x4 = x.tolist()
    return 1.10471 * x1 * x1 * x2 + 0.04811 * x3 * x4 * (14 + x2)


def make_wbd(constants: WeldedBeamConstants = WeldedBeamConstants()) -> Problem:
    """Welded beam: fabrication cost under stress, deflection and buckling limits."""
    c = constants

    def g_tau(x):
        return welded_beam_responses(x, c)[0] - c.tau_max

    def g_sigma(x):
        return welded_beam_responses(x, c)[1] - c.sigma_max

    def g_delta(x):
        return welded_beam_responses(x, c)[2] - c.delta_max

    def g_thickness(x):
        return x[0] - x[3]

    def g_buckling(x):
        return c.load - welded_beam_responses(x, c)[3]

    def g_min_weld(x):
        return 0.125 - x[0]

    def g_cost_cap(x):
        return _wbd_cost(x) - 5

    bounds = Bounds([0.1, 0.1, 0.1, 0.1], [2.0, 10.0, 10.0, 2.0])
    constraints = (g_tau, g_sigma, g_delta, g_thickness, g_buckling, g_min_weld, g_cost_cap)
    return Problem("wbd", bounds, _wbd_cost, constraints, known_best=1.7248523)


# ---------------------------------------------------------------------------
# Classical unconstrained functions


def sphere(x):
    return float(np.dot(x, x))


def rosenbrock(x):
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def rastrigin(x):
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2 * np.pi * x)))


def ackley(x):
    d = x.size
    return float(
        -20.0 * np.exp(-0.2 * np.sqrt(np.dot(x, x) / d))
        - np.exp(np.sum(np.cos(2 * np.pi * x)) / d)
        + 20.0
        + np.e
    )


def griewank(x):
    i = np.arange(1, x.size + 1)
    return float(np.dot(x, x) / 4000.0 - np.prod(np.cos(x / np.sqrt(i))) + 1.0)


CLASSICAL = {
    "sphere": (sphere, (-5.12, 5.12)),
    "rosenbrock": (rosenbrock, (-5.0, 10.0)),
    "rastrigin": (rastrigin, (-5.12, 5.12)),
    "ackley": (ackley, (-32.768, 32.768)),
    "griewank": (griewank, (-600.0, 600.0)),
}


def make_classical(name: str, dimension: int) -> Problem:
    if name not in CLASSICAL:
        raise ConfigError(
            f"unknown classical function {name!r}; choose from {sorted(CLASSICAL)}"
        )
    if int(dimension) < 1:
        raise ConfigError("dimension must be at least 1")
    fn, (lo, hi) = CLASSICAL[name]
    return Problem(f"{name}:{int(dimension)}", Bounds.uniform(lo, hi, int(dimension)), fn, known_best=0.0)


ENGINEERING = {
    "cbd": make_cbd,
    "cbhd": make_cbhd,
    "gtd": make_gtd,
    "tbtd": make_tbtd,
    "tcd": make_tcd,
    "wbd": make_wbd,
}


def problem_names() -> list[str]:
    """Names accepted by :func:`get_problem` (classical ones take ``:D``)."""
    return list(ENGINEERING) + [f"{n}:D" for n in CLASSICAL]


def get_problem(name: str) -> Problem:
    """Resolve a registry name such as ``"cbd"`` or ``"rastrigin:30"``."""
    key = name.strip().lower()
    if key in ENGINEERING:
        return ENGINEERING[key]()
    base, sep, dim = key.partition(":")
    if sep and base in CLASSICAL:
        try:
            d = int(dim)
        except ValueError:
            raise ConfigError(f"bad dimension in problem name {name!r}") from None
        return make_classical(base, d)
    raise ConfigError(
        f"unknown problem {name!r}; valid names: {', '.join(problem_names())}"
    )


def validate_names(names: Sequence[str]) -> None:
    for n in names:
        get_problem(n)
