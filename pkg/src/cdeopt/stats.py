"""Pairwise rank-sum tests, Holm step-down correction, verdicts and ranks."""

from __future__ import annotations

import csv
import enum
import functools
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import norm, rankdata

EXACT_MAX_N = 8


class MissingDataError(KeyError):
    """A (problem, algorithm) cell needed for a comparison is absent."""


class Verdict(str, enum.Enum):
    PLUS = "+"
    APPROX = "≈"
    MINUS = "-"


@functools.lru_cache(maxsize=64)
def _subset_sum_counts(doubled: tuple[int, ...], k: int) -> dict[int, int]:
    # Number of k-subsets of the pooled (doubled, hence integer) ranks per sum.
    table = [dict() for _ in range(k + 1)]
    table[0][0] = 1
    for r in doubled:
        for j in range(k, 0, -1):
            for s, c in table[j - 1].items():
                table[j][s + r] = table[j].get(s + r, 0) + c
    return table[k]


def _ranksum_exact(ranks: np.ndarray, n1: int) -> float:
    # Share of all assignments of n1 pooled (mid)ranks at least as far from
    # the null mean as the observed one; midranks are halves, so double them.
    doubled = np.rint(2 * ranks).astype(int)
    observed = int(doubled[:n1].sum())
    expected = n1 * (len(ranks) + 1)
    dev = abs(observed - expected)
    counts = _subset_sum_counts(tuple(sorted(doubled.tolist())), n1)
    hits = sum(c for s, c in counts.items() if abs(s - expected) >= dev)
    return hits / math.comb(len(ranks), n1)


def _ranksum_normal(ranks: np.ndarray, n1: int, n2: int) -> float:
    n = n1 + n2
    u = ranks[:n1].sum() - n1 * (n1 + 1) / 2
    mu = n1 * n2 / 2
    _, counts = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(counts**3 - counts)) / (n * (n - 1))
    var = n1 * n2 / 12 * ((n + 1) - tie_term)
    if var <= 0:
        return 1.0
    z = max(abs(u - mu) - 0.5, 0.0) / math.sqrt(var)
    return min(1.0, 2.0 * float(norm.sf(z)))


def rank_sum_test(a: Sequence[float], b: Sequence[float], method: str = "auto") -> float:
    """Two-sided Wilcoxon rank-sum (Mann-Whitney) p-value.

    Parameters
    ----------
    a, b : sequence of float
        The two samples.
    method : {"auto", "exact", "normal"}
        ``"auto"`` enumerates the permutation distribution when both samples
        have at most 8 values and otherwise uses the normal approximation
        with tie and continuity corrections.

    Returns
    -------
    float
        p-value in ``(0, 1]``; exactly 1 when every value is tied.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    if np.all(pooled == pooled[0]):
        return 1.0
    ranks = rankdata(pooled)
    if method == "auto":
        method = "exact" if max(a.size, b.size) <= EXACT_MAX_N else "normal"
    if method == "exact":
        return _ranksum_exact(ranks, a.size)
    if method == "normal":
        return _ranksum_normal(ranks, a.size, b.size)
    raise ValueError(f"unknown method {method!r}")


def holm_adjust(p_values: Sequence[float], alpha: float = 0.05) -> list[bool]:
    """Holm step-down rejections, returned in input order."""
    p = np.asarray(p_values, dtype=float)
    m = p.size
    if m == 0:
        raise ValueError("need at least one p-value")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    reject = [False] * m
    for k, idx in enumerate(np.argsort(p, kind="stable")):
        if p[idx] > alpha / (m - k):
            break
        reject[idx] = True
    return reject


def holm_adjusted_pvalues(p_values: Sequence[float]) -> list[float]:
    """Holm-adjusted p-values; ``adjusted <= alpha`` iff Holm rejects."""
    p = np.asarray(p_values, dtype=float)
    m = p.size
    order = np.argsort(p, kind="stable")
    adjusted = np.empty(m)
    running = 0.0
    for k, idx in enumerate(order):
        running = max(running, min(1.0, (m - k) * p[idx]))
        adjusted[idx] = running
    return adjusted.tolist()


@dataclass
class Comparison:
    problem: str
    competitor: str
    verdict: Verdict
    p_raw: float
    p_adjusted: float


@dataclass
class VerdictMatrix:
    """Reference-vs-competitor verdicts per problem."""

    reference: str
    entries: list[Comparison] = field(default_factory=list)

    def get(self, problem: str, competitor: str) -> Comparison:
        for e in self.entries:
            if e.problem == problem and e.competitor == competitor:
                return e
        raise KeyError((problem, competitor))

    def counts(self) -> dict[str, tuple[int, int, int]]:
        """``competitor -> (plus, approx, minus)``."""
        out: dict[str, list[int]] = {}
        for e in self.entries:
            c = out.setdefault(e.competitor, [0, 0, 0])
            c[[Verdict.PLUS, Verdict.APPROX, Verdict.MINUS].index(e.verdict)] += 1
        return {k: tuple(v) for k, v in out.items()}


Samples = Mapping[str, Mapping[str, Sequence[float]]]


def verdicts(reference: str, samples: Samples, alpha: float = 0.05) -> VerdictMatrix:
    """Compare ``reference`` against every other algorithm on each problem.

    ``samples`` maps problem -> algorithm -> per-trial best objectives. The
    competitors of one problem form one Holm family.
    """
    matrix = VerdictMatrix(reference)
    for problem, by_algo in samples.items():
        if reference not in by_algo:
            raise MissingDataError(f"no samples for ({problem}, {reference})")
        ref = np.asarray(by_algo[reference], dtype=float)
        competitors = [a for a in by_algo if a != reference]
        if not competitors:
            continue
        p_raw = []
        for algo in competitors:
            values = by_algo[algo]
            if len(values) == 0:
                raise MissingDataError(f"no samples for ({problem}, {algo})")
            p_raw.append(rank_sum_test(ref, values))
        rejected = holm_adjust(p_raw, alpha)
        adjusted = holm_adjusted_pvalues(p_raw)
        for algo, p, padj, rej in zip(competitors, p_raw, adjusted, rejected):
            if not rej:
                v = Verdict.APPROX
            elif ref.mean() < np.mean(by_algo[algo]):
                v = Verdict.PLUS
            else:
                v = Verdict.MINUS
            matrix.entries.append(Comparison(problem, algo, v, p, padj))
    return matrix


def average_ranks(means: Mapping[str, Mapping[str, float]]) -> dict[str, float]:
    """Mean per-problem rank of each algorithm (1 = smallest mean; ties averaged)."""
    algorithms: list[str] = []
    for by_algo in means.values():
        for a in by_algo:
            if a not in algorithms:
                algorithms.append(a)
    totals = dict.fromkeys(algorithms, 0.0)
    for problem, by_algo in means.items():
        missing = [a for a in algorithms if a not in by_algo]
        if missing:
            raise MissingDataError(f"no mean for ({problem}, {missing[0]})")
        ranks = rankdata([by_algo[a] for a in algorithms], method="average")
        for a, r in zip(algorithms, ranks):
            totals[a] += float(r)
    return {a: totals[a] / len(means) for a in algorithms}


# ---------------------------------------------------------------------------
# Report rendering

REPORT_COLUMNS = ["problem", "algorithm", "mean", "std", "verdict_vs_reference", "p_raw", "p_adjusted"]


@dataclass
class ReportRow:
    problem: str
    algorithm: str
    mean: float
    std: float
    verdict: str = ""
    p_raw: float | None = None
    p_adjusted: float | None = None

    def cells(self) -> list[str]:
        def fmt(v):
            return "" if v is None else f"{v:.6e}"

        return [self.problem, self.algorithm, fmt(self.mean), fmt(self.std), self.verdict,
                fmt(self.p_raw), fmt(self.p_adjusted)]


@dataclass
class ComparisonReport:
    reference: str
    alpha: float
    rows: list[ReportRow]
    counts: dict[str, tuple[int, int, int]]
    ranks: dict[str, float]

    def footer_lines(self) -> list[str]:
        lines = [f"# reference: {self.reference}, alpha: {self.alpha}"]
        for algo, (p, a, m) in self.counts.items():
            lines.append(f"# +/≈/- {algo}: {p}/{a}/{m}")
        for algo, r in self.ranks.items():
            lines.append(f"# avg_rank {algo}: {r:.3f}")
        return lines

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for row in self.rows:
            w.writerow(row.cells())
        for line in self.footer_lines():
            buf.write(line + "\n")
        return buf.getvalue()

    def to_text(self) -> str:
        table = [REPORT_COLUMNS] + [r.cells() for r in self.rows]
        widths = [max(len(r[c]) for r in table) for c in range(len(REPORT_COLUMNS))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in table]
        lines.append("")
        lines += [l.lstrip("# ") for l in self.footer_lines()]
        return "\n".join(lines) + "\n"


def build_report(
    reference: str,
    samples: Samples,
    alpha: float = 0.05,
) -> ComparisonReport:
    """Means, spreads, verdicts and ranks for every (problem, algorithm) cell."""
    matrix = verdicts(reference, samples, alpha)
    rows = []
    means: dict[str, dict[str, float]] = {}
    for problem, by_algo in samples.items():
        means[problem] = {}
        for algo, values in by_algo.items():
            v = np.asarray(values, dtype=float)
            mean = float(v.mean())
            std = float(v.std(ddof=1)) if v.size > 1 else 0.0
            means[problem][algo] = mean
            if algo == reference:
                rows.append(ReportRow(problem, algo, mean, std))
            else:
                c = matrix.get(problem, algo)
                rows.append(ReportRow(problem, algo, mean, std, c.verdict.value, c.p_raw, c.p_adjusted))
    return ComparisonReport(reference, alpha, rows, matrix.counts(), average_ranks(means))
