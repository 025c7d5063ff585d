"""
From per-trial results to +/≈/- verdicts
========================================

The comparison pipeline runs a rank-sum test of the reference algorithm against
each competitor, applies the Holm correction per problem, and averages the
per-problem ranks.
"""

# %%
import numpy as np

from cdeopt.stats import build_report, holm_adjust

rng = np.random.default_rng(0)
samples = {
    "easy": {"ref": rng.normal(1.0, 0.1, 30), "a": rng.normal(2.0, 0.1, 30), "b": rng.normal(1.0, 0.1, 30)},
    "hard": {"ref": rng.normal(5.0, 1.0, 30), "a": rng.normal(3.0, 1.0, 30), "b": rng.normal(6.0, 1.0, 30)},
}

# %%
# Holm's step-down procedure tests the sorted p-values against alpha/m,
# alpha/(m-1), ... and stops at the first one that fails.
print(holm_adjust([0.01, 0.02, 0.03, 0.04], alpha=0.05))

# %%
# The report is available as CSV and as an aligned text table.
report = build_report("ref", samples, alpha=0.05)
print(report.to_text())
