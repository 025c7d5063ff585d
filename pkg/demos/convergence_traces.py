"""
Convergence traces
==================

Every run records the best objective after each generation. Averaging the
traces over trials gives the data behind a convergence plot.
"""

# %%
import numpy as np

from cdeopt import get_problem
from cdeopt.engine import cde_config, de_config, run

problem = get_problem("rastrigin:10")
budget = 500 * problem.dimension

# %%
# Trace checkpoints can be chosen explicitly; each one reports the best value
# of the last complete generation not past it.
checkpoints = [500, 1000, 2000, 3000, 4000, 5000]
curves = {}
for label, preset in (("cde", cde_config), ("de", de_config)):
    runs = [run(problem, preset(budget, seed=s, trace_checkpoints=checkpoints)) for s in range(5)]
    curves[label] = np.mean([r.trace.best_objective for r in runs], axis=0)

print(f"{'fe':>6} {'cde':>12} {'de':>12}")
for k, fe in enumerate(checkpoints):
    print(f"{fe:>6} {curves['cde'][k]:>12.4e} {curves['de'][k]:>12.4e}")

# %%
# Greedy one-to-one selection never loses a good design, so the
# best-so-far curve is non-increasing.
assert all(np.all(np.diff(c) <= 0) for c in curves.values())
