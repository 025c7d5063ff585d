"""
Winner-to-best mutation as a fusion of two classic operators
============================================================

A random competitor meets the current individual, and the better of the two
becomes the base vector. If the competitor wins, the operator behaves like
DE/rand-to-best/1. If the incumbent wins, it behaves like DE/cur-to-best/1.
"""

# %%
import numpy as np

from cdeopt.core import Evaluation, Population, RngStream
from cdeopt.engine import mutate_winner_to_best

x = np.array([[4.0, 4.0], [1.0, 0.0], [0.0, 0.0], [2.0, 1.0], [0.0, 3.0], [3.0, 3.0]])


def population(objectives):
    return Population(x, [Evaluation(float(f)) for f in objectives])


# %%
# With both scale factors at zero the mutant is the base vector itself, which
# exposes who won the competition. Row 2 is the population best.
weak_incumbent = population([9, 1, 0, 2, 3, 4])
strong_incumbent = population([0.5, 1, 0, 2, 3, 4])
for label, pop in (("weak incumbent", weak_incumbent), ("strong incumbent", strong_incumbent)):
    base = mutate_winner_to_best(pop, 0, 0.0, 0.0, RngStream(3), best=2)
    print(f"{label:>16}: base vector {base}")

# %%
# With F1 = 1 the base is pulled all the way onto the best vector and only
# the differential term remains.
v = mutate_winner_to_best(weak_incumbent, 0, 1.0, 0.5, RngStream(3), best=2)
print("mutant with F1=1, F2=0.5:", v)
