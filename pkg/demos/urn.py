"""
Simulating the urn
==================

Two balls are drawn with replacement and a ball labelled by their product
is added.  Densities drift towards uniform.
"""

import numpy as np

from groupurn.groups import symmetric
from groupurn.urn import Schedule, UrnState, simulate, transition_probabilities

g = symmetric(3)
start = UrnState.from_labels(g, [g.index("132"), g.index("231")])

# the law of the next label, exactly
print(transition_probabilities(g, start, exact=True))

tr = simulate(g, start, 100_000, Schedule.geometric(4), rng=7)
for t, row in zip(tr.times, tr.counts):
    p = row / t
    print(f"t={t:>6}  densities {np.round(p, 4)}")

# the full snapshot table as CSV
print(tr.to_csv().splitlines()[0])
