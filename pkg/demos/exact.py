"""
Exact law of the urn
====================

For small groups and few steps the law of the count vector can be
enumerated layer by layer in rational arithmetic.
"""

from groupurn.diagnostics import tv_to_uniform
from groupurn.exact import evolve_exact, evolve_layers, exact_expected_tv, one_step_expected_densities
from groupurn.groups import cyclic
from groupurn.urn import UrnState

g = cyclic(2)
s = UrnState((1, 1))

for dist in evolve_layers(g, s, 3):
    print(dist.t, dict(sorted(dist.probs.items())))

# label 0 is the identity, so the law is not symmetric in the two labels
d = evolve_exact(g, s, 4)
print("E[p] at t=6:", d.mean_densities())

# the expected density moves towards 1/2 in one step
print(one_step_expected_densities(g, UrnState((2, 1))))

# expected distance to uniform, exactly
for t, tv in exact_expected_tv(g, s, 6):
    print(t, tv, float(tv))

print(tv_to_uniform(d.mean_densities()))
print(d.to_csv())
