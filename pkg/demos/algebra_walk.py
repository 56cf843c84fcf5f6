"""
A walk on the group algebra
===========================

From x move to s x, s^-1 x or x + a s.  Every move is a bijection of
F_p^d, so the uniform law is stationary; the histogram and transition
matrix show it on a tiny case.
"""

import numpy as np

from groupurn.algebra_walk import GroupAlgebraElement, WalkConfig, empirical_distribution, transition_matrix
from groupurn.groups import cyclic

cfg = WalkConfig(cyclic(3), p=2, generators=(1,))
P = transition_matrix(cfg)
print(np.round(P, 3))
print("column sums:", P.sum(axis=0))

hist = empirical_distribution(cfg, GroupAlgebraElement(2, (1, 0, 0)), samples=5000, thinning=20, burn_in=1000,
                              master_seed=4)
print(hist.to_csv())
print(f"chi2={hist.chi2:.2f} on {hist.dof} dof, p={hist.pvalue:.3f}")
