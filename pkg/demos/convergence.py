"""
Convergence over many trials
============================

Each trial gets its own stream derived from the master seed, so the
summary is the same for any number of worker threads.
"""

from groupurn.diagnostics import ensemble, rate_scan, sigma_hitting_time
from groupurn.groups import symmetric
from groupurn.urn import Schedule, UrnState, simulate

g = symmetric(3)
start = UrnState.from_labels(g, [g.index("132"), g.index("231")])

summ = ensemble(g, start, 20_000, Schedule.geometric(2), trials=500, statistic="tv", master_seed=3)
print(summ.to_csv())

# how fast the mean distance shrinks; exploratory only
fit = rate_scan(g, start, 20_000, trials=500, master_seed=3)
print(f"tv ~ {fit.coefficient:.3f} t^-{fit.exponent:.3f} over t in {fit.window}")

# first time every density is at least 0.1 on one run
tr = simulate(g, start, 20_000, Schedule.linear(1), rng=3)
print("hits Sigma_0.1 at t =", sigma_hitting_time(tr, 0.1))
