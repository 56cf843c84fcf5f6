"""
Checking the lemmas
===================

The kernel lower bound is an exact inequality; density amplification,
the Chernoff tail and the subgroup coupling are checked by simulation
against their bounds.
"""

from groupurn.groups import cyclic, dihedral, symmetric
from groupurn.lemmas import (BernoulliComparison, bernoulli_tail_check, check_lemma_3_1, coupled_subgroup_run,
                             f1_threshold, f3_threshold, plan_amplification, run_amplification_experiment,
                             support_coverage_experiment)
from groupurn.urn import UrnState

# min_j pi_j >= 2a - d a^2, in integers
rep = check_lemma_3_1(symmetric(4), num_states=2000, rng=1)
print(rep)

# gamma is chosen so that the Chernoff fraction comes out at 0.9
plan = plan_amplification(d=2, alpha=0.25, r=1.4, delta_target=0.9)
print({k: round(v, 6) if isinstance(v, float) else v for k, v in plan.as_dict().items()})
exp = run_amplification_experiment(cyclic(2), plan, T=400, trials=2000, master_seed=5)
print(exp.verdict, exp.empirical_failure, "<= bound", exp.analytic_bound)

print(bernoulli_tail_check(BernoulliComparison(0.3, 200, 0.8), trials=50_000, master_seed=1).to_json())

print(f1_threshold(0.5, 2), f3_threshold(0.3))

# the complement of the rotations never falls behind the two-colour urn
d4 = dihedral(4)
tr = coupled_subgroup_run(d4, range(4), UrnState.from_labels(d4, [1, 4]), 5000, rng=2)
print("dominates:", tr.dominates(), " first t with p > 1/4:", tr.first_exceeding())

s3 = symmetric(3)
cov = support_coverage_experiment(s3, [s3.index("132"), s3.index("231")], trials=300, horizon=5000, master_seed=8)
print(cov.details["fraction_covered"], cov.details["median_coverage_time"])
