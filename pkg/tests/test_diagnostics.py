from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupurn.diagnostics import (
    InsufficientPoints,
    ensemble,
    fit_power_law,
    min_count_growth,
    nearest_rank,
    rate_scan,
    run_trials,
    sigma_hitting_time,
    statistic_fn,
    summarize,
    support_coverage_time,
    tv_to_uniform,
)
from groupurn.exact import evolve_exact
from groupurn.groups import cyclic, symmetric
from groupurn.urn import Schedule, UrnState, simulate


class TestTV:
    def test_examples(self):
        assert tv_to_uniform((F(1, 2), F(1, 2))) == 0
        assert tv_to_uniform((F(1), F(0))) == F(1, 2)
        assert tv_to_uniform((F(2, 3), F(1, 3))) == F(1, 6)
        assert tv_to_uniform([0.25] * 4) == 0.0

    @given(st.lists(st.integers(0, 50), min_size=1, max_size=8).filter(lambda c: sum(c) > 0))
    def test_range_and_agreement(self, c):
        t = sum(c)
        exact = tv_to_uniform(tuple(F(x, t) for x in c))
        assert 0 <= exact <= 1 - F(1, len(c))
        assert abs(float(exact) - tv_to_uniform(np.array(c) / t)) < 1e-12
        assert abs(float(exact) - statistic_fn("tv")(np.array(c))) < 1e-12


class TestHittingTimes:
    def test_sigma_hitting(self):
        assert sigma_hitting_time([(3, 1), (3, 2)], 0.4) == 5
        assert sigma_hitting_time([(3, 1), (4, 1)], 0.4) is None
        assert sigma_hitting_time([(1, 1)], 0.5) == 2
        with pytest.raises(ValueError):
            sigma_hitting_time([(1, 1)], 0.6)

    def test_coverage(self):
        assert support_coverage_time([(1, 0, 0), (1, 1, 0), (1, 1, 1)]) == 3
        assert support_coverage_time([(1, 0), (2, 0)]) is None
        assert support_coverage_time([UrnState((1, 1))]) == 2

    def test_min_count_growth(self):
        assert min_count_growth([(1, 1, 1), (5, 3, 4)], 3) == 12
        assert min_count_growth([(5, 3, 4)], 4) is None
        with pytest.raises(ValueError):
            min_count_growth([(1,)], 0)

    def test_on_trajectory(self):
        tr = simulate(cyclic(3), UrnState((1, 1, 1)), 50, Schedule.linear(1), 0)
        assert support_coverage_time(tr) == 3
        assert sigma_hitting_time(tr, 0) == 3


class TestEnsemble:
    def test_single_trial_has_zero_spread(self):
        s = ensemble(cyclic(2), UrnState((1, 1)), 200, Schedule.geometric(2), 1, "tv", 4)
        assert np.all(s.std == 0)
        assert np.array_equal(s.q025, s.q975)

    def test_determinism_and_csv(self):
        args = (symmetric(3), UrnState((0, 1, 0, 1, 0, 0)), 500, Schedule.geometric(2), 30, "tv", 11)
        a, b = ensemble(*args), ensemble(*args)
        assert a.to_csv() == b.to_csv()
        assert a.to_csv().splitlines()[0] == "t,mean,std,q025,median,q975,trials"

    def test_worker_count_does_not_matter(self):
        g, s = cyclic(3), UrnState((2, 1, 0))
        a = run_trials(g, s, 3000, Schedule.geometric(2), 40, 5, workers=1)
        b = run_trials(g, s, 3000, Schedule.geometric(2), 40, 5, workers=8)
        assert np.array_equal(a.counts, b.counts)
        assert np.array_equal(a.coverage, b.coverage)

    def test_quantiles_ordered(self):
        s = ensemble(cyclic(4), UrnState((1, 1, 0, 0)), 2000, Schedule.geometric(2), 80, "tv", 2)
        assert np.all(s.q025 <= s.median) and np.all(s.median <= s.q975)
        assert np.all(s.q025 <= s.mean + 1e-15) and np.all(s.mean <= s.q975 + 1e-15)

    def test_nearest_rank(self):
        v = np.arange(1, 11, dtype=float)
        assert nearest_rank(v, 0.5) == 5
        assert nearest_rank(v, 0.975) == 10
        assert nearest_rank(v, 0.025) == 1

    def test_summarize_population_std(self):
        s = summarize(np.array([[1.0], [3.0]]), np.array([2]), "tv", 0)
        assert s.at(2) == {"mean": 2.0, "std": 1.0, "q025": 1.0, "median": 1.0, "q975": 3.0}
        with pytest.raises(KeyError):
            s.at(3)

    def test_z2_tv_shrinks(self):
        s = ensemble(cyclic(2), UrnState((1, 1)), 10_000, Schedule.explicit([100, 1000, 10_000]),
                     10_000, "tv", 2024)
        m = s.mean.tolist()
        assert m[0] > m[1] > m[2]

    def test_mean_density_matches_exact_engine(self):
        g, s, steps, trials = cyclic(2), UrnState((1, 1)), 10, 40_000
        want = float(evolve_exact(g, s, steps).mean_densities()[1])
        ts = run_trials(g, s, s.t + steps, Schedule.explicit([s.t + steps]), trials, 8)
        v = ts.values("density:1")[:, 0]
        assert abs(v.mean() - want) < 4 * v.std() / np.sqrt(trials)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            ensemble(cyclic(2), UrnState((1, 1)), 100, Schedule.linear(1), 0, "tv", 1)
        with pytest.raises(ValueError):
            ensemble(cyclic(2), UrnState((1, 1)), 100, Schedule.linear(1), 2, "nope", 1)
        with pytest.raises(ValueError):
            run_trials(cyclic(2), UrnState((1, 1)), 2, Schedule.linear(1), 2, 1)


class TestPowerLaw:
    def test_recovers_exponent(self):
        t = 2.0 ** np.arange(2, 14)
        fit = fit_power_law(t, 3 * t ** -0.5)
        assert abs(fit.exponent - 0.5) < 1e-12
        assert abs(fit.coefficient - 3) < 1e-9
        assert fit.residual < 1e-20

    def test_constant(self):
        fit = fit_power_law([1, 2, 4, 8, 16], [0.2] * 5)
        assert abs(fit.exponent) < 1e-12

    def test_nonpositive_excluded(self):
        fit = fit_power_law([1, 2, 4, 8, 16, 32], [0, 1, 0.5, 0.25, 0.125, -1])
        assert fit.excluded == 2 and fit.points == 4
        assert abs(fit.exponent - 1) < 1e-12
        with pytest.raises(InsufficientPoints):
            fit_power_law([1, 2, 4, 8], [1, 0, 1, 1])

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.05, 3), st.floats(0.01, 100))
    def test_exact_power_laws(self, c, a):
        t = np.geomspace(4, 4096, 11)
        fit = fit_power_law(t, a * t ** -c)
        assert abs(fit.exponent - c) < 1e-8

    def test_rate_scan_runs(self):
        fit = rate_scan(cyclic(3), UrnState((1, 1, 1)), 4096, 50, 3)
        assert fit.window[0] >= 3
        assert fit.exponent > 0
        assert '"exponent"' in fit.to_json()
