from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest

from groupurn.diagnostics import run_trials
from groupurn.exact import (
    SupportTooLarge,
    evolve_exact,
    evolve_layers,
    exact_expected_tv,
    one_step_expected_densities,
    support_bound,
)
from groupurn.groups import cyclic, symmetric
from groupurn.urn import Schedule, UrnState


def brute_law(group, counts, steps):
    """Enumerate every sequence of ordered ball draws."""
    law = {tuple(counts): F(1)}
    for _ in range(steps):
        nxt = {}
        for c, p in law.items():
            balls = [i for i, n in enumerate(c) for _ in range(n)]
            w = p / len(balls) ** 2
            for a, b in product(balls, repeat=2):
                x = group.mul(a, b)
                key = c[:x] + (c[x] + 1,) + c[x + 1:]
                nxt[key] = nxt.get(key, 0) + w
        law = nxt
    return law


class TestEvolveExact:
    def test_z2_one_step(self):
        dist = evolve_exact(cyclic(2), UrnState((1, 1)), 1)
        assert dist.probs == {(2, 1): F(1, 2), (1, 2): F(1, 2)}

    def test_z2_two_steps(self):
        # (2,1) ->(3,1) w.p. 5/9, (1,2) ->(2,2) w.p. 5/9; label 0 is the identity so
        # the law is not symmetric under swapping labels
        dist = evolve_exact(cyclic(2), UrnState((1, 1)), 2)
        assert dist.probs == {(3, 1): F(5, 18), (2, 2): F(1, 2), (1, 3): F(2, 9)}

    def test_zero_steps(self):
        s = UrnState((2, 0, 1))
        dist = evolve_exact(cyclic(3), s, 0)
        assert dist.probs == {(2, 0, 1): 1}

    @pytest.mark.parametrize("group, counts, steps", [
        (cyclic(2), (1, 1), 4),
        (cyclic(3), (1, 0, 1), 3),
        (symmetric(3), (0, 1, 0, 1, 0, 0), 3),
    ])
    def test_matches_brute_force(self, group, counts, steps):
        assert evolve_exact(group, UrnState(counts), steps).probs == brute_law(group, counts, steps)

    def test_layer_invariants(self):
        s = UrnState((1, 2, 0))
        for dist in evolve_layers(cyclic(3), s, 6):
            assert dist.total() == 1
            for c in dist.probs:
                assert sum(c) == dist.t
                assert all(a >= b for a, b in zip(c, s.counts))

    def test_float_mode(self):
        ex = evolve_exact(cyclic(3), UrnState((1, 1, 1)), 6)
        fl = evolve_exact(cyclic(3), UrnState((1, 1, 1)), 6, exact=False)
        assert abs(fl.total() - 1) < 1e-12 * len(fl)
        assert all(abs(fl[c] - float(p)) < 1e-14 for c, p in ex.probs.items())

    def test_support_guard(self):
        assert support_bound(3, 8) == 45
        with pytest.raises(SupportTooLarge) as ei:
            evolve_exact(symmetric(3), UrnState((1,) * 6), 40, max_support=1000)
        assert ei.value.bound == support_bound(6, 40)

    def test_csv(self):
        text = evolve_exact(cyclic(2), UrnState((1, 1)), 2).to_csv()
        assert text.splitlines() == ["t,counts,probability", "4,1|3,2/9", "4,2|2,1/2", "4,3|1,5/18"]


class TestExpectations:
    def test_examples(self):
        assert one_step_expected_densities(cyclic(2), UrnState((2, 1))) == (F(23, 36), F(13, 36))
        assert one_step_expected_densities(cyclic(2), UrnState((1, 1))) == (F(1, 2), F(1, 2))
        assert one_step_expected_densities(cyclic(3), UrnState((1, 1, 1))) == (F(1, 3),) * 3

    def test_z2_contraction_exhaustive(self):
        g = cyclic(2)
        for t in range(1, 31):
            for n1 in range(t + 1):
                s = UrnState((t - n1, n1))
                p1 = F(n1, t)
                e = p1 - F(1, 2)
                # all-zero start is absorbing; all-one start moves since 1*1 = 0
                nxt = one_step_expected_densities(g, s)[1]
                assert nxt - F(1, 2) == e * (t - 2 * e) / (t + 1)
                assert abs(nxt - F(1, 2)) <= abs(e)
                assert (abs(nxt - F(1, 2)) == abs(e)) == (p1 in (0, F(1, 2)))

    def test_expectation_consistency(self):
        g, s = symmetric(3), UrnState((0, 1, 0, 1, 0, 0))
        layers = list(evolve_layers(g, s, 5))
        for k in range(len(layers) - 1):
            pushed = [F(0)] * g.order
            for c, p in layers[k].probs.items():
                for i, v in enumerate(one_step_expected_densities(g, UrnState(c))):
                    pushed[i] += p * v
            assert tuple(pushed) == layers[k + 1].mean_densities()

    def test_expected_tv(self):
        out = dict(exact_expected_tv(cyclic(2), UrnState((1, 1)), 1))
        assert out[2] == 0
        assert out[3] == F(1, 6)
        assert dict(exact_expected_tv(cyclic(2), UrnState((3, 1)), 0))[4] == F(1, 4)


def test_monte_carlo_agreement_small():
    g, s, steps, trials = cyclic(3), UrnState((1, 1, 1)), 5, 20_000
    exact = evolve_exact(g, s, steps)
    ts = run_trials(g, s, s.t + steps, Schedule.explicit([s.t + steps]), trials, 77, workers=1)
    finals = [tuple(r) for r in ts.counts[:, -1, :].tolist()]
    seen = {}
    for c in finals:
        seen[c] = seen.get(c, 0) + 1
    assert set(seen) <= set(exact.probs)
    for c, p in exact.probs.items():
        p = float(p)
        assert abs(seen.get(c, 0) / trials - p) <= 4 * np.sqrt(p * (1 - p) / trials)
