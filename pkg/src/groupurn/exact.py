"""Exact law of the urn chain by breadth-first expansion over time layers.

Every reachable count vector at time ``t0 + k`` is kept with its probability;
each layer is pushed forward through the transition kernel.  Rational
arithmetic is the default, so this module can serve as ground truth for the
Monte Carlo paths.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .groups import FiniteGroup
from .urn import UrnState, _check, kernel_numerators

MAX_SUPPORT = 10**7


class SupportTooLarge(ValueError):
    def __init__(self, bound: int, limit: int):
        super().__init__(f"support bound {bound} exceeds limit {limit}")
        self.bound = bound
        self.limit = limit


@dataclass
class ExactDistribution:
    t: int
    probs: dict[tuple[int, ...], Fraction | float]

    def __len__(self) -> int:
        return len(self.probs)

    def total(self):
        return sum(self.probs.values())

    def __getitem__(self, counts) -> Fraction | float:
        return self.probs.get(tuple(counts), 0)

    def mean_densities(self):
        """Marginal means ``E[p_i]`` under this law."""
        d = len(next(iter(self.probs)))
        acc = [0] * d
        for c, p in self.probs.items():
            for i, n in enumerate(c):
                acc[i] += p * n
        return tuple(a / self.t for a in acc)

    def expectation(self, f):
        return sum(p * f(UrnState(c)) for c, p in self.probs.items())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "counts", "probability"])
        for c in sorted(self.probs):
            p = self.probs[c]
            ps = f"{p.numerator}/{p.denominator}" if isinstance(p, Fraction) else repr(float(p))
            w.writerow([self.t, "|".join(str(x) for x in c), ps])
        return buf.getvalue()


def support_bound(d: int, steps: int) -> int:
    """Number of ways to distribute ``steps`` added balls over ``d`` labels."""
    return comb(steps + d - 1, d - 1)


def _push(group: FiniteGroup, layer: dict, exact: bool) -> dict:
    nxt: dict = {}
    for c, p in layer.items():
        m = kernel_numerators(group, c)
        t2 = sum(c) ** 2
        for j in np.nonzero(m)[0].tolist():
            q = Fraction(int(m[j]), t2) if exact else float(m[j]) / t2
            key = c[:j] + (c[j] + 1,) + c[j + 1:]
            nxt[key] = nxt.get(key, 0) + p * q
    return nxt


def evolve_layers(group: FiniteGroup, initial: UrnState, steps: int, exact: bool = True,
                  max_support: int = MAX_SUPPORT):
    """Yield the exact distribution at ``t0, t0+1, ..., t0+steps``."""
    _check(group, initial)
    if steps < 0:
        raise ValueError("steps must be non-negative")
    bound = support_bound(group.order, steps)
    if bound > max_support:
        raise SupportTooLarge(bound, max_support)
    layer = {initial.counts: Fraction(1) if exact else 1.0}
    t = initial.t
    yield ExactDistribution(t, layer)
    for _ in range(steps):
        layer = _push(group, layer, exact)
        t += 1
        yield ExactDistribution(t, layer)


def evolve_exact(group: FiniteGroup, initial: UrnState, steps: int, exact: bool = True,
                 max_support: int = MAX_SUPPORT) -> ExactDistribution:
    dist = None
    for dist in evolve_layers(group, initial, steps, exact, max_support):
        pass
    return dist


def one_step_expected_densities(group: FiniteGroup, state: UrnState, exact: bool = True):
    """``E[p_j(t+1) | s] = (n_j + pi_j(s)) / (t + 1)``."""
    _check(group, state)
    m = kernel_numerators(group, state.counts)
    t = state.t
    if exact:
        return tuple(Fraction(n * t * t + int(mj), t * t * (t + 1)) for n, mj in zip(state.counts, m))
    return (np.array(state.counts, dtype=float) + m / t**2) / (t + 1)


def tv_exact(state: UrnState) -> Fraction:
    d, t = state.d, state.t
    return sum(abs(Fraction(n, t) - Fraction(1, d)) for n in state.counts) / 2


def exact_expected_tv(group: FiniteGroup, initial: UrnState, steps: int, exact: bool = True,
                      max_support: int = MAX_SUPPORT):
    """``[(t, E[TV(p(t), uniform)]), ...]`` for every time in the window."""
    out = []
    for dist in evolve_layers(group, initial, steps, exact, max_support):
        if exact:
            v = sum(p * tv_exact(UrnState(c)) for c, p in dist.probs.items())
        else:
            u = 1.0 / group.order
            v = sum(p * 0.5 * sum(abs(n / dist.t - u) for n in c) for c, p in dist.probs.items())
        out.append((dist.t, v))
    return out
