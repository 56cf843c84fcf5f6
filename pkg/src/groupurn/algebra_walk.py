"""Random walk on the group algebra F_p G.

From ``x`` the walk moves to ``s x``, ``s^-1 x`` or ``x + a s`` with ``s``
uniform in a generating set and ``a`` uniform in ``F_p``.  Move weights are
configuration (uniform by default).  For tiny ``p^d`` the full transition
matrix can be built and used to check the sampler.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from .groups import FiniteGroup, _as_set, is_generating
from .seeding import as_generator

MAX_STATES = 10**4


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    k = 2
    while k * k <= p:
        if p % k == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True)
class GroupAlgebraElement:
    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) % self.p for c in self.coeffs))

    @classmethod
    def zero(cls, p: int, d: int) -> "GroupAlgebraElement":
        return cls(p, (0,) * d)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def encode(self) -> int:
        """Base-``p`` integer with ``coeffs[0]`` as the most significant digit."""
        v = 0
        for c in self.coeffs:
            v = v * self.p + c
        return v

    @classmethod
    def decode(cls, p: int, d: int, code: int) -> "GroupAlgebraElement":
        digits = []
        for _ in range(d):
            code, r = divmod(code, p)
            digits.append(r)
        return cls(p, tuple(reversed(digits)))

    def digit_string(self) -> str:
        sep = "" if self.p <= 10 else "."
        return sep.join(str(c) for c in self.coeffs)


def left_multiply(group: FiniteGroup, s: int, x: GroupAlgebraElement) -> GroupAlgebraElement:
    """``s x``: the coefficient of ``g`` becomes that of ``s^-1 g``."""
    out = [0] * group.order
    row = group.rows[s]
    for h, c in enumerate(x.coeffs):
        out[row[h]] = c
    return GroupAlgebraElement(x.p, tuple(out))


def add_scaled_generator(x: GroupAlgebraElement, a: int, s: int) -> GroupAlgebraElement:
    if not 0 <= a < x.p:
        raise ValueError(f"a={a} outside [0, {x.p})")
    c = list(x.coeffs)
    c[s] = (c[s] + a) % x.p
    return GroupAlgebraElement(x.p, tuple(c))


@dataclass(frozen=True)
class WalkConfig:
    group: FiniteGroup
    p: int
    generators: tuple[int, ...]
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        gens = tuple(_as_set(self.group, self.generators))
        if not gens or not is_generating(self.group, gens):
            raise ValueError(f"{list(gens)} does not generate the group")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (3,) or (w < 0).any() or w.sum() <= 0:
            raise ValueError(f"weights must be three non-negative numbers, got {self.weights}")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "weights", tuple(float(v) for v in w / w.sum()))

    @property
    def num_states(self) -> int:
        return self.p**self.group.order

    def moves(self, x: GroupAlgebraElement, weights=None):
        """Yield ``(probability, successor)`` for every elementary move."""
        g, S = self.group, self.generators
        w_mul, w_inv, w_add = weights or self.weights
        for s in S:
            if w_mul:
                yield w_mul / len(S), left_multiply(g, s, x)
            if w_inv:
                yield w_inv / len(S), left_multiply(g, g.inv(s), x)
            if w_add:
                for a in range(self.p):
                    yield w_add / (len(S) * self.p), add_scaled_generator(x, a, s)


def _check_x(config: WalkConfig, x0: GroupAlgebraElement):
    if x0.p != config.p or len(x0.coeffs) != config.group.order:
        raise ValueError("start element does not match the walk configuration")
    if x0.is_zero():
        warnings.warn("start element is 0, which every multiplicative move fixes", stacklevel=3)


def walk(config: WalkConfig, x0: GroupAlgebraElement, steps: int, rng, log: bool = False):
    """Run ``steps`` moves.  Returns the final element, or ``(final, codes)``
    with the encoded state after every step (index 0 is ``x0``) when ``log``."""
    _check_x(config, x0)
    gen = as_generator(rng)
    g, S, p = config.group, config.generators, config.p
    kinds = gen.choice(3, size=steps, p=config.weights)
    sidx = gen.integers(0, len(S), size=steps)
    avals = gen.integers(0, p, size=steps)
    x = x0
    codes = np.empty(steps + 1, dtype=np.int64) if log else None
    if log:
        codes[0] = x.encode()
    for k in range(steps):
        s = S[sidx[k]]
        kind = kinds[k]
        if kind == 0:
            x = left_multiply(g, s, x)
        elif kind == 1:
            x = left_multiply(g, g.inv(s), x)
        else:
            x = add_scaled_generator(x, int(avals[k]), s)
        if log:
            codes[k + 1] = x.encode()
    return (x, codes) if log else x


def transition_matrix(config: WalkConfig, exact: bool = False):
    """Dense ``p^d x p^d`` matrix, rows indexed by encoded state."""
    n = config.num_states
    if n > MAX_STATES:
        raise ValueError(f"state space {n} exceeds {MAX_STATES}")
    d = config.group.order
    if exact:
        w = tuple(Fraction(v).limit_denominator(10**9) for v in config.weights)
        P = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for q, y in config.moves(GroupAlgebraElement.decode(config.p, d, i), w):
                P[i][y.encode()] += q
        return P
    P = np.zeros((n, n))
    for i in range(n):
        for q, y in config.moves(GroupAlgebraElement.decode(config.p, d, i)):
            P[i, y.encode()] += q
    return P


def transition_counts(codes: np.ndarray, n: int) -> np.ndarray:
    """Empirical ``n x n`` transition counts along a logged walk."""
    C = np.zeros((n, n), dtype=np.int64)
    np.add.at(C, (codes[:-1], codes[1:]), 1)
    return C


@dataclass
class WalkHistogram:
    p: int
    d: int
    counts: np.ndarray
    chi2: float
    dof: int
    pvalue: float
    samples: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["state", "count"])
        for code, c in enumerate(self.counts.tolist()):
            w.writerow([GroupAlgebraElement.decode(self.p, self.d, code).digit_string(), c])
        return buf.getvalue()

    def to_json(self, extra: dict | None = None) -> str:
        doc = {"p": self.p, "d": self.d, "samples": self.samples, "chi2": self.chi2,
               "dof": self.dof, "pvalue": self.pvalue, **(extra or {})}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def chi_square_uniform(counts: np.ndarray) -> tuple[float, int, float]:
    res = stats.chisquare(np.asarray(counts, dtype=float))
    return float(res.statistic), len(counts) - 1, float(res.pvalue)


def histogram_from_codes(p: int, d: int, codes) -> WalkHistogram:
    n = p**d
    if n > MAX_STATES:
        raise ValueError(f"state space {n} exceeds {MAX_STATES}")
    counts = np.bincount(np.asarray(codes, dtype=np.int64), minlength=n)
    chi2, dof, pv = chi_square_uniform(counts)
    return WalkHistogram(p, d, counts, chi2, dof, pv, int(counts.sum()))


def empirical_distribution(config: WalkConfig, x0: GroupAlgebraElement, samples: int,
                           thinning: int, burn_in: int, master_seed) -> WalkHistogram:
    """Histogram of ``samples`` states taken every ``thinning`` steps after
    ``burn_in``, with a chi-square statistic against the uniform law."""
    if config.num_states > MAX_STATES:
        raise ValueError(f"state space {config.num_states} exceeds {MAX_STATES}")
    if samples < 1 or thinning < 1 or burn_in < 0:
        raise ValueError("need samples >= 1, thinning >= 1, burn_in >= 0")
    _, codes = walk(config, x0, burn_in + samples * thinning, master_seed, log=True)
    picked = codes[burn_in + thinning::thinning]
    return histogram_from_codes(config.p, config.group.order, picked)
