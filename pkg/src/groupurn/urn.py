"""The urn chain: states, the transition kernel, stepping and simulation.

An urn over a group ``G`` of order ``d`` holds ``n_i`` balls labeled ``g_i``;
``t = sum(n_i)``.  Each step draws two balls with replacement and adds a ball
labeled with their product, so label ``j`` is added with probability::

    pi_j(s) = sum_g p_g(s) * p_{g^-1 g_j}(s),      p_i = n_i / t.

Analysis functions take ``exact=True`` for :class:`fractions.Fraction`
results; the default float mode returns numpy arrays.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from . import _kernels
from .groups import FiniteGroup
from .seeding import as_generator, seed_provenance

#: Largest horizon the ball-list simulator will allocate (int32 per ball).
MAX_HORIZON = 2**30

# Draws are generated in fixed-size chunks; changing this changes streams.
_CHUNK = 1 << 16


def to_fraction(x) -> Fraction:
    """Read a number as an exact rational; floats go through their repr so
    ``0.4`` means ``2/5``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"not a finite number: {x}")
        return Fraction(repr(float(x)))
    return Fraction(str(x))


@dataclass(frozen=True)
class UrnState:
    counts: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(v) for v in self.counts)
        if not c:
            raise ValueError("an urn state needs at least one label")
        if min(c) < 0:
            raise ValueError(f"counts must be non-negative: {c}")
        if sum(c) < 1:
            raise ValueError("an urn must contain at least one ball")
        object.__setattr__(self, "counts", c)

    @property
    def t(self) -> int:
        return sum(self.counts)

    @property
    def d(self) -> int:
        return len(self.counts)

    @classmethod
    def from_labels(cls, group: FiniteGroup, labels: Sequence[int]) -> "UrnState":
        """Urn holding one ball per entry of ``labels`` (element indices)."""
        c = [0] * group.order
        for i in labels:
            if not 0 <= int(i) < group.order:
                raise ValueError(f"element index {i} out of range")
            c[int(i)] += 1
        return cls(tuple(c))

    def incremented(self, j: int) -> "UrnState":
        c = list(self.counts)
        c[j] += 1
        return UrnState(tuple(c))

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)


def _check(group: FiniteGroup, state: UrnState):
    if state.d != group.order:
        raise ValueError(f"state has {state.d} counts but the group has order {group.order}")


def densities(state: UrnState, exact: bool = False):
    t = state.t
    if exact:
        return tuple(Fraction(n, t) for n in state.counts)
    return np.array(state.counts, dtype=np.float64) / t


def kernel_numerators(group: FiniteGroup, counts) -> np.ndarray:
    """Integer vector ``m`` with ``pi_j = m_j / t**2``; works on a batch of
    count vectors (last axis = labels).  Exact: uses Python ints once ``t``
    is large enough to risk int64 overflow."""
    n = np.asarray(counts)
    t_max = int(n.sum(axis=-1).max())
    if t_max >= 2**31:
        n = np.array(n.tolist(), dtype=object)
    else:
        n = n.astype(np.int64)
    # m[..., j] = sum_g n[..., g] * n[..., g^-1 g_j]
    return np.einsum("...g,...gj->...j", n, n[..., group.left_div])


def transition_probabilities(group: FiniteGroup, state: UrnState, exact: bool = False):
    _check(group, state)
    m = kernel_numerators(group, state.counts)
    t2 = state.t**2
    if exact:
        return tuple(Fraction(int(v), t2) for v in m)
    return m.astype(np.float64) / t2


def step(group: FiniteGroup, state: UrnState, rng) -> tuple[UrnState, int]:
    """One transition.  Draws two ball positions uniformly from ``[0, t)``
    via ``rng.integers``; balls are ordered by label (all label-0 balls
    first)."""
    _check(group, state)
    t = state.t
    b = rng.integers(0, t, size=2)
    cum = np.cumsum(state.counts)
    i, j = (int(np.searchsorted(cum, int(x), side="right")) for x in b)
    added = group.mul(i, j)
    return state.incremented(added), added


def in_sigma(state: UrnState, alpha) -> bool:
    """Whether every density is at least ``alpha`` (exact comparison)."""
    a = to_fraction(alpha)
    if not 0 <= a <= Fraction(1, state.d):
        raise ValueError(f"alpha={alpha} outside [0, 1/{state.d}]")
    return min(state.counts) * a.denominator >= a.numerator * state.t


def kernel_lower_bound(alpha, d: int):
    """``2*alpha - d*alpha**2``; returns a Fraction for rational input."""
    exact = isinstance(alpha, (Fraction, int))
    a = to_fraction(alpha)
    if d < 1 or not 0 <= a <= Fraction(1, d):
        raise ValueError(f"alpha={alpha} outside [0, 1/{d}]")
    v = 2 * a - d * a * a
    return v if exact else float(v)


# ---------------------------------------------------------------------------
# Recording schedules


@dataclass(frozen=True)
class Schedule:
    """When to snapshot a run: ``linear`` (every ``stride`` balls from the
    start), ``geometric`` (t0, t0*base, t0*base^2, ... rounded up) or
    ``explicit`` times.  Only times inside ``[t0, horizon]`` are kept."""

    kind: str
    stride: int = 1
    base: Fraction = Fraction(2)
    times: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind == "linear" and self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.kind == "geometric":
            object.__setattr__(self, "base", to_fraction(self.base))
            if self.base <= 1:
                raise ValueError("geometric base must exceed 1")
        if self.kind == "explicit":
            if not self.times:
                raise ValueError("explicit schedule needs at least one time")
            object.__setattr__(self, "times", tuple(sorted(set(int(x) for x in self.times))))
        if self.kind not in ("linear", "geometric", "explicit"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")

    @classmethod
    def linear(cls, stride: int = 1) -> "Schedule":
        return cls("linear", stride=stride)

    @classmethod
    def geometric(cls, base=2) -> "Schedule":
        return cls("geometric", base=base)

    @classmethod
    def explicit(cls, times) -> "Schedule":
        return cls("explicit", times=tuple(times))

    @classmethod
    def parse(cls, text: str) -> "Schedule":
        """``linear:S``, ``geometric:B`` or ``times:T1,T2,...``."""
        kind, _, arg = text.partition(":")
        if kind == "linear":
            return cls.linear(int(arg or 1))
        if kind == "geometric":
            return cls.geometric(arg or 2)
        if kind == "times":
            return cls.explicit(int(x) for x in arg.split(",") if x.strip())
        raise ValueError(f"unknown schedule {text!r}")

    def describe(self) -> str:
        if self.kind == "linear":
            return f"linear:{self.stride}"
        if self.kind == "geometric":
            return f"geometric:{self.base}"
        return "times:" + ",".join(str(x) for x in self.times)

    def resolve(self, t0: int, horizon: int) -> np.ndarray:
        if self.kind == "linear":
            return np.arange(t0, horizon + 1, self.stride, dtype=np.int64)
        if self.kind == "explicit":
            return np.array([x for x in self.times if t0 <= x <= horizon], dtype=np.int64)
        out = []
        x = Fraction(t0)
        while x <= horizon:
            v = math.ceil(x)
            if not out or v > out[-1]:
                out.append(v)
            x *= self.base
        return np.array(out, dtype=np.int64)


# ---------------------------------------------------------------------------
# Simulation


@dataclass
class Trajectory:
    group: FiniteGroup
    initial: UrnState
    schedule: Schedule
    horizon: int
    times: np.ndarray
    counts: np.ndarray
    seed: dict | None = None
    added: np.ndarray | None = field(default=None, repr=False)
    coverage_time: int | None = None

    def __len__(self) -> int:
        return len(self.times)

    def state(self, k: int) -> UrnState:
        return UrnState(tuple(self.counts[k].tolist()))

    def states(self):
        return [self.state(k) for k in range(len(self))]

    @property
    def final(self) -> UrnState:
        return self.state(len(self) - 1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"n_{i}" for i in range(self.group.order)])
        for t, row in zip(self.times.tolist(), self.counts.tolist()):
            w.writerow([t, *row])
        return buf.getvalue()

    def to_json(self, config: dict | None = None) -> str:
        doc = {
            "group_order": self.group.order,
            "labels": list(self.group.labels),
            "initial": list(self.initial.counts),
            "horizon": self.horizon,
            "schedule": self.schedule.describe(),
            "seed": self.seed,
            "config": config,
            "snapshots": [
                {"t": t, "counts": row} for t, row in zip(self.times.tolist(), self.counts.tolist())
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def run_urn(group: FiniteGroup, initial: UrnState, horizon: int, rec_times: np.ndarray,
            gen: np.random.Generator, keep_balls: bool = False):
    """Low-level run.  Returns ``(snapshots, coverage_time, balls)``.

    ``coverage_time`` is the first time every label is present (``None`` if it
    never happens by ``horizon``).  ``balls`` is the full label log when
    ``keep_balls`` is set.
    """
    _check(group, initial)
    t0 = initial.t
    if horizon < t0:
        raise ValueError(f"horizon {horizon} is before the initial time {t0}")
    if horizon > MAX_HORIZON:
        raise ValueError(f"horizon {horizon} exceeds MAX_HORIZON={MAX_HORIZON}")
    counts = initial.as_array()
    balls = np.empty(horizon, dtype=np.int32)
    balls[:t0] = np.repeat(np.arange(group.order, dtype=np.int32), counts)
    rec = np.ascontiguousarray(rec_times, dtype=np.int64)
    out = np.zeros((len(rec), group.order), dtype=np.int64)
    rp = 0
    if len(rec) and rec[0] == t0:
        out[0] = counts
        rp = 1
    missing = int((counts == 0).sum())
    state = np.array([t0, rp, missing, t0 if missing == 0 else -1], dtype=np.int64)
    t = t0
    while t < horizon:
        n = min(_CHUNK, horizon - t)
        highs = np.arange(t, t + n, dtype=np.int64)[:, None]
        draws = gen.integers(0, highs, size=(n, 2), dtype=np.int64)
        _kernels.urn_chunk(group.table, balls, counts, state, draws, rec, out)
        t += n
    cover = int(state[3])
    return out, (cover if cover >= 0 else None), (balls if keep_balls else None)


def simulate(group: FiniteGroup, initial: UrnState, horizon: int, schedule: Schedule,
             rng, record_added: bool = False) -> Trajectory:
    """Run the urn from ``initial`` until it holds ``horizon`` balls.

    Deterministic given ``(group, initial, horizon, schedule, seed)``; ``rng``
    may be an int seed, a ``SeedSequence`` or a ``Generator``.
    """
    if horizon <= initial.t:
        raise ValueError(f"horizon {horizon} must exceed the initial time {initial.t}")
    rec = schedule.resolve(initial.t, horizon)
    if not len(rec):
        raise ValueError("schedule selects no times in [t0, horizon]")
    gen = as_generator(rng)
    out, cover, balls = run_urn(group, initial, horizon, rec, gen, keep_balls=record_added)
    added = balls[initial.t:].copy() if record_added else None
    return Trajectory(group, initial, schedule, horizon, rec, out, seed_provenance(rng), added, cover)
