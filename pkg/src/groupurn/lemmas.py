"""Checks of the quantitative lemmas behind the convergence proof.

Deterministic inequalities are checked in exact integer/rational arithmetic.
Probabilistic statements are checked by Monte Carlo against their analytic
bounds with a four-standard-error allowance.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .diagnostics import default_workers, nearest_rank, run_trials
from .groups import FiniteGroup, _as_set, is_generating, is_subgroup
from .seeding import as_generator, seed_provenance, trial_generator
from .urn import Schedule, UrnState, _check, kernel_numerators, run_urn, to_fraction

SIGMAS = 4.0


@dataclass
class ExperimentReport:
    lemma: str
    parameters: dict
    trials: int
    empirical_failure: float | None
    analytic_bound: float | None
    seed: int | None
    verdict: str
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> str:
        return json.dumps(_jsonable(asdict(self)), indent=2, sort_keys=True) + "\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def _within_bound(empirical: float, bound: float, n: int) -> bool:
    ref = min(max(bound, empirical), 1.0)
    return empirical <= bound + SIGMAS * math.sqrt(ref * (1 - ref) / n)


# ---------------------------------------------------------------------------
# kernel lower bound


@dataclass
class KernelCheck:
    """Outcome of checking normalization and ``min_j pi_j >= 2a - d a^2``."""

    states: int
    normalization_failures: int
    bound_failures: int
    worst_slack: Fraction
    worst_state: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return self.normalization_failures == 0 and self.bound_failures == 0


def random_states(group: FiniteGroup, n: int, rng, max_count: int = 30) -> np.ndarray:
    """``n`` count vectors with entries uniform in ``[1, max_count]``."""
    gen = as_generator(rng)
    return gen.integers(1, max_count + 1, size=(n, group.order), dtype=np.int64)


def check_lemma_3_1(group: FiniteGroup, num_states: int = 1000, rng=0, states=None,
                    max_count: int = 30) -> KernelCheck:
    """Check the kernel on random positive states with ``alpha = min_i p_i``.

    With ``m_j = t^2 pi_j`` (integers) the claims become integer identities:
    ``sum_j m_j == t^2`` and ``min_j m_j >= 2 n_min t - d n_min^2``.
    """
    if states is None:
        states = random_states(group, num_states, rng, max_count)
    c = np.atleast_2d(np.asarray(states, dtype=np.int64))
    if c.shape[1] != group.order:
        raise ValueError("state width does not match group order")
    m = kernel_numerators(group, c)
    t = c.sum(axis=1)
    nmin = c.min(axis=1)
    d = group.order
    norm_fail = int((m.sum(axis=1) != t * t).sum())
    gap = m.min(axis=1) - (2 * nmin * t - d * nmin * nmin)
    bound_fail = int((gap < 0).sum())
    slacks = [Fraction(int(g), int(tt) ** 2) for g, tt in zip(gap, t)]
    k = min(range(len(slacks)), key=slacks.__getitem__)
    return KernelCheck(len(c), norm_fail, bound_fail, slacks[k], tuple(int(v) for v in c[k]))


# ---------------------------------------------------------------------------
# density amplification


class InfeasibleR(ValueError):
    pass


class GammaNotAboveOne(ValueError):
    pass


@dataclass(frozen=True)
class AmplificationPlan:
    """Constants of one amplification step, all exact rationals.

    ``mu = 2a/r - d a^2/r^2`` is the comparison walk's drift,
    ``gamma`` the amplification factor and ``delta = (gamma r - 1) a / ((r-1) mu)``
    the Chernoff fraction.  The failure probability after growing from ``T``
    to ``rT`` is at most ``d * exp(-(1-delta)^2 (r-1) a T / 2)``.
    """

    d: int
    alpha: Fraction
    r: Fraction
    mu: Fraction
    delta: Fraction
    gamma: Fraction
    delta_target: Fraction
    alpha_free: bool = False

    @property
    def drift_ratio(self) -> Fraction:
        return self.mu / self.alpha

    @property
    def uniform_ratio_bound(self) -> Fraction:
        return (3 * self.r - 2) / self.r**2

    @property
    def base(self) -> float:
        """``A`` with failure ``d * A**(-alpha T)``."""
        return math.exp(float((1 - self.delta) ** 2 * (self.r - 1)) / 2)

    def rederived_delta(self) -> Fraction:
        return (self.gamma * self.r - 1) * self.alpha / ((self.r - 1) * self.mu)

    def failure_bound(self, T) -> float:
        e = float((1 - self.delta) ** 2 * (self.r - 1) * self.alpha) * float(T) / 2
        return self.d * math.exp(-e)

    def as_dict(self) -> dict:
        return {
            "d": self.d, "alpha": float(self.alpha), "r": float(self.r), "mu": float(self.mu),
            "delta": float(self.delta), "gamma": float(self.gamma),
            "delta_target": float(self.delta_target), "alpha_free": self.alpha_free,
            "A": self.base,
        }


def plan_amplification(d: int, alpha, r, delta_target=Fraction(9, 10), alpha_free: bool = False) -> AmplificationPlan:
    """Choose ``gamma`` so the Chernoff fraction equals ``delta_target``.

    The default uses the actual drift ratio ``mu/alpha``.  With ``alpha_free``
    it uses the lower bound ``(3r-2)/r^2`` instead, which gives a ``gamma``
    valid for every ``alpha < (2-r)/d`` at the cost of a smaller realised
    ``delta``.
    """
    a, r, dt = to_fraction(alpha), to_fraction(r), to_fraction(delta_target)
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    if not 0 < a < Fraction(1, d):
        raise ValueError(f"alpha={alpha} outside (0, 1/{d})")
    if not 1 < r < 2 - a * d:
        raise InfeasibleR(f"r={r} outside (1, {2 - a * d})")
    if not 0 < dt < 1:
        raise ValueError(f"delta_target={delta_target} outside (0, 1)")
    mu = 2 * a / r - d * a * a / (r * r)
    ratio = (3 * r - 2) / (r * r) if alpha_free else mu / a
    gamma = (dt * (r - 1) * ratio + 1) / r
    if gamma <= 1:
        raise GammaNotAboveOne(f"delta_target={delta_target} gives gamma={float(gamma):.6g} <= 1")
    delta = (gamma * r - 1) * a / ((r - 1) * mu)
    return AmplificationPlan(d, a, r, mu, delta, gamma, dt, alpha_free)


def chernoff_bound(delta, mu, t) -> float:
    """``exp(-(1-delta)^2 mu t / 2)``: bound on ``P{X(t) < delta mu t}`` for a
    sum ``X(t)`` of ``t`` Bernoulli(``mu``) trials."""
    if not 0 <= delta <= 1:
        raise ValueError(f"delta={delta} outside [0, 1]")
    if not 0 < mu <= 1:
        raise ValueError(f"mu={mu} outside (0, 1]")
    if t < 0:
        raise ValueError(f"t={t} is negative")
    return math.exp(-((1 - delta) ** 2) * mu * t / 2)


def amplification_start(d: int, alpha, T: int) -> UrnState:
    """``ceil(alpha T)`` balls per label with the remainder on label 0."""
    a = to_fraction(alpha)
    c = math.ceil(a * T)
    if d * c > T:
        raise ValueError(f"cannot place {c} balls on each of {d} labels within T={T}")
    counts = [c] * d
    counts[0] += T - d * c
    return UrnState(tuple(counts))


def run_amplification_experiment(group: FiniteGroup, plan: AmplificationPlan, T: int, trials: int,
                                 master_seed: int, workers: int | None = None) -> ExperimentReport:
    """Start in the boundary state of ``Sigma_alpha`` at time ``T`` and count
    runs that are outside ``Sigma_{gamma alpha}`` at time ``ceil(rT)``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if plan.d != group.order:
        raise ValueError(f"plan is for d={plan.d}, group has order {group.order}")
    start = amplification_start(plan.d, plan.alpha, T)
    horizon = math.ceil(plan.r * T)
    ts = run_trials(group, start, horizon, Schedule.explicit([horizon]), trials, master_seed, workers)
    final = ts.counts[:, -1, :]
    ga = plan.gamma * plan.alpha
    # min n < gamma*alpha*t, cross-multiplied
    fail = np.array([min(row) * ga.denominator < ga.numerator * horizon for row in final.tolist()])
    emp = float(fail.mean())
    bound = plan.failure_bound(T)
    return ExperimentReport(
        lemma="density-amplification",
        parameters={**plan.as_dict(), "T": T, "rT": horizon, "start": list(start.counts)},
        trials=trials,
        empirical_failure=emp,
        analytic_bound=bound,
        seed=master_seed,
        verdict="pass" if _within_bound(emp, bound, trials) else "fail",
        details={"failures": int(fail.sum()), "gamma_alpha": float(ga),
                 "median_final_min_density": float(np.median(final.min(axis=1) / horizon))},
    )


# ---------------------------------------------------------------------------
# Bernoulli tail


@dataclass(frozen=True)
class BernoulliComparison:
    mu: float
    horizon: int
    delta: float

    def __post_init__(self):
        if not 0 < self.mu <= 1:
            raise ValueError(f"mu={self.mu} outside (0, 1]")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta={self.delta} outside (0, 1)")
        if self.horizon < 0:
            raise ValueError("horizon must be non-negative")


def bernoulli_tail_check(comp: BernoulliComparison, trials: int, master_seed: int) -> ExperimentReport:
    """Sample ``X(t) ~ Binomial(t, mu)`` and compare ``P{X < delta mu t}``
    against the Chernoff bound."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gen = as_generator(master_seed)
    x = gen.binomial(comp.horizon, comp.mu, size=trials)
    thr = to_fraction(comp.delta) * to_fraction(comp.mu) * comp.horizon
    below = x * thr.denominator < thr.numerator
    emp = float(below.mean())
    bound = chernoff_bound(comp.delta, comp.mu, comp.horizon)
    return ExperimentReport(
        lemma="chernoff",
        parameters={"mu": comp.mu, "delta": comp.delta, "t": comp.horizon, "threshold": float(thr)},
        trials=trials,
        empirical_failure=emp,
        analytic_bound=bound,
        seed=master_seed,
        verdict="pass" if _within_bound(emp, bound, trials) else "fail",
        details={"tail_probability": 1 - emp, "mean": float(x.mean())},
    )


# ---------------------------------------------------------------------------
# subgroup-growth thresholds


def f1_threshold(nu, d: int):
    """Density floor ``16 (nu/16)^(2^d)`` reached on all of <S> after 2^d T."""
    exact = isinstance(nu, (Fraction, int))
    v = to_fraction(nu)
    if not 0 <= v <= 1:
        raise ValueError(f"nu={nu} outside [0, 1]")
    if d < 1:
        raise ValueError("d must be positive")
    if exact and d <= 12:
        return 16 * (v / 16) ** (2**d)
    if v == 0:
        return 0.0
    # log space; underflows to 0.0 for large d
    return math.exp(math.log(16) + (2**d) * math.log(float(v) / 16)) if 2**d < 1e300 else 0.0


def f3_threshold(nu):
    """Density floor ``2 nu / 3`` retained on a subgroup."""
    exact = isinstance(nu, (Fraction, int))
    v = to_fraction(nu)
    if not 0 <= v <= 1:
        raise ValueError(f"nu={nu} outside [0, 1]")
    out = 2 * v / 3
    return out if exact else float(out)


# ---------------------------------------------------------------------------
# monotone coupling with a two-colour urn

_COUPLE_CHUNK = 1 << 14


@dataclass
class CouplingTrace:
    """Complement count of the G-urn and 1-count of the two-colour urn at
    every time ``t0, t0+1, ..., horizon``."""

    t0: int
    n_comp: np.ndarray
    n1: np.ndarray
    violations: int
    seed: dict | None = None
    draws: np.ndarray | None = None

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.t0, self.t0 + len(self.n_comp))

    def dominates(self) -> bool:
        return bool((self.n_comp >= self.n1).all())

    def first_exceeding(self, frac=Fraction(1, 4), after_start: bool = True) -> int | None:
        """First time ``p_{G\\H}(t) > frac`` (strictly after ``t0`` by default)."""
        f = to_fraction(frac)
        hit = self.n_comp * f.denominator > f.numerator * self.times
        if after_start:
            hit[0] = False
        idx = np.nonzero(hit)[0]
        return int(self.times[idx[0]]) if idx.size else None


def coupled_subgroup_run(group: FiniteGroup, H, initial: UrnState, horizon: int, rng,
                         record_draws: bool = False) -> CouplingTrace:
    """Run the G-urn alongside a Z/2 urn started from ``(n_H, n_{G\\H})``.

    Both urns consume the same uniforms (one per pick for the class, one per
    pick for the element within the class in the G-urn), which keeps
    ``n_{G\\H}(t) >= n_1(t)`` on every path.
    """
    _check(group, initial)
    h = _as_set(group, H)
    if not is_subgroup(group, h):
        raise ValueError(f"{list(h)} is not a subgroup")
    if len(h) == group.order:
        raise ValueError("H must be a proper subgroup")
    in_h = h.mask()
    counts = initial.as_array()
    nc0 = int(counts[~in_h].sum())
    if nc0 == 0:
        raise ValueError("initial urn has no ball outside H")
    if horizon < initial.t:
        raise ValueError("horizon precedes the initial time")
    steps = horizon - initial.t
    gen = as_generator(rng)
    n_comp = np.empty(steps + 1, dtype=np.int64)
    n1 = np.empty(steps + 1, dtype=np.int64)
    n_comp[0] = n1[0] = nc0
    state = np.array([initial.t, nc0, nc0, 0], dtype=np.int64)
    draws = np.empty((steps, 4)) if record_draws else None
    done = 0
    while done < steps:
        n = min(_COUPLE_CHUNK, steps - done)
        u = gen.random((n, 4))
        if record_draws:
            draws[done:done + n] = u
        _kernels.coupled_chunk(group.table, in_h, counts, state, u, n_comp, n1, done + 1)
        done += n
    return CouplingTrace(initial.t, n_comp, n1, int(state[3]), seed_provenance(rng), draws)


def coupling_experiment(group: FiniteGroup, H, initial: UrnState, horizon: int, runs: int,
                        master_seed: int, frac=Fraction(1, 4), workers: int | None = None) -> ExperimentReport:
    """Many coupled runs; counts dominance violations (must be zero) and the
    fraction of runs where ``p_{G\\H}`` exceeds ``frac`` after the start."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    viol = np.zeros(runs, dtype=np.int64)
    first = np.full(runs, -1, dtype=np.int64)

    def one(k):
        tr = coupled_subgroup_run(group, H, initial, horizon, trial_generator(master_seed, k))
        # both urns hold t balls, so p_{G\H} >= p_1 is the same test as counts
        viol[k] = int((tr.n_comp < tr.n1).sum())
        f = tr.first_exceeding(frac)
        if f is not None:
            first[k] = f

    _fan_out(one, runs, workers)
    hit = first >= 0
    frac_hit = float(hit.mean())
    return ExperimentReport(
        lemma="subgroup-coupling",
        parameters={"group_order": group.order, "H": list(_as_set(group, H)), "initial": list(initial.counts),
                    "horizon": horizon, "threshold": float(to_fraction(frac))},
        trials=runs,
        empirical_failure=1 - frac_hit,
        analytic_bound=None,
        seed=master_seed,
        verdict="pass" if viol.sum() == 0 else "fail",
        details={"dominance_violations": int(viol.sum()),
                 "fraction_exceeding": frac_hit,
                 "median_first_exceeding": float(np.median(first[hit])) if hit.any() else None},
    )


def _fan_out(fn, n: int, workers: int | None):
    workers = workers or default_workers()
    if workers == 1:
        for k in range(n):
            fn(k)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fn, range(n)))


# ---------------------------------------------------------------------------
# support coverage


def support_coverage_experiment(group: FiniteGroup, generating_set, trials: int, horizon: int,
                                master_seed: int, workers: int | None = None) -> ExperimentReport:
    """Start with one ball per listed element and record when every element
    first appears.  ``generating_set`` may also be an :class:`UrnState`."""
    if isinstance(generating_set, UrnState):
        initial = generating_set
    else:
        initial = UrnState.from_labels(group, list(generating_set))
    _check(group, initial)
    labels = [i for i, n in enumerate(initial.counts) if n > 0]
    if not is_generating(group, labels):
        raise ValueError(f"initial labels {labels} do not generate the group")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rec = np.array([horizon], dtype=np.int64)
    cover = np.full(trials, -1, dtype=np.int64)

    def one(k):
        _, c, _ = run_urn(group, initial, horizon, rec, trial_generator(master_seed, k))
        if c is not None:
            cover[k] = c

    _fan_out(one, trials, workers)
    ok = cover >= 0
    frac = float(ok.mean())
    return ExperimentReport(
        lemma="support-coverage",
        parameters={"group_order": group.order, "initial": list(initial.counts), "horizon": horizon},
        trials=trials,
        empirical_failure=1 - frac,
        analytic_bound=None,
        seed=master_seed,
        verdict="pass" if frac == 1.0 else "fail",
        details={"fraction_covered": frac,
                 "median_coverage_time": int(nearest_rank(cover[ok], 0.5)) if ok.any() else None,
                 "max_coverage_time": int(cover[ok].max()) if ok.any() else None,
                 "coverage_times": cover.tolist()},
    )
