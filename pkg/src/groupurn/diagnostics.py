"""Convergence diagnostics on single trajectories and trial ensembles."""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .groups import FiniteGroup
from .seeding import trial_generator
from .urn import Schedule, UrnState, run_urn, to_fraction

# ---------------------------------------------------------------------------
# single-trajectory diagnostics


def tv_to_uniform(p):
    """Total variation distance ``0.5 * sum |p_i - 1/d|``.

    Exact (a Fraction) when ``p`` is a sequence of Fractions.
    """
    if isinstance(p, (list, tuple)) and p and all(isinstance(x, Fraction) for x in p):
        u = Fraction(1, len(p))
        return sum(abs(x - u) for x in p) / 2
    arr = np.asarray(p, dtype=float)
    return 0.5 * float(np.abs(arr - 1.0 / arr.shape[-1]).sum())


def _snapshots(traj):
    """(times, counts) from a Trajectory or a plain sequence of count vectors."""
    if hasattr(traj, "times") and hasattr(traj, "counts"):
        return [int(t) for t in traj.times], [tuple(int(v) for v in row) for row in traj.counts]
    rows = [tuple(int(v) for v in (r.counts if isinstance(r, UrnState) else r)) for r in traj]
    return [sum(r) for r in rows], rows


def sigma_hitting_time(traj, beta) -> int | None:
    """First snapshot time at which every density is at least ``beta``."""
    times, rows = _snapshots(traj)
    b = to_fraction(beta)
    if rows and not 0 <= b <= Fraction(1, len(rows[0])):
        raise ValueError(f"beta={beta} outside [0, 1/d]")
    for t, c in zip(times, rows):
        if min(c) * b.denominator >= b.numerator * t:
            return t
    return None


def min_count_growth(traj, n: int) -> int | None:
    """First snapshot time with every count at least ``n``."""
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    times, rows = _snapshots(traj)
    for t, c in zip(times, rows):
        if min(c) >= n:
            return t
    return None


def support_coverage_time(traj) -> int | None:
    return min_count_growth(traj, 1)


# ---------------------------------------------------------------------------
# statistics over count arrays (last axis = labels)


def _stat_tv(c):
    c = np.asarray(c, dtype=float)
    t = c.sum(axis=-1, keepdims=True)
    return 0.5 * np.abs(c / t - 1.0 / c.shape[-1]).sum(axis=-1)


def _stat_min_density(c):
    c = np.asarray(c, dtype=float)
    return c.min(axis=-1) / c.sum(axis=-1)


def _stat_max_density(c):
    c = np.asarray(c, dtype=float)
    return c.max(axis=-1) / c.sum(axis=-1)


def _stat_min_count(c):
    return np.asarray(c).min(axis=-1).astype(float)


STATISTICS = {
    "tv": _stat_tv,
    "min_density": _stat_min_density,
    "max_density": _stat_max_density,
    "min_count": _stat_min_count,
}


def statistic_fn(name: str):
    """Look up a statistic; ``density:i`` gives the density of label ``i``."""
    if name in STATISTICS:
        return STATISTICS[name]
    if name.startswith("density:"):
        i = int(name.split(":", 1)[1])

        def f(c, i=i):
            c = np.asarray(c, dtype=float)
            return c[..., i] / c.sum(axis=-1)

        return f
    raise ValueError(f"unknown statistic {name!r}; choose from {sorted(STATISTICS)} or density:i")


# ---------------------------------------------------------------------------
# ensembles


@dataclass
class TrialSet:
    """Raw snapshots of many independent runs: ``counts[trial, k, label]``."""

    times: np.ndarray
    counts: np.ndarray
    coverage: np.ndarray  # -1 where the run never covered the group
    master_seed: int

    @property
    def trials(self) -> int:
        return self.counts.shape[0]

    def values(self, statistic: str) -> np.ndarray:
        return statistic_fn(statistic)(self.counts)


def default_workers() -> int:
    return os.cpu_count() or 1


def run_trials(group: FiniteGroup, initial: UrnState, horizon: int, schedule: Schedule,
               trials: int, master_seed: int, workers: int | None = None) -> TrialSet:
    """Run ``trials`` independent urns.  Trial ``k`` is seeded from
    ``(master_seed, k)``; output does not depend on ``workers``."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if horizon <= initial.t:
        raise ValueError(f"horizon {horizon} must exceed the initial time {initial.t}")
    if master_seed is None:
        raise ValueError("master_seed is required")
    rec = schedule.resolve(initial.t, horizon)
    if not len(rec):
        raise ValueError("schedule selects no times in [t0, horizon]")
    counts = np.zeros((trials, len(rec), group.order), dtype=np.int64)
    coverage = np.full(trials, -1, dtype=np.int64)

    def one(k):
        out, cover, _ = run_urn(group, initial, horizon, rec, trial_generator(master_seed, k))
        counts[k] = out
        if cover is not None:
            coverage[k] = cover

    workers = workers or default_workers()
    if workers == 1:
        for k in range(trials):
            one(k)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(trials)))
    return TrialSet(rec, counts, coverage, int(master_seed))


@dataclass
class EnsembleSummary:
    statistic: str
    times: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    q025: np.ndarray
    median: np.ndarray
    q975: np.ndarray
    trials: int
    master_seed: int

    def at(self, t: int) -> dict:
        k = int(np.searchsorted(self.times, t))
        if k >= len(self.times) or self.times[k] != t:
            raise KeyError(f"time {t} was not recorded")
        return {name: float(getattr(self, name)[k]) for name in ("mean", "std", "q025", "median", "q975")}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "mean", "std", "q025", "median", "q975", "trials"])
        for k, t in enumerate(self.times.tolist()):
            w.writerow([t, *(repr(float(getattr(self, c)[k])) for c in ("mean", "std", "q025", "median", "q975")),
                        self.trials])
        return buf.getvalue()


def nearest_rank(values: np.ndarray, q: float, axis: int = 0) -> np.ndarray:
    """Nearest-rank quantile: the ``ceil(q*n)``-th smallest value."""
    return np.quantile(values, q, axis=axis, method="inverted_cdf")


def summarize(values: np.ndarray, times: np.ndarray, statistic: str, master_seed: int) -> EnsembleSummary:
    v = np.asarray(values, dtype=float)
    return EnsembleSummary(
        statistic=statistic,
        times=np.asarray(times),
        mean=v.mean(axis=0),
        std=v.std(axis=0),
        q025=nearest_rank(v, 0.025),
        median=nearest_rank(v, 0.5),
        q975=nearest_rank(v, 0.975),
        trials=v.shape[0],
        master_seed=master_seed,
    )


def ensemble(group: FiniteGroup, initial: UrnState, horizon: int, schedule: Schedule, trials: int,
             statistic: str, master_seed: int, workers: int | None = None) -> EnsembleSummary:
    statistic_fn(statistic)  # fail before spending time on trials
    ts = run_trials(group, initial, horizon, schedule, trials, master_seed, workers)
    return summarize(ts.values(statistic), ts.times, statistic, ts.master_seed)


# ---------------------------------------------------------------------------
# power-law rate fits


class InsufficientPoints(ValueError):
    pass


@dataclass
class RateFit:
    """Least-squares fit of ``log(statistic) = log(a) - c*log(t)``."""

    statistic: str
    exponent: float
    coefficient: float
    residual: float
    window: tuple[int, int]
    points: int
    excluded: int
    seed: int | None = None

    def to_json(self) -> str:
        doc = {
            "statistic": self.statistic,
            "exponent": self.exponent,
            "coefficient": self.coefficient,
            "residual": self.residual,
            "window": list(self.window),
            "points": self.points,
            "excluded": self.excluded,
            "seed": self.seed,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def fit_power_law(times, values, statistic: str = "tv", seed: int | None = None) -> RateFit:
    """Fit ``values ~ a * t**(-c)``; non-positive values are dropped and
    counted in ``excluded``.  ``residual`` is the sum of squared log
    residuals."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = v > 0
    excluded = int((~keep).sum())
    t, v = t[keep], v[keep]
    if len(t) < 4:
        raise InsufficientPoints(f"need at least 4 positive points, have {len(t)} ({excluded} excluded)")
    x, y = np.log(t), np.log(v)
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(((A @ coef - y) ** 2).sum())
    return RateFit(statistic, float(-coef[1]), float(np.exp(coef[0])), resid,
                   (int(t[0]), int(t[-1])), len(t), excluded, seed)


def rate_scan(group: FiniteGroup, initial: UrnState, horizon: int, trials: int, master_seed: int,
              base=2, burn_in: int = 0, statistic: str = "tv", exclude_uncovered: bool = True,
              workers: int | None = None) -> RateFit:
    """Fit a power law to the ensemble mean of ``statistic`` on a geometric
    time grid.

    Times before ``burn_in`` are dropped; with ``exclude_uncovered`` the window
    also starts no earlier than the latest support-coverage time over trials.
    The fitted exponent is exploratory output.
    """
    ts = run_trials(group, initial, horizon, Schedule.geometric(base), trials, master_seed, workers)
    mean = ts.values(statistic).mean(axis=0)
    start = burn_in
    if exclude_uncovered:
        if (ts.coverage < 0).any():
            raise InsufficientPoints("some trials never covered the group by the horizon")
        start = max(start, int(ts.coverage.max()))
    sel = ts.times >= start
    return fit_power_law(ts.times[sel], mean[sel], statistic, ts.master_seed)
