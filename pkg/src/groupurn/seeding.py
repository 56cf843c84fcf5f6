"""Seed handling.

All randomness comes from numpy's PCG64 bit generator.  Trial ``k`` of an
experiment with master seed ``m`` uses ``SeedSequence(m, spawn_key=(k,))``;
that rule is the only stream-splitting mechanism in the package, so results
depend on (master seed, trial index) and never on worker count or scheduling.
"""

from __future__ import annotations

import secrets

import numpy as np


def trial_seed_sequence(master_seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master_seed), spawn_key=(int(trial),))


def trial_generator(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(trial_seed_sequence(master_seed, trial)))


def as_generator(rng) -> np.random.Generator:
    """Accept an int seed, a SeedSequence, or an existing Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(rng))
    if rng is None:
        raise ValueError("an explicit seed or Generator is required")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(rng))))


def seed_provenance(rng) -> dict | None:
    if isinstance(rng, np.random.SeedSequence):
        return {"entropy": rng.entropy, "spawn_key": list(rng.spawn_key)}
    if isinstance(rng, (int, np.integer)):
        return {"entropy": int(rng), "spawn_key": []}
    return None


def fresh_seed() -> int:
    return secrets.randbits(63)
