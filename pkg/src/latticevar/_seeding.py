"""Seed plumbing: every randomized routine accepts an int, a tuple of ints,
or an already-built SeedSequence, so callers can derive disjoint per-task
streams deterministically."""

import numpy as np


def as_seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)
