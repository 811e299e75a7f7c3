"""Seeded random streams.

Every stream is a counter-based Philox generator keyed by a tuple of
non-negative integers, so instance ``i`` of a run with master seed ``s`` always
sees the same draws regardless of which process or in what order it runs.
"""

import numbers

import numpy as np

# Stream families. Keeps optimizer and evaluation draws disjoint.
OPTIMIZER_STREAM = 0
EVALUATION_STREAM = 1
ORACLE_STREAM = 2


def make_rng(seed, *key):
    """Return a Philox generator for ``(seed, *key)``.

    ``seed`` may already be a ``Generator``; it is then returned unchanged and
    ``key`` is ignored.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        seed = 0
    if not isinstance(seed, numbers.Integral) or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    ss = np.random.SeedSequence([int(seed), *map(int, key)])
    return np.random.Generator(np.random.Philox(ss))
