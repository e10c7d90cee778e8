"""Deterministic seeding and stream splitting.

Every random routine in the package derives its generator from a 64-bit
master seed through ``substream(seed, *key)``, which feeds the tuple
``(seed, *key)`` to ``numpy.random.SeedSequence``.  Distinct key tuples give
independent streams, so results never depend on thread scheduling or on how
work is chunked at run time.

Stream tag registry (first key element after the master seed):
    0  true-variance sample chunks      (seed, 0, chunk_index)
    1  study replication sample         (seed, 1, rep_index)
    2  study replication bootstrap      (seed, 2, rep_index)
    3  randomized-pairing curves        (seed, 3, curve_index)
    4  empirical-ARE sample chunks      (seed, 4, chunk_index)
    5  empirical-ARE pairings           (seed, 5, rep_index)
"""

import numpy as np

from .errors import DomainError

TAG_TRUTH = 0
TAG_STUDY_SAMPLE = 1
TAG_STUDY_BOOT = 2
TAG_PAIRING = 3
TAG_ARE_SAMPLE = 4
TAG_ARE_PAIRING = 5

_U64_MAX = 2**64 - 1


def validate_seed(seed):
    """Check that `seed` is an integer representable in 64 unsigned bits."""
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise DomainError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) <= _U64_MAX:
        raise DomainError(f"seed must fit in an unsigned 64-bit word: {seed!r}")
    return int(seed)


def substream(seed, *key):
    """Generator for the stream identified by (seed, *key)."""
    seed = validate_seed(seed)
    return np.random.default_rng(np.random.SeedSequence((seed, *map(int, key))))


def derive_seed(seed, *key):
    """Collapse (seed, *key) back to a single 64-bit integer seed."""
    seed = validate_seed(seed)
    ss = np.random.SeedSequence((seed, *map(int, key)))
    return int(ss.generate_state(1, np.uint64)[0])
