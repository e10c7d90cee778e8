"""Seeded gamma variate generation."""

import numpy as np

from .core import Sample
from .errors import DomainError
from .seeding import substream


def draw_gamma(rng, shape, rate, size):
    """Gamma(shape, rate) variates from an existing generator."""
    return rng.gamma(shape, 1.0 / rate, size=size)


def sample_gamma(params, n, seed):
    """n i.i.d. Gamma(shape, rate) observations, deterministic given seed.

    Uses the generator's acceptance-rejection gamma sampler
    (Marsaglia-Tsang squeeze with the boost transform for shape < 1).
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    rng = substream(seed)
    return Sample(draw_gamma(rng, params.shape, params.rate, int(n)))
