"""Seeded random streams for reproducible runs.

Every run owns one ``numpy.random.Generator`` over the counter-based Philox
bit generator. Seeds for individual trials are derived from a master seed
and textual labels by hashing, so a trial's stream depends only on what it
is, never on where it sits in a sweep.

Example:
    >>> seed = derive_seed(20240917, "advantage", "k=64", "trial=3")
    >>> rng = make_generator(seed)
    >>> index = sample_index(probs, rng.random())
"""

import hashlib

import numpy as np
from numpy.typing import ArrayLike
from scipy import stats

from src.core.errors import InputError
from src.core.points import FloatArray

SEED_BITS = 64
_UNIT_RESOLUTION = 2**53


def derive_seed(master_seed: int, *labels: object) -> int:
    """Derive a 64-bit seed from a master seed and a label path.

    The rule is blake2b (8-byte digest) over the UTF-8 text
    ``"<master>/<label1>/<label2>/..."``, read as a big-endian integer.

    Args:
        master_seed: Non-negative master seed
        *labels: Components identifying the stream (experiment, grid point, trial)

    Returns:
        Seed in [0, 2**64)
    """
    if master_seed < 0:
        msg = f"master_seed must be non-negative, got {master_seed}"
        raise InputError(msg)
    text = "/".join([str(master_seed), *(str(label) for label in labels)])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=SEED_BITS // 8).digest()
    return int.from_bytes(digest, "big")


def make_generator(seed: int) -> np.random.Generator:
    """Create a Philox-backed generator for one run.

    Raises:
        InputError: If the seed is outside [0, 2**64)
    """
    if not 0 <= seed < 2**SEED_BITS:
        msg = f"seed must lie in [0, 2**64), got {seed}"
        raise InputError(msg)
    return np.random.Generator(np.random.Philox(key=seed))


def open_uniforms(rng: np.random.Generator, size: int | tuple[int, ...]) -> FloatArray:
    """Uniform variates on the open interval (0, 1)."""
    ticks = rng.integers(0, _UNIT_RESOLUTION, size=size, dtype=np.int64)
    return (ticks.astype(np.float64) + 0.5) / _UNIT_RESOLUTION


def standard_normals(rng: np.random.Generator, size: int | tuple[int, ...]) -> FloatArray:
    """Standard normal variates by inverse-CDF transform of open uniforms."""
    return stats.norm.ppf(open_uniforms(rng, size))


def sample_index(probs: ArrayLike, u: float) -> int:
    """Inverse-CDF sampling from a discrete distribution with one uniform draw.

    Entries with probability 0 are never returned. The weights need not be
    normalized; the draw is scaled by their total.

    Args:
        probs: Nonnegative weights with positive total
        u: Uniform draw in [0, 1)

    Returns:
        Selected index

    Raises:
        InputError: If the weights have no positive mass or u is outside [0, 1)
    """
    if not 0.0 <= u < 1.0:
        msg = f"u must lie in [0, 1), got {u}"
        raise InputError(msg)
    weights = np.asarray(probs, dtype=np.float64)
    cdf = np.cumsum(weights)
    if cdf.size == 0 or not cdf[-1] > 0.0:
        msg = "Cannot sample from a distribution with zero total mass"
        raise InputError(msg)
    index = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    if index >= cdf.size:
        # u * total rounded up to the total: fall back to the last positive entry
        index = int(np.flatnonzero(weights > 0.0)[-1])
    return index


__all__ = [
    "derive_seed",
    "make_generator",
    "open_uniforms",
    "sample_index",
    "standard_normals",
]
