"""Empirical check of a discrete sampler against its exact distribution."""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from src.core.errors import InputError
from src.core.points import FloatArray, ProbVec
from src.core.rng import make_generator, sample_index
from src.log_config import get_logger

logger = get_logger(__name__)

MIN_DRAWS = 10_000
DEFAULT_TV_THRESHOLD = 0.01

Sampler = Callable[[np.random.Generator], int]


@dataclass(frozen=True)
class SamplingCheckResult:
    """Comparison of empirical frequencies with an exact distribution.

    Attributes:
        passed: Total-variation distance within the threshold
        tv_distance: Half the L1 distance between frequencies and exact
        max_deviation: Largest absolute per-index deviation
        max_deviation_index: Index of that deviation
        threshold: Total-variation threshold
        draws: Number of draws
        frequencies: Empirical frequencies
    """

    passed: bool
    tv_distance: float
    max_deviation: float
    max_deviation_index: int
    threshold: float
    draws: int
    frequencies: FloatArray


def inverse_cdf_sampler(probs: ProbVec | ArrayLike) -> Sampler:
    """Sampler drawing one index per uniform with the seeding code path."""
    weights = probs.probs if isinstance(probs, ProbVec) else np.asarray(probs, dtype=np.float64)

    def draw(rng: np.random.Generator) -> int:
        return sample_index(weights, float(rng.random()))

    return draw


def empirical_distribution_check(
    sampler: Sampler,
    exact: ProbVec,
    draws: int,
    seed: int = 0,
    threshold: float = DEFAULT_TV_THRESHOLD,
) -> SamplingCheckResult:
    """Draw from a sampler and compare frequencies with the exact vector.

    Args:
        sampler: Callable drawing one index from a generator
        exact: Distribution the sampler should follow
        draws: Number of draws (≥ 10^4)
        seed: Seed of the generator passed to the sampler
        threshold: Largest accepted total-variation distance

    Returns:
        SamplingCheckResult

    Raises:
        InputError: If draws < 10^4 or the sampler returns an out-of-range index
    """
    if draws < MIN_DRAWS:
        msg = f"draws must be at least {MIN_DRAWS}, got {draws}"
        raise InputError(msg)

    rng = make_generator(seed)
    counts = np.zeros(len(exact), dtype=np.int64)
    for _ in range(draws):
        index = sampler(rng)
        if not 0 <= index < counts.size:
            msg = f"Sampler returned index {index} outside [0, {counts.size})"
            raise InputError(msg)
        counts[index] += 1

    frequencies = counts / draws
    deviations = np.abs(frequencies - exact.probs)
    tv = 0.5 * float(deviations.sum())
    worst = int(np.argmax(deviations))
    result = SamplingCheckResult(
        passed=tv <= threshold,
        tv_distance=tv,
        max_deviation=float(deviations[worst]),
        max_deviation_index=worst,
        threshold=threshold,
        draws=draws,
        frequencies=frequencies,
    )
    logger.info(
        "sampling_checked",
        draws=draws,
        tv_distance=tv,
        max_deviation=result.max_deviation,
        passed=result.passed,
    )
    return result


__all__ = [
    "SamplingCheckResult",
    "Sampler",
    "empirical_distribution_check",
    "inverse_cdf_sampler",
]
