"""Confidence intervals shared by the Monte Carlo estimators."""

import math
from dataclasses import dataclass

from scipy import stats

from src.core.errors import InputError


@dataclass(frozen=True)
class Interval:
    """A two-sided confidence interval around a point estimate."""

    estimate: float
    low: float
    high: float
    confidence: float

    @property
    def halfwidth(self) -> float:
        """Largest distance from the estimate to an endpoint."""
        return max(self.estimate - self.low, self.high - self.estimate)

    def contains(self, value: float) -> bool:
        """Whether value lies inside the closed interval."""
        return self.low <= value <= self.high


def _check_confidence(confidence: float) -> None:
    if not 0.0 < confidence < 1.0:
        msg = f"confidence must lie in (0, 1), got {confidence}"
        raise InputError(msg)


def normal_interval(
    total: float,
    total_sq: float,
    count: int,
    confidence: float = 0.99,
) -> Interval:
    """Normal-approximation interval for a mean from running sums.

    Args:
        total: Sum of observations
        total_sq: Sum of squared observations
        count: Number of observations
        confidence: Two-sided confidence level

    Returns:
        Interval centered on the sample mean; zero width when count is 1
    """
    _check_confidence(confidence)
    if count < 1:
        msg = "At least one observation is required"
        raise InputError(msg)
    mean = total / count
    if count == 1:
        return Interval(mean, mean, mean, confidence)
    variance = max(total_sq - count * mean * mean, 0.0) / (count - 1)
    stderr = math.sqrt(variance / count)
    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    return Interval(mean, mean - z * stderr, mean + z * stderr, confidence)


def standard_error(total: float, total_sq: float, count: int) -> float:
    """Standard error of the mean from running sums."""
    if count < 2:  # noqa: PLR2004
        return 0.0
    mean = total / count
    variance = max(total_sq - count * mean * mean, 0.0) / (count - 1)
    return math.sqrt(variance / count)


def clopper_pearson(successes: int, trials: int, confidence: float = 0.99) -> Interval:
    """Exact binomial (Clopper-Pearson) interval for a frequency.

    Args:
        successes: Number of observed events
        trials: Number of trials
        confidence: Two-sided confidence level

    Returns:
        Interval around successes / trials

    Raises:
        InputError: If counts are inconsistent
    """
    _check_confidence(confidence)
    if trials < 1 or not 0 <= successes <= trials:
        msg = f"Invalid counts: successes={successes}, trials={trials}"
        raise InputError(msg)
    alpha = 1.0 - confidence
    low = 0.0 if successes == 0 else float(stats.beta.ppf(alpha / 2, successes, trials - successes + 1))
    high = (
        1.0
        if successes == trials
        else float(stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    )
    return Interval(successes / trials, low, high, confidence)


__all__ = ["Interval", "clopper_pearson", "normal_interval", "standard_error"]
