"""Deterministic analysis of game traces.

A level ℓ (1 ≤ ℓ ≤ ⌊|S_0|/2⌋) is *bad* when the big mass was at most
high·ℓ in the first round with |S| = 2ℓ, yet above low·ℓ in the first round
with |S| = ℓ (defaults high = 8, low = 4). The worst bad level is the
largest bad ℓ, or 1 if there is none. On every game that starts from mean
weight 1, the average surviving weight never exceeds 90 times the worst
bad level.
"""

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from src.config import (
    DEFAULT_SMALL_THRESHOLD,
    BadnessConfig,
    PartitionConfig,
    StatisticsConfig,
)
from src.core.errors import InputError
from src.game.process import GameTrace
from src.log_config import get_logger

logger = get_logger(__name__)

BIG_PICK_FLOOR = 0.2
MAX_BIG_DENSITY = 0.1
SMALL_FLOOR_FACTOR = 1.5
NORMALIZATION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class LevelStatus:
    """Evaluation of one level ℓ.

    Attributes:
        level: ℓ
        attained: Whether both |S| = ℓ and |S| = 2ℓ occur in the trace
        first_round: First round with |S| = ℓ
        first_round_double: First round with |S| = 2ℓ
        mass_at_double: Big mass in ``first_round_double``
        mass_at_level: Big mass in ``first_round``
        low_mass_flag: mass_at_double ≤ high·ℓ
        high_mass_flag: mass_at_level > low·ℓ
    """

    level: int
    attained: bool
    first_round: int | None = None
    first_round_double: int | None = None
    mass_at_double: float | None = None
    mass_at_level: float | None = None
    low_mass_flag: bool = False
    high_mass_flag: bool = False

    @property
    def bad(self) -> bool:
        """Both conditions hold."""
        return self.attained and self.low_mass_flag and self.high_mass_flag


@dataclass
class BadnessReport:
    """Bad-level evaluation of one trace.

    Attributes:
        k: Number of elements
        initial_small_count: |S_0|
        first_rounds: First round attaining each |S| value seen in the trace
        levels: Status of every level 1..⌊|S_0|/2⌋
        worst_bad_level: Largest bad level, or 1 if none
        unattained: Levels excluded because the trace never reached them
    """

    k: int
    initial_small_count: int
    first_rounds: dict[int, int] = field(default_factory=dict)
    levels: list[LevelStatus] = field(default_factory=list)
    worst_bad_level: int = 1
    unattained: list[int] = field(default_factory=list)

    @property
    def bad_levels(self) -> list[int]:
        """All bad levels, ascending."""
        return [status.level for status in self.levels if status.bad]

    def is_bad(self, level: int) -> bool:
        """Whether a level is bad; levels outside the evaluated range are not."""
        if 1 <= level <= len(self.levels):
            return self.levels[level - 1].bad
        return False


@dataclass
class CheckResult:
    """Outcome of one deterministic check.

    Attributes:
        name: Check identifier
        passed: Whether the check holds
        observed: Worst observed value
        limit: Limit the observed value is compared against
        round_index: Round of the first counterexample, if any
        message: Human-readable explanation of a failure
        details: Additional structured fields
    """

    name: str
    passed: bool = True
    observed: float = 0.0
    limit: float = 0.0
    round_index: int | None = None
    message: str = ""
    details: dict[str, Any] = field(default_factory=dict)

    def fail(self, message: str, round_index: int | None = None) -> None:
        """Record the first counterexample."""
        if self.passed:
            self.passed = False
            self.message = message
            self.round_index = round_index
            logger.warning("check_failed", check=self.name, round=round_index, message=message)


def analyze(trace: GameTrace, badness: BadnessConfig | None = None) -> BadnessReport:
    """Evaluate every level of a trace.

    Args:
        trace: Complete game trace
        badness: Bad-level constants (defaults to the analysis defaults)

    Returns:
        BadnessReport with the worst bad level
    """
    badness = badness or BadnessConfig()
    small_counts = trace.small_counts
    big_masses = trace.big_masses

    first_rounds: dict[int, int] = {}
    for round_index, count in enumerate(small_counts.tolist()):
        first_rounds.setdefault(int(count), round_index)

    s0 = int(small_counts[0]) if small_counts.size else 0
    report = BadnessReport(k=trace.config.k, initial_small_count=s0, first_rounds=first_rounds)

    for level in range(1, s0 // 2 + 1):
        i_level = first_rounds.get(level)
        i_double = first_rounds.get(2 * level)
        if i_level is None or i_double is None:
            report.unattained.append(level)
            report.levels.append(LevelStatus(level=level, attained=False))
            continue
        mass_double = float(big_masses[i_double])
        mass_level = float(big_masses[i_level])
        report.levels.append(
            LevelStatus(
                level=level,
                attained=True,
                first_round=i_level,
                first_round_double=i_double,
                mass_at_double=mass_double,
                mass_at_level=mass_level,
                low_mass_flag=mass_double <= badness.high_mass_multiplier * level,
                high_mass_flag=mass_level > badness.low_mass_multiplier * level,
            ),
        )

    if report.unattained:
        logger.warning("levels_unattained", levels=report.unattained, k=report.k)

    bad = report.bad_levels
    report.worst_bad_level = max(bad) if bad else 1
    return report


def _check_normalized(trace: GameTrace, tolerance: float) -> None:
    mean = trace.config.mean_weight
    if abs(mean - 1.0) > tolerance:
        msg = f"Average-weight bounds need normalized weights (initial mean {mean!r})"
        raise InputError(msg)


def check_average_weight_bound(
    trace: GameTrace,
    report: BadnessReport | None = None,
    badness: BadnessConfig | None = None,
    tolerance: float = 1e-9,
) -> CheckResult:
    """Check that no round's average weight exceeds factor·worst_bad_level.

    Also checks that small elements form a strict majority initially, which
    follows from mean weight 1 and the small threshold 2.

    Args:
        trace: Trace of a normalized game
        report: Precomputed analysis of the trace
        badness: Bad-level constants
        tolerance: Absolute float slack

    Returns:
        CheckResult with the violating round, if any

    Raises:
        InputError: If the trace does not start from mean weight 1
    """
    badness = badness or BadnessConfig()
    _check_normalized(trace, NORMALIZATION_TOLERANCE)
    report = report or analyze(trace, badness)

    limit = badness.average_bound_factor * report.worst_bad_level
    averages = trace.avg_weights
    result = CheckResult(
        name="average_weight_bound",
        observed=float(averages.max()),
        limit=limit,
        details={"worst_bad_level": report.worst_bad_level},
    )
    over = np.flatnonzero(averages > limit + tolerance)
    if over.size:
        round_index = int(over[0])
        result.fail(
            f"Average weight {averages[round_index]!r} exceeds {limit!r} in round {round_index}",
            round_index,
        )

    if (
        trace.config.partition.small_threshold >= DEFAULT_SMALL_THRESHOLD
        and 2 * report.initial_small_count <= report.k
    ):
        result.fail(
            f"Only {report.initial_small_count} of {report.k} elements start small",
            0,
        )
    return result


def check_prefix_average_bound(trace: GameTrace, tolerance: float = 1e-9) -> CheckResult:
    """Check avg_i ≤ k / (k - i) in every round of a normalized game.

    Total weight never grows, so after normalization the average can exceed
    1 only through the shrinking number of survivors.

    Raises:
        InputError: If the trace does not start from mean weight 1
    """
    _check_normalized(trace, NORMALIZATION_TOLERANCE)
    k = trace.config.k
    averages = trace.avg_weights
    limits = np.array([k / snapshot.alive_count for snapshot in trace.snapshots])
    result = CheckResult(
        name="prefix_average_bound",
        observed=float((averages / limits).max()),
        limit=1.0,
    )
    over = np.flatnonzero(averages > limits + tolerance)
    if over.size:
        round_index = int(over[0])
        result.fail(
            f"Average weight {averages[round_index]!r} exceeds {limits[round_index]!r} "
            f"in round {round_index}",
            round_index,
        )
    return result


def check_big_pick_floor(
    trace: GameTrace,
    badness: BadnessConfig | None = None,
    tolerance: float = 1e-9,
) -> CheckResult:
    """Check the perturbed chance of picking big over small elements.

    In every played round with w(B) ≥ (low/2)·|S| > 0, the perturbed masses
    must satisfy q_B / (q_B + q_S) ≥ 1/5.
    """
    badness = badness or BadnessConfig()
    result = CheckResult(name="big_pick_floor", observed=1.0, limit=BIG_PICK_FLOOR)
    checked = 0
    for snapshot in trace.snapshots:
        if snapshot.removed_id is None:
            continue
        regime = badness.low_mass_multiplier / 2.0 * snapshot.n_small
        if regime <= 0.0 or snapshot.mass_big < regime:
            continue
        q_big = snapshot.perturbed_mass_big
        q_total = q_big + snapshot.perturbed_mass_small
        if q_total <= 0.0:
            continue
        checked += 1
        share = q_big / q_total
        result.observed = min(result.observed, share)
        if share < BIG_PICK_FLOOR - tolerance:
            result.fail(
                f"Big share {share!r} below {BIG_PICK_FLOOR} in round {snapshot.round}",
                snapshot.round,
            )
    result.details["rounds_checked"] = checked
    return result


def check_analysis_constants(
    partition: PartitionConfig | None = None,
    badness: BadnessConfig | None = None,
) -> CheckResult:
    """Check that the thresholds support the tail argument.

    Requires high / big_threshold ≤ 1/10 (few big elements while the big
    mass is low) and low ≥ 1.5·small_threshold (so the big-pick floor applies).
    """
    partition = partition or PartitionConfig()
    badness = badness or BadnessConfig()
    density = badness.high_mass_multiplier / partition.big_threshold
    result = CheckResult(
        name="analysis_constants",
        observed=density,
        limit=MAX_BIG_DENSITY,
        details={
            "big_threshold": partition.big_threshold,
            "small_threshold": partition.small_threshold,
            "high_mass_multiplier": badness.high_mass_multiplier,
            "low_mass_multiplier": badness.low_mass_multiplier,
        },
    )
    if density > MAX_BIG_DENSITY:
        result.fail(
            f"high_mass_multiplier / big_threshold = {density!r} exceeds {MAX_BIG_DENSITY}",
        )
    if badness.low_mass_multiplier < SMALL_FLOOR_FACTOR * partition.small_threshold:
        result.fail(
            f"low_mass_multiplier {badness.low_mass_multiplier!r} is below "
            f"{SMALL_FLOOR_FACTOR} * small_threshold",
        )
    return result


def advantage_series_bound(factor: float = 90.0, divisor: float = 40.0) -> float:
    """Analytic cap Σ_ℓ factor·ℓ·exp(-(ℓ-1)/divisor) on the expected advantage.

    Closed form of the series: factor / (1 - exp(-1/divisor))².
    """
    if factor <= 0 or divisor <= 0:
        msg = "factor and divisor must be positive"
        raise InputError(msg)
    ratio = math.exp(-1.0 / divisor)
    return factor / (1.0 - ratio) ** 2


def tail_bound(level: int, badness: BadnessConfig | None = None) -> float:
    """Probability bound exp(-ℓ / divisor) for a level being bad."""
    badness = badness or BadnessConfig()
    return math.exp(-level / badness.tail_rate_divisor)


def check_trace(
    trace: GameTrace,
    badness: BadnessConfig | None = None,
    statistics: StatisticsConfig | None = None,
) -> list[CheckResult]:
    """Run every per-trace deterministic check."""
    statistics = statistics or StatisticsConfig()
    report = analyze(trace, badness)
    return [
        check_average_weight_bound(trace, report, badness, statistics.tolerance),
        check_prefix_average_bound(trace, statistics.tolerance),
        check_big_pick_floor(trace, badness, statistics.tolerance),
    ]


__all__ = [
    "BadnessReport",
    "CheckResult",
    "LevelStatus",
    "advantage_series_bound",
    "analyze",
    "check_analysis_constants",
    "check_average_weight_bound",
    "check_big_pick_floor",
    "check_prefix_average_bound",
    "check_trace",
    "tail_bound",
]
