"""Monte Carlo estimators over independent games.

Trial t of a study uses the seed ``derive_seed(master_seed, "trial", t)``.
Estimators are split into chunk functions, which return mergeable
accumulators over a contiguous trial range, and finalizers. Merging chunks
in chunk order gives results independent of how chunks were scheduled.
"""

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from scipy import stats

from src.config import BadnessConfig, StatisticsConfig
from src.core.errors import BoundViolationError, InputError
from src.core.io import format_float
from src.core.rng import derive_seed, make_generator
from src.core.stats import Interval, clopper_pearson, normal_interval, standard_error
from src.game.analysis import analyze, check_average_weight_bound, tail_bound
from src.game.process import GameConfig, run
from src.log_config import get_logger

if TYPE_CHECKING:
    from src.adversaries.base import GameAdversary

logger = get_logger(__name__)

ADVANTAGE_COLUMNS = ("round", "mean", "ci_lo", "ci_hi", "trials")
LEVEL_COLUMNS = ("level", "bad", "trials", "frequency", "ci_lo", "ci_hi", "bound", "passed")
CHERNOFF_COLUMNS = ("p", "ell", "trials", "hits", "empirical", "ci_lo", "ci_hi", "bound", "exact_tail", "passed")

MIN_CHERNOFF_TRIALS = 10_000
CHERNOFF_CHUNK = 100_000


def trial_seed(master_seed: int, trial: int) -> int:
    """Seed of one trial of a study."""
    return derive_seed(master_seed, "trial", trial)


@dataclass
class AdvantageAccumulator:
    """Running sums of per-round average weights over trials.

    Attributes:
        k: Number of elements (rounds 0..k-1)
        trials: Trials accumulated
        sums: Per-round sum of average weights
        sums_sq: Per-round sum of squared average weights
        heavy_early: Trials where the tracked heavy element was removed
            within the first k/2 rounds
        worst_levels: Histogram of worst bad levels
    """

    k: int
    trials: int = 0
    sums: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sums_sq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    heavy_early: int = 0
    worst_levels: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Allocate the per-round sums."""
        if self.sums.size == 0:
            self.sums = np.zeros(self.k)
            self.sums_sq = np.zeros(self.k)

    def add(self, averages: np.ndarray) -> None:
        """Accumulate the per-round averages of one trial."""
        self.trials += 1
        self.sums += averages
        self.sums_sq += averages * averages

    def merge(self, other: "AdvantageAccumulator") -> "AdvantageAccumulator":
        """Fold another accumulator into this one and return self."""
        if other.k != self.k:
            msg = f"Cannot merge accumulators for k={self.k} and k={other.k}"
            raise InputError(msg)
        self.trials += other.trials
        self.sums += other.sums
        self.sums_sq += other.sums_sq
        self.heavy_early += other.heavy_early
        for level, count in other.worst_levels.items():
            self.worst_levels[level] = self.worst_levels.get(level, 0) + count
        return self


@dataclass(frozen=True)
class RoundEstimate:
    """Mean average weight of one round with its confidence interval."""

    round: int
    mean: float
    ci_lo: float
    ci_hi: float
    stderr: float
    trials: int


@dataclass
class AdvantageEstimate:
    """Per-round estimates of the expected average surviving weight.

    Attributes:
        rounds: One estimate per round 0..k-1
        max_mean: Largest per-round mean
        max_round: Round attaining max_mean
        max_ci_hi: Upper confidence bound at that round
        late_max_mean: Largest per-round mean over rounds ≥ 1, None when k = 1.
            Round 0 is the normalized start (mean exactly 1), so this is
            where an adversary's choices show up
        late_max_round: Round attaining late_max_mean
        heavy_early_fraction: Fraction of trials removing the heavy element
            within the first k/2 rounds (None when no heavy element is tracked)
        worst_levels: Histogram of worst bad levels
        trials: Trials performed
    """

    rounds: list[RoundEstimate]
    max_mean: float
    max_round: int
    max_ci_hi: float
    late_max_mean: float | None
    late_max_round: int | None
    heavy_early_fraction: float | None
    worst_levels: dict[int, int]
    trials: int

    def monotone_within(self, initial_mean: float = 1.0, sigmas: float = 3.0, tolerance: float = 1e-9) -> bool:
        """Whether every per-round mean is at most initial_mean + sigmas·SE."""
        return all(r.mean <= initial_mean + sigmas * r.stderr + tolerance for r in self.rounds)

    def write_csv(self, path: str | Path) -> Path:
        """Write one row per round: round, mean, ci_lo, ci_hi, trials."""
        csv_path = Path(path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        with csv_path.open("w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(ADVANTAGE_COLUMNS)
            for r in self.rounds:
                writer.writerow(
                    [r.round, format_float(r.mean), format_float(r.ci_lo), format_float(r.ci_hi), r.trials],
                )
        return csv_path


def advantage_chunk(
    config: GameConfig,
    policy: "GameAdversary",
    master_seed: int,
    start: int,
    stop: int,
    heavy_id: int | None = None,
    badness: BadnessConfig | None = None,
    check_bounds: bool = True,
) -> AdvantageAccumulator:
    """Play trials [start, stop) and accumulate their average weights.

    Raises:
        BoundViolationError: If check_bounds is set and any trace violates
            the average-weight bound
    """
    badness = badness or BadnessConfig()
    acc = AdvantageAccumulator(k=config.k)
    half = config.k / 2.0
    for trial in range(start, stop):
        trace = run(config, policy, trial_seed(master_seed, trial))
        acc.add(trace.avg_weights)
        if heavy_id is not None:
            removed = trace.removal_round(heavy_id)
            if removed is not None and removed < half:
                acc.heavy_early += 1
        if check_bounds:
            report = analyze(trace, badness)
            acc.worst_levels[report.worst_bad_level] = acc.worst_levels.get(report.worst_bad_level, 0) + 1
            check = check_average_weight_bound(trace, report, badness)
            if not check.passed:
                msg = f"Average-weight bound violated in trial {trial}: {check.message}"
                raise BoundViolationError(
                    msg,
                    {"trial": trial, "round": check.round_index, "observed": check.observed, "limit": check.limit},
                )
    return acc


def finalize_advantage(
    acc: AdvantageAccumulator,
    confidence: float = 0.99,
    heavy_tracked: bool = False,
) -> AdvantageEstimate:
    """Turn an accumulator into per-round estimates."""
    if acc.trials < 1:
        msg = "No trials accumulated"
        raise InputError(msg)
    rounds = []
    for i in range(acc.k):
        interval = normal_interval(float(acc.sums[i]), float(acc.sums_sq[i]), acc.trials, confidence)
        rounds.append(
            RoundEstimate(
                round=i,
                mean=interval.estimate,
                ci_lo=interval.low,
                ci_hi=interval.high,
                stderr=standard_error(float(acc.sums[i]), float(acc.sums_sq[i]), acc.trials),
                trials=acc.trials,
            ),
        )
    best = max(rounds, key=lambda r: r.mean)
    late = max(rounds[1:], key=lambda r: r.mean, default=None)
    return AdvantageEstimate(
        rounds=rounds,
        max_mean=best.mean,
        max_round=best.round,
        max_ci_hi=best.ci_hi,
        late_max_mean=late.mean if late is not None else None,
        late_max_round=late.round if late is not None else None,
        heavy_early_fraction=acc.heavy_early / acc.trials if heavy_tracked else None,
        worst_levels=dict(sorted(acc.worst_levels.items())),
        trials=acc.trials,
    )


def estimate_advantage(
    config: GameConfig,
    policy: "GameAdversary",
    trials: int,
    seed: int,
    confidence: float = 0.99,
    heavy_id: int | None = None,
    check_bounds: bool = True,
) -> AdvantageEstimate:
    """Estimate the expected average surviving weight per round.

    Args:
        config: Normalized game parameters
        policy: Game adversary
        trials: Number of independent games (≥ 1)
        seed: Master seed of the study
        confidence: Level of the normal-approximation intervals
        heavy_id: Element whose early removal is tracked
        check_bounds: Check the average-weight bound on every trace

    Returns:
        AdvantageEstimate with one interval per round

    Raises:
        InputError: If trials < 1
        BoundViolationError: On any average-weight bound counterexample
    """
    if trials < 1:
        msg = f"trials must be positive, got {trials}"
        raise InputError(msg)
    acc = advantage_chunk(config, policy, seed, 0, trials, heavy_id=heavy_id, check_bounds=check_bounds)
    estimate = finalize_advantage(acc, confidence, heavy_tracked=heavy_id is not None)
    logger.info(
        "advantage_estimated",
        k=config.k,
        epsilon=config.epsilon,
        policy=policy.name,
        trials=trials,
        max_mean=estimate.max_mean,
        max_round=estimate.max_round,
    )
    return estimate


@dataclass
class BadLevelCounts:
    """Per-level counts of bad outcomes over trials."""

    levels: tuple[int, ...]
    trials: int = 0
    bad: dict[int, int] = field(default_factory=dict)

    def merge(self, other: "BadLevelCounts") -> "BadLevelCounts":
        """Fold another count into this one and return self."""
        self.trials += other.trials
        for level in self.levels:
            self.bad[level] = self.bad.get(level, 0) + other.bad.get(level, 0)
        return self


@dataclass(frozen=True)
class LevelFrequency:
    """Observed frequency of one level being bad, against its bound."""

    level: int
    bad: int
    trials: int
    frequency: float
    ci_lo: float
    ci_hi: float
    bound: float
    passed: bool


def write_level_frequencies(results: Sequence[LevelFrequency], path: str | Path) -> Path:
    """Write one row per level with its frequency, interval and bound."""
    csv_path = Path(path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with csv_path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(LEVEL_COLUMNS)
        for r in results:
            writer.writerow(
                [
                    r.level,
                    r.bad,
                    r.trials,
                    format_float(r.frequency),
                    format_float(r.ci_lo),
                    format_float(r.ci_hi),
                    format_float(r.bound),
                    int(r.passed),
                ],
            )
    return csv_path


def bad_level_chunk(
    config: GameConfig,
    policy: "GameAdversary",
    master_seed: int,
    start: int,
    stop: int,
    levels: tuple[int, ...],
    badness: BadnessConfig | None = None,
) -> BadLevelCounts:
    """Play trials [start, stop) and count, per level, the bad outcomes."""
    badness = badness or BadnessConfig()
    counts = BadLevelCounts(levels=levels, bad=dict.fromkeys(levels, 0))
    for trial in range(start, stop):
        report = analyze(run(config, policy, trial_seed(master_seed, trial)), badness)
        counts.trials += 1
        for level in levels:
            if report.is_bad(level):
                counts.bad[level] += 1
    return counts


def finalize_bad_levels(
    counts: BadLevelCounts,
    badness: BadnessConfig | None = None,
    confidence: float = 0.99,
) -> list[LevelFrequency]:
    """Compare each level's frequency with exp(-ℓ / divisor).

    A level passes when the Clopper-Pearson lower bound does not exceed the
    tail bound, i.e. the observed frequency is within sampling slack of it.
    """
    results = []
    for level in counts.levels:
        interval = clopper_pearson(counts.bad[level], counts.trials, confidence)
        bound = tail_bound(level, badness)
        results.append(
            LevelFrequency(
                level=level,
                bad=counts.bad[level],
                trials=counts.trials,
                frequency=interval.estimate,
                ci_lo=interval.low,
                ci_hi=interval.high,
                bound=bound,
                passed=interval.low <= bound,
            ),
        )
    return results


def estimate_bad_level_frequency(
    config: GameConfig,
    policy: "GameAdversary",
    trials: int,
    seed: int,
    levels: tuple[int, ...],
    badness: BadnessConfig | None = None,
    confidence: float = 0.99,
) -> list[LevelFrequency]:
    """Estimate how often each level is bad and compare with its tail bound.

    Raises:
        InputError: If trials < 1 or a level is not positive
    """
    if trials < 1:
        msg = f"trials must be positive, got {trials}"
        raise InputError(msg)
    if any(level < 1 for level in levels):
        msg = f"levels must be positive, got {levels}"
        raise InputError(msg)
    counts = bad_level_chunk(config, policy, seed, 0, trials, levels, badness)
    results = finalize_bad_levels(counts, badness, confidence)
    logger.info(
        "bad_level_frequency_estimated",
        k=config.k,
        policy=policy.name,
        trials=trials,
        failed_levels=[r.level for r in results if not r.passed],
    )
    return results


@dataclass(frozen=True)
class ChernoffResult:
    """Empirical lower tail of a Bernoulli sum against its Chernoff bound.

    Attributes:
        p: Success probability
        ell: Number of Bernoulli variables
        trials: Sums drawn
        hits: Sums strictly below p·ℓ/2
        empirical: hits / trials
        ci_lo: Clopper-Pearson lower bound
        ci_hi: Clopper-Pearson upper bound
        bound: exp(-p·ℓ/8)
        exact_tail: P(sum < p·ℓ/2) by direct binomial summation
        passed: Empirical within slack of the bound and consistent with the exact tail
    """

    p: float
    ell: int
    trials: int
    hits: int
    empirical: float
    ci_lo: float
    ci_hi: float
    bound: float
    exact_tail: float
    passed: bool

    @property
    def exact_within_ci(self) -> bool:
        """Whether the exact tail lies inside the interval."""
        return self.ci_lo <= self.exact_tail <= self.ci_hi

    def write_csv(self, path: str | Path) -> Path:
        """Write the result as a single CSV row."""
        csv_path = Path(path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        with csv_path.open("w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CHERNOFF_COLUMNS)
            writer.writerow(
                [
                    format_float(self.p),
                    self.ell,
                    self.trials,
                    self.hits,
                    format_float(self.empirical),
                    format_float(self.ci_lo),
                    format_float(self.ci_hi),
                    format_float(self.bound),
                    format_float(self.exact_tail),
                    int(self.passed),
                ],
            )
        return csv_path


def exact_lower_tail(p: float, ell: int) -> float:
    """P(Bin(ℓ, p) < p·ℓ/2) by summing the probability mass function."""
    threshold = p * ell / 2.0
    top = math.ceil(threshold) - 1
    if top < 0:
        return 0.0
    return float(np.sum(stats.binom.pmf(np.arange(top + 1), ell, p)))


def chernoff_tail_check(
    p: float,
    ell: int,
    trials: int,
    seed: int,
    statistics: StatisticsConfig | None = None,
) -> ChernoffResult:
    """Compare the empirical lower tail of a Bernoulli sum with exp(-pℓ/8).

    Each trial draws the sum of ℓ independent Bernoulli(p) variables and
    counts whether it falls strictly below p·ℓ/2.

    Args:
        p: Success probability in (0, 1]
        ell: Number of variables (≥ 1)
        trials: Number of sums (≥ 10^4)
        seed: Seed of the draw
        statistics: Confidence settings

    Returns:
        ChernoffResult

    Raises:
        InputError: On invalid parameters
    """
    statistics = statistics or StatisticsConfig()
    if not 0.0 < p <= 1.0:
        msg = f"p must lie in (0, 1], got {p}"
        raise InputError(msg)
    if ell < 1:
        msg = f"ell must be positive, got {ell}"
        raise InputError(msg)
    if trials < MIN_CHERNOFF_TRIALS:
        msg = f"trials must be at least {MIN_CHERNOFF_TRIALS}, got {trials}"
        raise InputError(msg)

    rng = make_generator(seed)
    threshold = p * ell / 2.0
    hits = 0
    remaining = trials
    while remaining:
        size = min(remaining, CHERNOFF_CHUNK)
        sums = rng.binomial(ell, p, size=size)
        hits += int(np.count_nonzero(sums < threshold))
        remaining -= size

    interval: Interval = clopper_pearson(hits, trials, statistics.confidence)
    bound = math.exp(-p * ell / 8.0)
    exact = exact_lower_tail(p, ell)
    passed = interval.low <= bound and interval.contains(exact)
    result = ChernoffResult(
        p=p,
        ell=ell,
        trials=trials,
        hits=hits,
        empirical=interval.estimate,
        ci_lo=interval.low,
        ci_hi=interval.high,
        bound=bound,
        exact_tail=exact,
        passed=passed,
    )
    logger.info(
        "chernoff_checked",
        p=p,
        ell=ell,
        trials=trials,
        empirical=result.empirical,
        bound=bound,
        exact_tail=exact,
        passed=passed,
    )
    return result


__all__ = [
    "ADVANTAGE_COLUMNS",
    "CHERNOFF_COLUMNS",
    "LEVEL_COLUMNS",
    "AdvantageAccumulator",
    "AdvantageEstimate",
    "BadLevelCounts",
    "ChernoffResult",
    "LevelFrequency",
    "RoundEstimate",
    "advantage_chunk",
    "bad_level_chunk",
    "chernoff_tail_check",
    "estimate_advantage",
    "estimate_bad_level_frequency",
    "exact_lower_tail",
    "finalize_advantage",
    "finalize_bad_levels",
    "trial_seed",
    "write_level_frequencies",
]
