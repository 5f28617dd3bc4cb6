"""Acceptance suites.

Each suite runs one property check at a fixed trial count (scaled by
``trials_scale``) and reports named metric values with a pass/fail flag.
Every random choice descends from the master seed, so a suite run twice
with the same seed writes byte-identical reports.

Suites: sampler, perturbation, monotone, average_bound, badness, chernoff,
advantage, ratio, determinism; ``all`` runs them in that order.
"""

import csv
import filecmp
import json
import math
import tempfile
from collections.abc import Awaitable, Callable
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Any
import sys

if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from src.adversaries.base import GameAdversary
from src.adversaries.builtin import drift_policy, null_policy, random_policy
from src.adversaries.registry import game_policy_names, resolve_game_policy, resolve_seed_policy, seed_policy_names
from src.config import BadnessConfig, LabConfig, StatisticsConfig
from src.core.cost import d2_distribution
from src.core.errors import AdversaryViolationError, BoundViolationError, InputError
from src.core.io import format_float
from src.core.points import CenterSet, Dataset
from src.core.rng import derive_seed
from src.datagen.generators import game_weights, heavy_element
from src.game.analysis import check_analysis_constants, check_trace
from src.game.montecarlo import (
    MIN_CHERNOFF_TRIALS,
    advantage_chunk,
    bad_level_chunk,
    chernoff_tail_check,
    finalize_advantage,
    finalize_bad_levels,
    trial_seed,
)
from src.game.process import GameConfig, normalize, run
from src.harness.executor import TrialExecutor
from src.harness.experiments import ratio_chunk
from src.harness.plan import DEFAULT_LEVELS
from src.log_config import get_logger
from src.oracle.brute_force import brute_force_optimal
from src.oracle.sampling_check import MIN_DRAWS, empirical_distribution_check, inverse_cdf_sampler
from src.seeding.noisy_kmeanspp import NoiseModel, seed
from src.seeding.perturbation import validate_perturbation

logger = get_logger(__name__)

DEFAULT_FIXTURES = Path(__file__).resolve().parents[2] / "fixtures" / "acceptance.yaml"
PILOT_HEADROOM = 1.5
FUZZ_EPSILONS = (0.1, 0.3, 0.49)
FUZZ_WEIGHTS = ("pareto_tail", "one_heavy(log2)", "all_ones")
BOUND_FUZZ_KS = (16, 64, 256)
ADVANTAGE_KS = (16, 64, 256, 1024)
RATIO_K = 3
SEEDING_FUZZ_K = 4

SUITES = (
    "sampler",
    "perturbation",
    "monotone",
    "average_bound",
    "badness",
    "chernoff",
    "advantage",
    "ratio",
    "determinism",
)
DETERMINISM_SUITES = ("sampler", "perturbation", "chernoff", "ratio")
DETERMINISM_SCALE = 0.01
REPORT_COLUMNS = ("suite", "metric", "value", "passed")


class AcceptanceCaps(BaseModel):
    """Regression caps pinned by pilot runs."""

    advantage_max_mean: float = Field(gt=0)
    advantage_late_max_mean: float = Field(gt=0)
    ratio_noiseless_mean: float = Field(gt=0)
    noise_ratio_factor: float = Field(default=3.0, gt=0)


class AcceptanceFixtures(BaseModel):
    """Fixture file contents.

    Attributes:
        caps: Regression caps
        sampler_center: Row of six_points used as the single center
        six_points: D² sampler fixture
        twelve_points: Brute-force ratio fixture
    """

    caps: AcceptanceCaps
    sampler_center: int = Field(default=0, ge=0)
    six_points: list[list[float]]
    twelve_points: list[list[float]]

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def check_sizes(self) -> Self:
        """Require 6 and 12 rows and a valid center row."""
        if len(self.six_points) != 6:  # noqa: PLR2004
            msg = f"six_points must have 6 rows, got {len(self.six_points)}"
            raise ValueError(msg)
        if len(self.twelve_points) != 12:  # noqa: PLR2004
            msg = f"twelve_points must have 12 rows, got {len(self.twelve_points)}"
            raise ValueError(msg)
        if self.sampler_center >= len(self.six_points):
            msg = f"sampler_center {self.sampler_center} is not a row of six_points"
            raise ValueError(msg)
        return self


def load_fixtures(path: str | Path | None = None) -> AcceptanceFixtures:
    """Read the fixture file.

    Raises:
        FileNotFoundError: If the file is missing
        InputError: If it does not match the fixture schema
    """
    fixtures_path = Path(path) if path is not None else DEFAULT_FIXTURES
    if not fixtures_path.exists():
        msg = f"Acceptance fixtures not found: {fixtures_path}"
        raise FileNotFoundError(msg)
    with fixtures_path.open() as f:
        data = yaml.safe_load(f)
    try:
        return AcceptanceFixtures.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        msg = f"{fixtures_path}: field {location}: {first['msg']}"
        raise InputError(msg) from e


def write_fixtures(fixtures: AcceptanceFixtures, path: str | Path) -> Path:
    """Write fixtures back as YAML."""
    fixtures_path = Path(path)
    fixtures_path.parent.mkdir(parents=True, exist_ok=True)
    with fixtures_path.open("w") as f:
        yaml.safe_dump(fixtures.model_dump(), f, sort_keys=False)
    return fixtures_path


@dataclass
class SuiteResult:
    """Outcome of one acceptance suite.

    Attributes:
        suite: Suite name
        passed: Whether every check of the suite held
        metrics: Named metric values
        messages: Failure descriptions
    """

    suite: str
    passed: bool = True
    metrics: dict[str, float] = field(default_factory=dict)
    messages: list[str] = field(default_factory=list)

    def record(self, name: str, value: float) -> None:
        """Store a metric value."""
        self.metrics[name] = float(value)

    def fail(self, message: str) -> None:
        """Mark the suite failed."""
        self.passed = False
        self.messages.append(message)
        logger.warning("acceptance_check_failed", suite=self.suite, message=message)


@dataclass
class AcceptanceReport:
    """Results of the suites that were run."""

    results: list[SuiteResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """Every suite passed."""
        return all(r.passed for r in self.results)

    def summary(self) -> str:
        """One line per suite."""
        return "\n".join(f"{r.suite}: {'PASS' if r.passed else 'FAIL'}" for r in self.results)

    def write_csv(self, path: str | Path) -> Path:
        """One row per (suite, metric), plus a ``passed`` row per suite."""
        csv_path = Path(path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        with csv_path.open("w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(REPORT_COLUMNS)
            for result in self.results:
                for name in sorted(result.metrics):
                    writer.writerow([result.suite, name, format_float(result.metrics[name]), int(result.passed)])
                writer.writerow([result.suite, "passed", int(result.passed), int(result.passed)])
        return csv_path

    def export_json(self, path: str | Path) -> Path:
        """Write the full report, messages included, as JSON."""
        json_path = Path(path)
        json_path.parent.mkdir(parents=True, exist_ok=True)
        data: dict[str, Any] = {
            "passed": self.passed,
            "suites": [
                {"suite": r.suite, "passed": r.passed, "metrics": r.metrics, "messages": r.messages}
                for r in self.results
            ],
        }
        with json_path.open("w") as f:
            json.dump(data, f, indent=2, sort_keys=True)
            f.write("\n")
        return json_path

    def write(self, out_dir: str | Path) -> list[Path]:
        """Write acceptance.csv and acceptance.json into a directory."""
        directory = Path(out_dir)
        return [self.write_csv(directory / "acceptance.csv"), self.export_json(directory / "acceptance.json")]


@dataclass
class AcceptanceContext:
    """Everything a suite needs.

    Attributes:
        lab: Lab settings
        executor: Trial executor
        fixtures: Fixture file contents
        master_seed: Seed every suite seed descends from
        trials_scale: Factor applied to every trial count
    """

    lab: LabConfig
    executor: TrialExecutor
    fixtures: AcceptanceFixtures
    master_seed: int
    trials_scale: float = 1.0

    def trials(self, full: int, floor: int = 1) -> int:
        """Scaled trial count, never below ``floor``."""
        return max(floor, math.ceil(full * self.trials_scale))

    def seed_for(self, suite: str, *labels: object) -> int:
        """Seed of one study of a suite."""
        return derive_seed(self.master_seed, "accept", suite, *labels)


def _game(lab: LabConfig, weights: str, k: int, epsilon: float, weight_seed: int) -> GameConfig:
    return normalize(GameConfig.from_weights(game_weights(weights, k, weight_seed), epsilon, lab.partition))


@dataclass
class BoundFuzzCounts:
    """Failures of the per-trace deterministic checks over fuzzed games."""

    runs: int = 0
    failures: dict[str, int] = field(default_factory=dict)
    first_failure: str | None = None

    def merge(self, other: "BoundFuzzCounts") -> "BoundFuzzCounts":
        """Fold another count into this one and return self."""
        self.runs += other.runs
        for name, count in other.failures.items():
            self.failures[name] = self.failures.get(name, 0) + count
        if self.first_failure is None:
            self.first_failure = other.first_failure
        return self


def bound_fuzz_chunk(
    config: GameConfig,
    policy: GameAdversary,
    master_seed: int,
    start: int,
    stop: int,
    badness: BadnessConfig | None = None,
    statistics: StatisticsConfig | None = None,
) -> BoundFuzzCounts:
    """Play games [start, stop) and run every per-trace check on each."""
    counts = BoundFuzzCounts()
    for trial in range(start, stop):
        trace = run(config, policy, trial_seed(master_seed, trial))
        counts.runs += 1
        for check in check_trace(trace, badness, statistics):
            if not check.passed:
                counts.failures[check.name] = counts.failures.get(check.name, 0) + 1
                if counts.first_failure is None:
                    counts.first_failure = f"trial {trial}, {check.name}: {check.message}"
    return counts


async def sampler_suite(ctx: AcceptanceContext) -> SuiteResult:
    """D² sampling frequencies match the exact distribution."""
    result = SuiteResult("sampler")
    dataset = Dataset.from_rows(ctx.fixtures.six_points)
    exact = d2_distribution(dataset, CenterSet.from_indices(dataset, [ctx.fixtures.sampler_center]))
    check = empirical_distribution_check(
        inverse_cdf_sampler(exact),
        exact,
        ctx.trials(100_000, MIN_DRAWS),
        ctx.seed_for("sampler"),
        ctx.lab.statistics.tv_threshold,
    )
    result.record("draws", check.draws)
    result.record("tv_distance", check.tv_distance)
    result.record("max_deviation", check.max_deviation)
    if not check.passed:
        result.fail(f"TV distance {check.tv_distance!r} exceeds {check.threshold!r}")
    return result


def _fuzz_game_rounds(ctx: AcceptanceContext, result: SuiteResult, rounds_target: int) -> None:
    tolerance = ctx.lab.statistics.tolerance
    combos = [(name, eps) for name in game_policy_names() for eps in FUZZ_EPSILONS]
    per_combo = math.ceil(rounds_target / len(combos))
    rounds = violations = 0
    for name, eps in combos:
        played = game = 0
        while played < per_combo:
            game_seed = ctx.seed_for("perturbation", "game", name, eps, game)
            config = _game(ctx.lab, "pareto_tail", 16, eps, derive_seed(game_seed, "weights"))
            try:
                trace = run(config, resolve_game_policy(name, eps), game_seed, keep_distributions=True)
            except AdversaryViolationError as e:
                violations += 1
                result.fail(f"{name} at eps={eps}: {e.message}")
                break
            for snapshot in trace.snapshots:
                if snapshot.removed_id is None or snapshot.base is None or snapshot.perturbed is None:
                    continue
                played += 1
                report = validate_perturbation(snapshot.base, snapshot.perturbed, eps, tolerance)
                if not report.is_valid:
                    violations += 1
                    result.fail(f"{name} at eps={eps}, round {snapshot.round}: {report.summary()}")
            game += 1
        rounds += played
    result.record("game_rounds", rounds)
    result.record("game_violations", violations)


def _fuzz_seeding_rounds(ctx: AcceptanceContext, result: SuiteResult, runs: int) -> None:
    tolerance = ctx.lab.statistics.tolerance
    dataset = Dataset.from_rows(ctx.fixtures.twelve_points)
    rounds = violations = 0
    for name in seed_policy_names():
        for eps in FUZZ_EPSILONS:
            noise = NoiseModel(eps, resolve_seed_policy(name, eps))
            for index in range(runs):
                _, trace = seed(dataset, SEEDING_FUZZ_K, noise, ctx.seed_for("perturbation", "seed", name, eps, index))
                for seeding_round in trace.rounds:
                    rounds += 1
                    report = validate_perturbation(seeding_round.base, seeding_round.perturbed, eps, tolerance)
                    if not report.is_valid:
                        violations += 1
                        result.fail(f"seeding {name} at eps={eps}, round {seeding_round.round}: {report.summary()}")
    result.record("seeding_rounds", rounds)
    result.record("seeding_violations", violations)


async def perturbation_suite(ctx: AcceptanceContext) -> SuiteResult:
    """Every shipped policy keeps its distributions inside the band."""
    result = SuiteResult("perturbation")
    _fuzz_game_rounds(ctx, result, ctx.trials(10_000, 100))
    _fuzz_seeding_rounds(ctx, result, ctx.trials(100, 2))
    return result


async def monotone_suite(ctx: AcceptanceContext) -> SuiteResult:
    """Without noise the expected average weight never rises above 1."""
    result = SuiteResult("monotone")
    config = _game(ctx.lab, "one_heavy(4)", 64, 0.0, 0)
    trials = ctx.trials(100_000, 100)
    func = partial(advantage_chunk, config, null_policy(), ctx.seed_for("monotone"), check_bounds=False)
    acc = await ctx.executor.run_merged(func, trials, "accept.monotone")
    estimate = finalize_advantage(acc, ctx.lab.statistics.confidence)
    result.record("trials", trials)
    result.record("max_mean", estimate.max_mean)
    result.record("max_round", estimate.max_round)
    if not estimate.monotone_within(1.0, 3.0, ctx.lab.statistics.tolerance):
        worst = max(estimate.rounds, key=lambda r: (r.mean - 1.0) / r.stderr if r.stderr > 0 else r.mean - 1.0)
        result.fail(f"Round {worst.round} mean {worst.mean!r} exceeds 1 + 3 SE ({worst.stderr!r})")
    return result


async def _bound_fuzz(
    ctx: AcceptanceContext,
    suite: str,
    combos: list[tuple[str, int, str, float]],
    total_runs: int,
) -> BoundFuzzCounts:
    per_combo = max(1, math.ceil(total_runs / len(combos)))
    total = BoundFuzzCounts()
    for name, k, weights, eps in combos:
        study_seed = ctx.seed_for(suite, name, k, weights, eps)
        config = _game(ctx.lab, weights, k, eps, derive_seed(study_seed, "weights"))
        func = partial(
            bound_fuzz_chunk,
            config,
            resolve_game_policy(name, eps),
            study_seed,
            badness=ctx.lab.badness,
            statistics=ctx.lab.statistics,
        )
        label = f"policy={name},k={k},weights={weights},eps={eps}"
        total.merge(await ctx.executor.run_merged(func, per_combo, f"accept.{suite}", label))
    return total


async def average_bound_suite(ctx: AcceptanceContext) -> SuiteResult:
    """No fuzzed game breaks the deterministic average-weight bounds."""
    result = SuiteResult("average_bound")
    combos = [
        (name, k, weights, eps)
        for name in game_policy_names()
        for k in BOUND_FUZZ_KS
        for weights in FUZZ_WEIGHTS
        for eps in FUZZ_EPSILONS
    ]
    counts = await _bound_fuzz(ctx, "average_bound", combos, ctx.trials(10_000, len(combos)))
    average_failures = counts.failures.get("average_weight_bound", 0)
    prefix_failures = counts.failures.get("prefix_average_bound", 0)
    result.record("runs", counts.runs)
    result.record("average_bound_counterexamples", average_failures)
    result.record("prefix_bound_counterexamples", prefix_failures)
    if average_failures or prefix_failures:
        result.fail(f"Counterexample: {counts.first_failure}")
    return result


async def badness_suite(ctx: AcceptanceContext) -> SuiteResult:
    """Bad levels are as rare as their tail bound and the constants support it."""
    result = SuiteResult("badness")
    constants = check_analysis_constants(ctx.lab.partition, ctx.lab.badness)
    result.record("big_density", constants.observed)
    if not constants.passed:
        result.fail(constants.message)

    eps = 0.49
    k = 1024
    study_seed = ctx.seed_for("badness", "tail")
    config = _game(ctx.lab, "pareto_tail", k, eps, derive_seed(study_seed, "weights"))
    trials = ctx.trials(200_000, 10)
    func = partial(
        bad_level_chunk,
        config,
        drift_policy(eps),
        study_seed,
        levels=DEFAULT_LEVELS,
        badness=ctx.lab.badness,
    )
    counts = await ctx.executor.run_merged(func, trials, "accept.badness", f"k={k}")
    result.record("trials", trials)
    for frequency in finalize_bad_levels(counts, ctx.lab.badness, ctx.lab.statistics.confidence):
        result.record(f"bad_frequency_l{frequency.level}", frequency.frequency)
        result.record(f"tail_bound_l{frequency.level}", frequency.bound)
        if not frequency.passed:
            result.fail(
                f"Level {frequency.level} bad in {frequency.bad}/{frequency.trials} trials; "
                f"bound {frequency.bound!r}",
            )

    floor_counts = await _bound_fuzz(ctx, "big_pick_floor", [("drift", 256, "pareto_tail", eps)], ctx.trials(1000, 10))
    floor_failures = floor_counts.failures.get("big_pick_floor", 0)
    result.record("big_pick_floor_counterexamples", floor_failures)
    if floor_failures:
        result.fail(f"Big-pick floor counterexample: {floor_counts.first_failure}")
    return result


async def chernoff_suite(ctx: AcceptanceContext) -> SuiteResult:
    """Bernoulli-sum lower tail against exp(-pℓ/8) and the exact tail."""
    result = SuiteResult("chernoff")
    check = chernoff_tail_check(
        0.2,
        100,
        ctx.trials(1_000_000, MIN_CHERNOFF_TRIALS),
        ctx.seed_for("chernoff"),
        ctx.lab.statistics,
    )
    result.record("trials", check.trials)
    result.record("empirical", check.empirical)
    result.record("ci_hi", check.ci_hi)
    result.record("bound", check.bound)
    result.record("exact_tail", check.exact_tail)
    if not check.passed:
        result.fail(
            f"Empirical tail {check.empirical!r} (CI {check.ci_lo!r}..{check.ci_hi!r}) vs bound "
            f"{check.bound!r}, exact {check.exact_tail!r}",
        )
    return result


async def advantage_suite(ctx: AcceptanceContext) -> SuiteResult:
    """Drift sweep: the per-round means stay under one pair of caps for every k.

    Round 0 is the normalized start, so its mean is 1 for every k. The late
    cap bounds the largest mean over rounds ≥ 1, where the adversary acts.
    """
    result = SuiteResult("advantage")
    eps = 0.49
    weights = "one_heavy(log2)"
    cap = ctx.fixtures.caps.advantage_max_mean
    late_cap = ctx.fixtures.caps.advantage_late_max_mean
    trials = ctx.trials(10_000, 10)
    result.record("cap", cap)
    result.record("late_cap", late_cap)
    for k in ADVANTAGE_KS:
        config = _game(ctx.lab, weights, k, eps, 0)
        func = partial(
            advantage_chunk,
            config,
            drift_policy(eps),
            ctx.seed_for("advantage", k),
            heavy_id=heavy_element(weights),
            badness=ctx.lab.badness,
            check_bounds=True,
        )
        try:
            acc = await ctx.executor.run_merged(func, trials, "accept.advantage", f"k={k}")
        except BoundViolationError as e:
            result.fail(f"k={k}: {e.message}")
            continue
        estimate = finalize_advantage(acc, ctx.lab.statistics.confidence, heavy_tracked=True)
        result.record(f"max_mean_k{k}", estimate.max_mean)
        if estimate.late_max_mean is not None:
            result.record(f"late_max_mean_k{k}", estimate.late_max_mean)
            result.record(f"late_max_round_k{k}", estimate.late_max_round or 0)
            if estimate.late_max_mean > late_cap:
                result.fail(f"k={k}: late max mean {estimate.late_max_mean!r} exceeds cap {late_cap!r}")
        if estimate.heavy_early_fraction is not None:
            result.record(f"heavy_early_fraction_k{k}", estimate.heavy_early_fraction)
        if estimate.max_mean > cap:
            result.fail(f"k={k}: max mean {estimate.max_mean!r} exceeds cap {cap!r}")
    return result


async def ratio_suite(ctx: AcceptanceContext) -> SuiteResult:
    """Noiseless and noisy mean ratios on the 12-point fixture."""
    result = SuiteResult("ratio")
    dataset = Dataset.from_rows(ctx.fixtures.twelve_points)
    optimum = brute_force_optimal(dataset, RATIO_K).cost
    trials = ctx.trials(10_000, 10)
    result.record("optimal_cost", optimum)

    means: dict[str, float] = {}
    for label, noise in (
        ("noiseless", NoiseModel(0.0, null_policy())),
        ("noisy", NoiseModel(0.3, random_policy(0.3))),
    ):
        func = partial(
            ratio_chunk,
            dataset,
            RATIO_K,
            noise,
            optimum,
            ctx.seed_for("ratio", label),
            tolerance=ctx.lab.statistics.tolerance,
        )
        acc = await ctx.executor.run_merged(func, trials, "accept.ratio", label)
        if acc.finite == 0:
            result.fail(f"{label}: no finite ratio")
            continue
        means[label] = acc.sums / acc.finite
        result.record(f"{label}_mean_ratio", means[label])

    caps = ctx.fixtures.caps
    if "noiseless" in means and means["noiseless"] > caps.ratio_noiseless_mean:
        result.fail(f"Noiseless mean ratio {means['noiseless']!r} exceeds {caps.ratio_noiseless_mean!r}")
    if len(means) == 2 and means["noisy"] > caps.noise_ratio_factor * means["noiseless"]:  # noqa: PLR2004
        result.fail(
            f"Noisy mean ratio {means['noisy']!r} exceeds {caps.noise_ratio_factor} x noiseless {means['noiseless']!r}",
        )
    return result


async def determinism_suite(ctx: AcceptanceContext) -> SuiteResult:
    """Two runs with the same seed write byte-identical reports."""
    result = SuiteResult("determinism")
    small = replace(ctx, trials_scale=min(ctx.trials_scale, DETERMINISM_SCALE))
    with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
        for directory in (first, second):
            report = await run_suites(DETERMINISM_SUITES, small)
            report.write(directory)
        names = ["acceptance.csv", "acceptance.json"]
        _, mismatch, errors = filecmp.cmpfiles(first, second, names, shallow=False)
    result.record("files_compared", len(names))
    result.record("mismatches", len(mismatch) + len(errors))
    if mismatch or errors:
        result.fail(f"Outputs differ between identical runs: {sorted(mismatch + errors)}")
    return result


SuiteRunner = Callable[[AcceptanceContext], Awaitable[SuiteResult]]

SUITE_RUNNERS: dict[str, SuiteRunner] = {
    "sampler": sampler_suite,
    "perturbation": perturbation_suite,
    "monotone": monotone_suite,
    "average_bound": average_bound_suite,
    "badness": badness_suite,
    "chernoff": chernoff_suite,
    "advantage": advantage_suite,
    "ratio": ratio_suite,
    "determinism": determinism_suite,
}


async def run_suites(names: tuple[str, ...] | list[str], ctx: AcceptanceContext) -> AcceptanceReport:
    """Run the named suites in order."""
    report = AcceptanceReport()
    for name in names:
        logger.info("acceptance_suite_started", suite=name, trials_scale=ctx.trials_scale)
        result = await SUITE_RUNNERS[name](ctx)
        logger.info("acceptance_suite_finished", suite=name, passed=result.passed)
        report.results.append(result)
    return report


def suite_names(suite: str) -> list[str]:
    """Expand a suite id (``all`` or one name).

    Raises:
        InputError: If the suite is unknown
    """
    if suite == "all":
        return list(SUITES)
    if suite not in SUITE_RUNNERS:
        msg = f"Unknown suite '{suite}'; choose from {['all', *SUITES]}"
        raise InputError(msg)
    return [suite]


async def run_acceptance(suite: str, ctx: AcceptanceContext, out_dir: str | Path | None = None) -> AcceptanceReport:
    """Run a suite (or ``all``) and optionally write its report.

    Args:
        suite: Suite name or ``all``
        ctx: Suite context
        out_dir: Directory for acceptance.csv and acceptance.json

    Returns:
        AcceptanceReport; failures are results, not exceptions
    """
    report = await run_suites(suite_names(suite), ctx)
    if out_dir is not None:
        report.write(out_dir)
    logger.info("acceptance_finished", suite=suite, passed=report.passed)
    return report


async def run_pilot(ctx: AcceptanceContext, fixtures_path: str | Path | None = None) -> AcceptanceFixtures:
    """Re-pin the caps from observed values plus 50% headroom and save them.

    The pilot runs with every cap lifted, so only bound violations and
    infinite ratios stop it.

    Raises:
        BoundViolationError: If the pilot suites fail; the file is left untouched
    """
    unlimited = AcceptanceCaps(
        advantage_max_mean=math.inf,
        advantage_late_max_mean=math.inf,
        ratio_noiseless_mean=math.inf,
        noise_ratio_factor=math.inf,
    )
    pilot_ctx = replace(ctx, fixtures=ctx.fixtures.model_copy(update={"caps": unlimited}))
    report = await run_suites(["advantage", "ratio"], pilot_ctx)
    metrics = {name: value for r in report.results for name, value in r.metrics.items()}
    observed_advantage = max(metrics.get(f"max_mean_k{k}", 0.0) for k in ADVANTAGE_KS)
    observed_late = max(metrics.get(f"late_max_mean_k{k}", 0.0) for k in ADVANTAGE_KS)
    if not report.passed or observed_advantage <= 0.0 or observed_late <= 0.0:
        msg = f"Pilot run failed; caps left unchanged:\n{report.summary()}"
        raise BoundViolationError(msg)
    caps = ctx.fixtures.caps.model_copy(
        update={
            "advantage_max_mean": PILOT_HEADROOM * observed_advantage,
            "advantage_late_max_mean": PILOT_HEADROOM * observed_late,
            "ratio_noiseless_mean": PILOT_HEADROOM * metrics["noiseless_mean_ratio"],
        },
    )
    fixtures = ctx.fixtures.model_copy(update={"caps": caps})
    write_fixtures(fixtures, fixtures_path if fixtures_path is not None else DEFAULT_FIXTURES)
    logger.info(
        "pilot_caps_written",
        advantage_max_mean=caps.advantage_max_mean,
        advantage_late_max_mean=caps.advantage_late_max_mean,
        ratio_noiseless_mean=caps.ratio_noiseless_mean,
    )
    return fixtures


__all__ = [
    "SUITES",
    "AcceptanceCaps",
    "AcceptanceContext",
    "AcceptanceFixtures",
    "AcceptanceReport",
    "BoundFuzzCounts",
    "SuiteResult",
    "bound_fuzz_chunk",
    "load_fixtures",
    "run_acceptance",
    "run_pilot",
    "run_suites",
    "suite_names",
    "write_fixtures",
]
