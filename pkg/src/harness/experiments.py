"""Experiment runners: one RunRecord per grid point of a plan.

- ratio: seeded cost over a baseline (brute-force optimum on tiny
  instances, planted cost on generated ones), with an optional
  Lloyd-refined column
- advantage: per-round expected average surviving weight of the game,
  with the average-weight bound checked on every trace
- badness: per-level frequency of bad outcomes against exp(-ℓ / 40)
- chernoff: lower tail of a Bernoulli sum against exp(-pℓ/8)
"""

import time
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any

from src.adversaries.registry import resolve_game_policy, resolve_seed_policy
from src.config import LabConfig
from src.core.cost import set_cost
from src.core.errors import InputError
from src.core.io import load_dataset
from src.core.points import Dataset
from src.core.rng import derive_seed
from src.core.stats import normal_interval
from src.datagen.generators import GenSpec, PlantedMetadata, game_weights, generate, heavy_element
from src.game.analysis import advantage_series_bound
from src.game.montecarlo import (
    advantage_chunk,
    bad_level_chunk,
    chernoff_tail_check,
    finalize_advantage,
    finalize_bad_levels,
    trial_seed,
    write_level_frequencies,
)
from src.game.process import GameConfig, normalize
from src.harness.executor import TrialExecutor
from src.harness.plan import ExperimentPlan, GridPoint
from src.harness.records import RecordSink, RunRecord
from src.log_config import get_logger
from src.oracle.brute_force import MAX_CLUSTERS, MAX_POINTS, brute_force_optimal
from src.seeding.lloyd import lloyd_refine
from src.seeding.noisy_kmeanspp import NoiseModel, seed

logger = get_logger(__name__)

BRUTE_FORCE_BASELINE = "brute_force"
PLANTED_BASELINE = "planted"


@dataclass(frozen=True)
class Instance:
    """A clustering instance of a ratio experiment."""

    label: str
    dataset: Dataset
    planted: PlantedMetadata | None = None


def resolve_instance(entry: str | dict[str, Any]) -> Instance:
    """Load a CSV path or generate from a GenSpec mapping.

    Raises:
        InputError: If the entry is neither
        FileNotFoundError: If a CSV path does not exist
    """
    if isinstance(entry, str):
        return Instance(label=entry, dataset=load_dataset(entry))
    if isinstance(entry, dict):
        dataset, meta = generate(GenSpec.model_validate(entry))
        return Instance(label=f"{meta.family}:{meta.seed}", dataset=dataset, planted=meta)
    msg = f"Instance must be a CSV path or a generator spec, got {entry!r}"
    raise InputError(msg)


def baseline_cost(instance: Instance, k: int) -> tuple[str, float]:
    """Pick the reference cost of an instance.

    Brute force when n ≤ 12 and k ≤ 4; otherwise the planted cost of a
    generated instance whose k equals k_true.

    Raises:
        InputError: If neither baseline is defined
    """
    if instance.dataset.n <= MAX_POINTS and 1 <= k <= MAX_CLUSTERS:
        return BRUTE_FORCE_BASELINE, brute_force_optimal(instance.dataset, k).cost
    planted = instance.planted
    if planted is not None and planted.planted_cost is not None and planted.k_true == k:
        return PLANTED_BASELINE, planted.planted_cost
    msg = (
        f"No baseline for instance {instance.label} at k={k}: need n <= {MAX_POINTS} and "
        f"k <= {MAX_CLUSTERS}, or a generated instance with k = k_true"
    )
    raise InputError(msg)


@dataclass
class RatioAccumulator:
    """Running sums of cost ratios over seeding trials.

    A zero baseline with zero cost counts as ratio 1 (degenerate); a zero
    baseline with positive cost is unbounded and left out of the sums.
    """

    trials: int = 0
    finite: int = 0
    sums: float = 0.0
    sums_sq: float = 0.0
    cost_sum: float = 0.0
    ratio_one: int = 0
    degenerate: int = 0
    unbounded: int = 0
    refined_finite: int = 0
    refined_sums: float = 0.0
    refined_sums_sq: float = 0.0

    def add(self, cost: float, baseline: float, tolerance: float) -> None:
        """Accumulate one seeded cost."""
        self.trials += 1
        self.cost_sum += cost
        ratio = self._ratio(cost, baseline, tolerance)
        if ratio is None:
            self.unbounded += 1
            return
        self.finite += 1
        self.sums += ratio
        self.sums_sq += ratio * ratio
        if ratio <= 1.0 + tolerance:
            self.ratio_one += 1

    def add_refined(self, cost: float, baseline: float, tolerance: float) -> None:
        """Accumulate one Lloyd-refined cost."""
        ratio = self._ratio(cost, baseline, tolerance, count_degenerate=False)
        if ratio is not None:
            self.refined_finite += 1
            self.refined_sums += ratio
            self.refined_sums_sq += ratio * ratio

    def _ratio(self, cost: float, baseline: float, tolerance: float, count_degenerate: bool = True) -> float | None:
        if baseline > 0.0:
            return cost / baseline
        if cost <= tolerance:
            if count_degenerate:
                self.degenerate += 1
            return 1.0
        return None

    def merge(self, other: "RatioAccumulator") -> "RatioAccumulator":
        """Fold another accumulator into this one and return self."""
        self.trials += other.trials
        self.finite += other.finite
        self.sums += other.sums
        self.sums_sq += other.sums_sq
        self.cost_sum += other.cost_sum
        self.ratio_one += other.ratio_one
        self.degenerate += other.degenerate
        self.unbounded += other.unbounded
        self.refined_finite += other.refined_finite
        self.refined_sums += other.refined_sums
        self.refined_sums_sq += other.refined_sums_sq
        return self


def ratio_chunk(
    dataset: Dataset,
    k: int,
    noise: NoiseModel,
    baseline: float,
    master_seed: int,
    start: int,
    stop: int,
    lloyd_iters: int = 0,
    tolerance: float = 1e-9,
) -> RatioAccumulator:
    """Seed trials [start, stop) and accumulate their cost ratios."""
    acc = RatioAccumulator()
    for trial in range(start, stop):
        centers, _ = seed(dataset, k, noise, trial_seed(master_seed, trial), keep_distributions=False)
        acc.add(set_cost(dataset, centers), baseline, tolerance)
        if lloyd_iters:
            refined = lloyd_refine(dataset, centers, lloyd_iters)
            acc.add_refined(set_cost(dataset, refined), baseline, tolerance)
    return acc


def ratio_metrics(acc: RatioAccumulator, baseline: float, confidence: float, refined: bool) -> dict[str, float]:
    """Metrics of a ratio grid point; ratio statistics only when defined."""
    metrics = {
        "trials": float(acc.trials),
        "baseline_cost": baseline,
        "mean_cost": acc.cost_sum / acc.trials,
        "ratio_one_fraction": acc.ratio_one / acc.trials,
        "degenerate_trials": float(acc.degenerate),
        "unbounded_trials": float(acc.unbounded),
    }
    if acc.finite:
        interval = normal_interval(acc.sums, acc.sums_sq, acc.finite, confidence)
        metrics |= {"mean_ratio": interval.estimate, "ratio_ci_lo": interval.low, "ratio_ci_hi": interval.high}
    if refined and acc.refined_finite:
        interval = normal_interval(acc.refined_sums, acc.refined_sums_sq, acc.refined_finite, confidence)
        metrics |= {
            "lloyd_mean_ratio": interval.estimate,
            "lloyd_ratio_ci_lo": interval.low,
            "lloyd_ratio_ci_hi": interval.high,
        }
    return metrics


def game_config_for(params: dict[str, Any], lab: LabConfig, point_seed: int) -> GameConfig:
    """Normalized game of a grid point (k, epsilon, weights)."""
    weights = game_weights(str(params["weights"]), int(params["k"]), derive_seed(point_seed, "weights"))
    return normalize(GameConfig.from_weights(weights, float(params["epsilon"]), lab.partition))


@dataclass
class ExperimentOutcome:
    """Records of a plan run and whether its checks passed.

    Attributes:
        plan: The executed plan
        sink: Records in output order
        failures: Descriptions of failed checks
        outputs: Files written
    """

    plan: ExperimentPlan
    sink: RecordSink = field(default_factory=RecordSink)
    failures: list[str] = field(default_factory=list)
    outputs: list[Path] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """No check failed."""
        return not self.failures


def _detail_path(plan: ExperimentPlan, out_dir: Path, point: GridPoint, suffix: str) -> Path | None:
    if plan.outputs.detail_dir is None:
        return None
    return out_dir / plan.outputs.detail_dir / f"{plan.experiment_id}_{point.order:04d}_{suffix}.csv"


async def run_ratio_experiment(
    plan: ExperimentPlan,
    lab: LabConfig,
    executor: TrialExecutor,
    out_dir: str | Path,  # noqa: ARG001
) -> ExperimentOutcome:
    """Mean approximation ratio of (noisy) k-means++ per grid point.

    Grid keys: instance (CSV path or GenSpec mapping), k, epsilon, policy.

    Raises:
        InputError: If a grid point has no baseline
    """
    outcome = ExperimentOutcome(plan=plan)
    instances: dict[str, Instance] = {}
    for point in plan.points():
        started = time.time()
        key = str(point.params["instance"])
        if key not in instances:
            instances[key] = resolve_instance(point.params["instance"])
        instance = instances[key]
        k = int(point.params["k"])
        epsilon = float(point.params["epsilon"])
        baseline_name, baseline = baseline_cost(instance, k)

        noise = NoiseModel(epsilon, resolve_seed_policy(str(point.params["policy"]), epsilon, lab.partition))
        func = partial(
            ratio_chunk,
            instance.dataset,
            k,
            noise,
            baseline,
            point.seed,
            lloyd_iters=plan.lloyd_iters,
            tolerance=lab.statistics.tolerance,
        )
        acc = await executor.run_merged(func, plan.trials, plan.experiment_id, point.label)
        metrics = ratio_metrics(acc, baseline, lab.statistics.confidence, refined=plan.lloyd_iters > 0)
        if acc.finite == 0:
            outcome.failures.append(f"{point.label}: every trial has an unbounded ratio")

        outcome.sink.add(
            RunRecord(
                experiment_id=plan.experiment_id,
                params={**point.params, "baseline": baseline_name},
                seed=point.seed,
                metrics=metrics,
                order=point.order,
                wall_time=time.time() - started,
            ),
        )
        logger.info(
            "ratio_point_finished",
            params=point.label,
            baseline=baseline_name,
            mean_ratio=metrics.get("mean_ratio"),
            unbounded_trials=acc.unbounded,
        )
    return outcome


def add_growth_metrics(records: list[RunRecord]) -> None:
    """Ratio of each grid point's max means to the ones at the next smaller k.

    Points are grouped by every parameter except k. Adds ``max_mean_growth``
    and, where both points have it, ``late_max_mean_growth``.
    """
    groups: dict[str, list[RunRecord]] = {}
    for record in records:
        others = {key: value for key, value in record.params.items() if key != "k"}
        groups.setdefault(repr(sorted(others.items())), []).append(record)
    for group in groups.values():
        ordered = sorted(group, key=lambda r: int(r.params["k"]))
        for previous, current in zip(ordered, ordered[1:], strict=False):
            for name in ("max_mean", "late_max_mean"):
                if previous.metrics.get(name, 0.0) > 0.0 and name in current.metrics:
                    current.metrics[f"{name}_growth"] = current.metrics[name] / previous.metrics[name]


async def run_advantage_sweep(
    plan: ExperimentPlan,
    lab: LabConfig,
    executor: TrialExecutor,
    out_dir: str | Path,
) -> ExperimentOutcome:
    """Expected average surviving weight per round, per grid point.

    Grid keys: k, epsilon, policy, weights (a weight generator name). The
    average-weight bound is checked on every trace.

    Raises:
        BoundViolationError: On the first counterexample to the bound
    """
    outcome = ExperimentOutcome(plan=plan)
    series_bound = advantage_series_bound(lab.badness.average_bound_factor, lab.badness.tail_rate_divisor)
    records = []
    for point in plan.points():
        started = time.time()
        config = game_config_for(point.params, lab, point.seed)
        policy = resolve_game_policy(str(point.params["policy"]), config.epsilon)
        heavy_id = heavy_element(str(point.params["weights"]))

        func = partial(
            advantage_chunk,
            config,
            policy,
            point.seed,
            heavy_id=heavy_id,
            badness=lab.badness,
            check_bounds=True,
        )
        acc = await executor.run_merged(func, plan.trials, plan.experiment_id, point.label)
        estimate = finalize_advantage(acc, lab.statistics.confidence, heavy_tracked=heavy_id is not None)

        metrics = {
            "trials": float(estimate.trials),
            "max_mean": estimate.max_mean,
            "max_round": float(estimate.max_round),
            "max_ci_hi": estimate.max_ci_hi,
            "final_mean": estimate.rounds[-1].mean,
            "series_bound": series_bound,
            "max_worst_bad_level": float(max(estimate.worst_levels, default=1)),
        }
        if estimate.late_max_mean is not None:
            metrics["late_max_mean"] = estimate.late_max_mean
            metrics["late_max_round"] = float(estimate.late_max_round or 0)
        if estimate.heavy_early_fraction is not None:
            metrics["heavy_early_fraction"] = estimate.heavy_early_fraction

        detail = _detail_path(plan, Path(out_dir), point, "advantage")
        if detail is not None:
            outcome.outputs.append(estimate.write_csv(detail))

        records.append(
            RunRecord(
                experiment_id=plan.experiment_id,
                params=point.params,
                seed=point.seed,
                metrics=metrics,
                order=point.order,
                wall_time=time.time() - started,
            ),
        )
        logger.info(
            "advantage_point_finished",
            params=point.label,
            max_mean=estimate.max_mean,
            max_round=estimate.max_round,
        )

    add_growth_metrics(records)
    outcome.sink.extend(records)
    return outcome


async def run_badness_experiment(
    plan: ExperimentPlan,
    lab: LabConfig,
    executor: TrialExecutor,
    out_dir: str | Path,
) -> ExperimentOutcome:
    """Frequency of each level being bad, compared with its tail bound.

    Grid keys: k, epsilon, policy, weights. Levels come from the plan.
    """
    outcome = ExperimentOutcome(plan=plan)
    levels = tuple(plan.levels)
    for point in plan.points():
        started = time.time()
        config = game_config_for(point.params, lab, point.seed)
        policy = resolve_game_policy(str(point.params["policy"]), config.epsilon)

        func = partial(bad_level_chunk, config, policy, point.seed, levels=levels, badness=lab.badness)
        counts = await executor.run_merged(func, plan.trials, plan.experiment_id, point.label)
        frequencies = finalize_bad_levels(counts, lab.badness, lab.statistics.confidence)

        metrics: dict[str, float] = {"trials": float(counts.trials)}
        for result in frequencies:
            metrics[f"bad_frequency_l{result.level}"] = result.frequency
            metrics[f"bad_ci_hi_l{result.level}"] = result.ci_hi
            metrics[f"tail_bound_l{result.level}"] = result.bound
            if not result.passed:
                outcome.failures.append(
                    f"{point.label}: level {result.level} bad in {result.bad}/{result.trials} trials, "
                    f"bound {result.bound!r}",
                )
        metrics["failed_levels"] = float(sum(not r.passed for r in frequencies))

        detail = _detail_path(plan, Path(out_dir), point, "badness")
        if detail is not None:
            outcome.outputs.append(write_level_frequencies(frequencies, detail))

        outcome.sink.add(
            RunRecord(
                experiment_id=plan.experiment_id,
                params=point.params,
                seed=point.seed,
                metrics=metrics,
                order=point.order,
                wall_time=time.time() - started,
            ),
        )
    return outcome


async def run_chernoff_experiment(
    plan: ExperimentPlan,
    lab: LabConfig,
    executor: TrialExecutor,  # noqa: ARG001
    out_dir: str | Path,  # noqa: ARG001
) -> ExperimentOutcome:
    """Empirical Bernoulli-sum lower tail per (p, ell) grid point."""
    outcome = ExperimentOutcome(plan=plan)
    for point in plan.points():
        started = time.time()
        result = chernoff_tail_check(
            float(point.params["p"]),
            int(point.params["ell"]),
            plan.trials,
            point.seed,
            lab.statistics,
        )
        if not result.passed:
            outcome.failures.append(
                f"{point.label}: empirical tail {result.empirical!r} vs bound {result.bound!r}, "
                f"exact {result.exact_tail!r}",
            )
        outcome.sink.add(
            RunRecord(
                experiment_id=plan.experiment_id,
                params=point.params,
                seed=point.seed,
                metrics={
                    "trials": float(result.trials),
                    "hits": float(result.hits),
                    "empirical": result.empirical,
                    "ci_lo": result.ci_lo,
                    "ci_hi": result.ci_hi,
                    "bound": result.bound,
                    "exact_tail": result.exact_tail,
                    "passed": float(result.passed),
                },
                order=point.order,
                wall_time=time.time() - started,
            ),
        )
    return outcome


Runner = Callable[[ExperimentPlan, LabConfig, TrialExecutor, str | Path], Any]

RUNNERS: dict[str, Runner] = {
    "ratio": run_ratio_experiment,
    "advantage": run_advantage_sweep,
    "badness": run_badness_experiment,
    "chernoff": run_chernoff_experiment,
}


async def run_plan(
    plan: ExperimentPlan,
    lab: LabConfig,
    executor: TrialExecutor,
    out_dir: str | Path,
) -> ExperimentOutcome:
    """Run a plan and write its records.

    Args:
        plan: Validated experiment plan
        lab: Lab settings (thresholds, statistics)
        executor: Trial executor
        out_dir: Directory the plan's output paths are relative to

    Returns:
        ExperimentOutcome listing failures and written files
    """
    out_path = Path(out_dir)
    logger.info("experiment_started", experiment_id=plan.experiment_id, kind=plan.kind, out_dir=str(out_path))
    outcome: ExperimentOutcome = await RUNNERS[plan.kind](plan, lab, executor, out_path)

    outcome.outputs.append(outcome.sink.write_csv(out_path / plan.outputs.records_csv))
    if plan.outputs.records_json:
        outcome.outputs.append(outcome.sink.export_json(out_path / plan.outputs.records_json))

    logger.info(
        "experiment_completed",
        experiment_id=plan.experiment_id,
        records=len(outcome.sink),
        passed=outcome.passed,
        failures=len(outcome.failures),
    )
    return outcome


__all__ = [
    "ExperimentOutcome",
    "Instance",
    "RatioAccumulator",
    "baseline_cost",
    "ratio_chunk",
    "resolve_instance",
    "run_advantage_sweep",
    "run_badness_experiment",
    "run_chernoff_experiment",
    "run_plan",
    "run_ratio_experiment",
]
