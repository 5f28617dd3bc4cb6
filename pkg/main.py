#!/usr/bin/env python3
"""Main Entry Point and CLI Integration.

Subcommands:
    seed        Noisy k-means++ seeding of a CSV dataset, with a per-round trace
    game        Play (run) or estimate (advantage, badness, chernoff) the sampling game
    oracle      Brute-force optimal clustering of a tiny dataset
    datagen     Synthetic datasets with planted ground truth
    experiment  Run a JSON experiment plan into RunRecord CSVs
    accept      Run the acceptance suites

Exit codes: 0 when every requested check passes, 1 on a failed check or a
bound/adversary violation, 2 on invalid input.
"""

import argparse
import asyncio
import sys
from functools import partial
from pathlib import Path

from src.adversaries.registry import resolve_game_policy, resolve_seed_policy
from src.config import LabConfig, load_config
from src.core.cost import set_cost
from src.core.errors import AdversaryViolationError, BoundViolationError, InputError, PolicySpecError
from src.core.io import format_float, load_dataset, save_dataset
from src.core.points import Dataset
from src.core.rng import derive_seed
from src.datagen.generators import GENERATOR_PREFIX, GenSpec, generate, heavy_element, parse_weight_source
from src.game.analysis import check_trace
from src.game.montecarlo import (
    advantage_chunk,
    bad_level_chunk,
    chernoff_tail_check,
    finalize_advantage,
    finalize_bad_levels,
    write_level_frequencies,
)
from src.game.process import GameConfig, normalize, run
from src.harness.acceptance import SUITES, AcceptanceContext, load_fixtures, run_acceptance, run_pilot
from src.harness.executor import TrialExecutor
from src.harness.experiments import run_plan
from src.harness.plan import DEFAULT_LEVELS, load_plan
from src.log_config import configure_logging, get_logger
from src.oracle.brute_force import brute_force_optimal
from src.seeding.lloyd import refine_with_trace
from src.seeding.noisy_kmeanspp import NoiseModel, seed

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


def _emit(line: str) -> None:
    sys.stdout.write(f"{line}\n")


def _master_seed(args: argparse.Namespace, lab: LabConfig) -> int:
    return args.seed if getattr(args, "seed", None) is not None else lab.master_seed


def _out_dir(args: argparse.Namespace, lab: LabConfig) -> Path:
    return Path(getattr(args, "out_dir", None) or lab.out_dir)


def _game_config(args: argparse.Namespace, lab: LabConfig, master_seed: int) -> GameConfig:
    """Normalized game from --weights, --k and --eps."""
    weights = parse_weight_source(args.weights, args.k, derive_seed(master_seed, "weights"))
    return normalize(GameConfig.from_weights(weights, args.eps, lab.partition))


def _heavy_id(weights: str) -> int | None:
    if not weights.startswith(GENERATOR_PREFIX):
        return None
    return heavy_element(weights[len(GENERATOR_PREFIX) :])


async def cmd_seed(args: argparse.Namespace, lab: LabConfig, _executor: TrialExecutor) -> int:
    """Seed a dataset and write the per-round trace."""
    dataset = load_dataset(args.data)
    noise = NoiseModel(args.eps, resolve_seed_policy(args.policy, args.eps, lab.partition))
    centers, trace = seed(dataset, args.k, noise, _master_seed(args, lab), keep_distributions=False)
    trace.write_csv(args.trace_out)
    _emit(f"cost,{format_float(set_cost(dataset, centers))}")

    if args.lloyd_iters > 0:
        refined = refine_with_trace(dataset, centers, args.lloyd_iters)
        centers = refined.centers
        _emit(f"refined_cost,{format_float(refined.final_cost)}")
    if args.centers_out:
        save_dataset(Dataset(centers.centers), args.centers_out)

    logger.info("seed_command_finished", k=args.k, epsilon=args.eps, policy=args.policy, trace=args.trace_out)
    return EXIT_OK


async def cmd_game(args: argparse.Namespace, lab: LabConfig, executor: TrialExecutor) -> int:
    """Play one game or run a Monte Carlo study of the game."""
    master_seed = _master_seed(args, lab)
    out = Path(args.out)

    if args.action == "chernoff":
        result = chernoff_tail_check(args.p, args.ell, args.trials, master_seed, lab.statistics)
        result.write_csv(out)
        _emit(f"empirical,{format_float(result.empirical)}")
        _emit(f"bound,{format_float(result.bound)}")
        _emit(f"exact_tail,{format_float(result.exact_tail)}")
        return EXIT_OK if result.passed else EXIT_FAILED

    if args.k is None or args.weights is None:
        msg = f"game {args.action} needs --k and --weights"
        raise InputError(msg)
    config = _game_config(args, lab, master_seed)
    policy = resolve_game_policy(args.policy, args.eps)

    if args.action == "run":
        trace = run(config, policy, master_seed)
        trace.write_csv(out)
        failed = [check for check in check_trace(trace, lab.badness, lab.statistics) if not check.passed]
        for check in failed:
            logger.warning("trace_check_failed", check=check.name, message=check.message)
        _emit(f"max_avg_weight,{format_float(float(trace.avg_weights.max()))}")
        return EXIT_FAILED if failed else EXIT_OK

    grid_point = f"k={config.k},eps={args.eps},policy={args.policy}"
    if args.action == "advantage":
        heavy_id = _heavy_id(args.weights)
        func = partial(advantage_chunk, config, policy, master_seed, heavy_id=heavy_id, badness=lab.badness)
        acc = await executor.run_merged(func, args.trials, "game.advantage", grid_point)
        estimate = finalize_advantage(acc, lab.statistics.confidence, heavy_tracked=heavy_id is not None)
        estimate.write_csv(out)
        _emit(f"max_mean,{format_float(estimate.max_mean)}")
        _emit(f"max_round,{estimate.max_round}")
        if estimate.late_max_mean is not None:
            _emit(f"late_max_mean,{format_float(estimate.late_max_mean)}")
            _emit(f"late_max_round,{estimate.late_max_round}")
        return EXIT_OK

    levels = tuple(args.levels)
    func = partial(bad_level_chunk, config, policy, master_seed, levels=levels, badness=lab.badness)
    counts = await executor.run_merged(func, args.trials, "game.badness", grid_point)
    frequencies = finalize_bad_levels(counts, lab.badness, lab.statistics.confidence)
    write_level_frequencies(frequencies, out)
    return EXIT_OK if all(f.passed for f in frequencies) else EXIT_FAILED


async def cmd_oracle(args: argparse.Namespace, _lab: LabConfig, _executor: TrialExecutor) -> int:
    """Print the optimal cost and block of every point."""
    optimum = brute_force_optimal(load_dataset(args.data), args.k)
    _emit(f"cost,{format_float(optimum.cost)}")
    _emit("index,block")
    for index, block in enumerate(optimum.partition):
        _emit(f"{index},{block}")
    return EXIT_OK


async def cmd_datagen(args: argparse.Namespace, lab: LabConfig, _executor: TrialExecutor) -> int:
    """Generate a dataset and its planted metadata."""
    spec = GenSpec(
        family=args.family,
        n=args.n,
        d=args.d,
        k_true=args.k_true,
        separation=args.separation,
        seed=_master_seed(args, lab),
    )
    dataset, metadata = generate(spec)
    save_dataset(dataset, args.out)
    if args.meta_out:
        metadata.write_json(args.meta_out)
    logger.info("datagen_command_finished", family=spec.family, n=spec.n, d=spec.d, out=args.out)
    return EXIT_OK


async def cmd_experiment(args: argparse.Namespace, lab: LabConfig, executor: TrialExecutor) -> int:
    """Run an experiment plan."""
    plan_path = getattr(args, "config", None)
    if not plan_path:
        msg = "experiment needs --config <plan.json>"
        raise InputError(msg)
    plan = load_plan(plan_path)
    if getattr(args, "seed", None) is not None:
        plan = plan.model_copy(update={"master_seed": args.seed})
    outcome = await run_plan(plan, lab, executor, _out_dir(args, lab))
    for failure in outcome.failures:
        logger.warning("experiment_check_failed", experiment_id=plan.experiment_id, message=failure)
    return EXIT_OK if outcome.passed else EXIT_FAILED


async def cmd_accept(args: argparse.Namespace, lab: LabConfig, executor: TrialExecutor) -> int:
    """Run acceptance suites, or re-pin the regression caps with --pilot."""
    ctx = AcceptanceContext(
        lab=lab,
        executor=executor,
        fixtures=load_fixtures(args.fixtures),
        master_seed=_master_seed(args, lab),
        trials_scale=args.trials_scale,
    )
    if args.pilot:
        await run_pilot(ctx, args.fixtures)
        return EXIT_OK
    report = await run_acceptance(args.suite, ctx, _out_dir(args, lab))
    _emit(report.summary())
    return EXIT_OK if report.passed else EXIT_FAILED


COMMANDS = {
    "seed": cmd_seed,
    "game": cmd_game,
    "oracle": cmd_oracle,
    "datagen": cmd_datagen,
    "experiment": cmd_experiment,
    "accept": cmd_accept,
}


def _load_lab_config(args: argparse.Namespace) -> LabConfig:
    """Lab settings with CLI overrides applied."""
    settings = getattr(args, "settings", None)
    lab = LabConfig.from_yaml(settings) if settings else load_config()
    threads = getattr(args, "threads", None)
    if threads is not None:
        lab = lab.model_copy(update={"runner": lab.runner.model_copy(update={"threads": threads})})
    for warning in lab.validate_config():
        logger.warning("configuration_warning", message=warning)
    return lab


async def main_async(args: argparse.Namespace) -> int:
    """Run one subcommand.

    Args:
        args: Parsed command-line arguments

    Returns:
        Exit code (0 pass, 1 failed check or violation, 2 invalid input)
    """
    log_level = getattr(args, "log_level", "INFO")
    configure_logging(log_level, json_logs=log_level != "DEBUG")

    try:
        lab = _load_lab_config(args)
        async with TrialExecutor(lab.runner) as executor:
            return await COMMANDS[args.command](args, lab, executor)

    except (InputError, PolicySpecError) as e:
        logger.exception("invalid_input", error=e.message)
        return EXIT_INPUT

    except FileNotFoundError as e:
        logger.exception("file_not_found", error=str(e))
        return EXIT_INPUT

    except ValueError as e:
        logger.exception("validation_error", error=str(e))
        return EXIT_INPUT

    except (AdversaryViolationError, BoundViolationError) as e:
        logger.exception("violation_detected", error=e.message, details=e.details)
        return EXIT_FAILED


def _common_parser() -> argparse.ArgumentParser:
    """Flags accepted both before and after the subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--settings",
        type=str,
        default=argparse.SUPPRESS,
        help="Lab settings YAML (default: config.yaml if present)",
    )
    common.add_argument(
        "--config",
        type=str,
        default=argparse.SUPPRESS,
        help="JSON experiment plan (experiment)",
    )
    common.add_argument(
        "--seed",
        type=int,
        default=argparse.SUPPRESS,
        help="Master seed (default: settings master_seed)",
    )
    common.add_argument(
        "--out-dir",
        type=str,
        default=argparse.SUPPRESS,
        help="Output directory (default: settings out_dir)",
    )
    common.add_argument(
        "--threads",
        type=int,
        default=argparse.SUPPRESS,
        help="Worker processes for independent trials",
    )
    common.add_argument(
        "--log-level",
        type=str,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default=argparse.SUPPRESS,
        help="Set logging level (default: INFO)",
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with every subcommand."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        description="Noisy k-means++ lab - seeding, the adversarial sampling game and its bound checks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
        epilog="""
Examples:
  # Seed a dataset with 30% random noise
  python main.py seed --data points.csv --k 5 --eps 0.3 --policy random --seed 7 --trace-out trace.csv

  # Advantage of the drift adversary over 10^4 games on 4 workers
  python main.py --threads 4 game advantage --k 256 --eps 0.49 --weights "generator:one_heavy(log2)" \\
      --policy drift --trials 10000 --out advantage.csv

  # Run an experiment plan
  python main.py experiment --config plan.json --out-dir results

  # Quick acceptance pass at 1% of the full trial counts
  python main.py accept --suite all --trials-scale 0.01
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    seed_cmd = sub.add_parser("seed", parents=[common], help="Noisy k-means++ seeding")
    seed_cmd.add_argument("--data", required=True, help="Dataset CSV")
    seed_cmd.add_argument("--k", type=int, required=True)
    seed_cmd.add_argument("--eps", type=float, default=0.0)
    seed_cmd.add_argument("--policy", default="null", help="Seeding policy name or file:<path>")
    seed_cmd.add_argument("--trace-out", required=True, help="Per-round trace CSV")
    seed_cmd.add_argument("--centers-out", default=None, help="Chosen centers CSV")
    seed_cmd.add_argument("--lloyd-iters", type=int, default=0, help="Lloyd refinement iterations")

    game_cmd = sub.add_parser("game", parents=[common], help="Adversarial sampling game")
    game_cmd.add_argument("action", choices=["run", "advantage", "badness", "chernoff"])
    game_cmd.add_argument("--k", type=int, default=None)
    game_cmd.add_argument("--eps", type=float, default=0.0)
    game_cmd.add_argument("--weights", default=None, help="Weight CSV, inline list or generator:<name>")
    game_cmd.add_argument("--policy", default="null", help="Game policy name or file:<path>")
    game_cmd.add_argument("--trials", type=int, default=1000)
    game_cmd.add_argument("--out", required=True, help="Output CSV")
    game_cmd.add_argument("--levels", type=int, nargs="+", default=list(DEFAULT_LEVELS))
    game_cmd.add_argument("--p", type=float, default=0.2, help="Bernoulli probability (chernoff)")
    game_cmd.add_argument("--ell", type=int, default=100, help="Number of Bernoulli variables (chernoff)")

    oracle_cmd = sub.add_parser("oracle", parents=[common], help="Brute-force optimum")
    oracle_cmd.add_argument("action", choices=["opt"])
    oracle_cmd.add_argument("--data", required=True)
    oracle_cmd.add_argument("--k", type=int, required=True)

    datagen_cmd = sub.add_parser("datagen", parents=[common], help="Synthetic datasets")
    datagen_cmd.add_argument(
        "--family",
        choices=["gaussian_mixture", "uniform_cube", "separated_clusters"],
        default="gaussian_mixture",
    )
    datagen_cmd.add_argument("--n", type=int, default=100)
    datagen_cmd.add_argument("--d", type=int, default=2)
    datagen_cmd.add_argument("--k-true", type=int, default=3)
    datagen_cmd.add_argument("--separation", type=float, default=10.0)
    datagen_cmd.add_argument("--out", required=True, help="Dataset CSV")
    datagen_cmd.add_argument("--meta-out", default=None, help="Planted metadata JSON")

    sub.add_parser("experiment", parents=[common], help="Run an experiment plan (--config plan.json)")

    accept_cmd = sub.add_parser("accept", parents=[common], help="Acceptance suites")
    accept_cmd.add_argument("--suite", choices=["all", *SUITES], default="all")
    accept_cmd.add_argument("--trials-scale", type=float, default=1.0, help="Factor applied to every trial count")
    accept_cmd.add_argument("--fixtures", default=None, help="Fixture YAML (default: fixtures/acceptance.yaml)")
    accept_cmd.add_argument("--pilot", action="store_true", help="Re-pin the regression caps with 50%% headroom")

    return parser


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    """Parse command-line arguments.

    Returns:
        Parsed arguments namespace
    """
    return build_parser().parse_args(argv)


def main() -> None:
    """Main entry point.

    Parses arguments, runs the async main function and exits with its code.
    """
    args = parse_args()

    settings = getattr(args, "settings", None)
    if settings and not Path(settings).exists():
        sys.stderr.write(f"Error: Settings file not found: {settings}\n")
        sys.exit(EXIT_INPUT)

    try:
        exit_code = asyncio.run(main_async(args))
        sys.exit(exit_code)
    except KeyboardInterrupt:
        sys.exit(EXIT_FAILED)


if __name__ == "__main__":
    main()
