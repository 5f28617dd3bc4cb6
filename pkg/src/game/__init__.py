"""Adversarial sampling game: simulator, trace analysis and Monte Carlo estimators."""

from src.game.analysis import (
    BadnessReport,
    CheckResult,
    LevelStatus,
    advantage_series_bound,
    analyze,
    check_analysis_constants,
    check_average_weight_bound,
    check_big_pick_floor,
    check_prefix_average_bound,
    check_trace,
)
from src.game.montecarlo import (
    AdvantageEstimate,
    ChernoffResult,
    LevelFrequency,
    advantage_chunk,
    bad_level_chunk,
    chernoff_tail_check,
    estimate_advantage,
    estimate_bad_level_frequency,
    finalize_advantage,
    finalize_bad_levels,
    trial_seed,
    write_level_frequencies,
)
from src.game.partition import ElementClass, PartitionView, classify
from src.game.process import GameConfig, GameState, GameTrace, RoundSnapshot, normalize, run, step

__all__ = [
    "AdvantageEstimate",
    "BadnessReport",
    "CheckResult",
    "ChernoffResult",
    "ElementClass",
    "GameConfig",
    "GameState",
    "GameTrace",
    "LevelFrequency",
    "LevelStatus",
    "PartitionView",
    "RoundSnapshot",
    "advantage_chunk",
    "advantage_series_bound",
    "analyze",
    "bad_level_chunk",
    "check_analysis_constants",
    "check_average_weight_bound",
    "check_big_pick_floor",
    "check_prefix_average_bound",
    "check_trace",
    "chernoff_tail_check",
    "classify",
    "estimate_advantage",
    "estimate_bad_level_frequency",
    "finalize_advantage",
    "finalize_bad_levels",
    "normalize",
    "run",
    "step",
    "trial_seed",
    "write_level_frequencies",
]
