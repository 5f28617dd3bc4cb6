"""Noise policies for seeding and adversaries for the sampling game."""

from src.adversaries.base import GameAdversary, SeedNoisePolicy
from src.adversaries.builtin import (
    DriftPolicy,
    NearBiasPolicy,
    NullPolicy,
    RandomPolicy,
    drift_policy,
    near_bias_policy,
    null_policy,
    random_policy,
)
from src.adversaries.registry import (
    game_policy_names,
    resolve_game_policy,
    resolve_seed_policy,
    seed_policy_names,
)
from src.adversaries.scripted import PolicySpec, ScriptedPolicy, load_policy_spec, parse_policy_spec, scripted_policy

__all__ = [
    "DriftPolicy",
    "GameAdversary",
    "NearBiasPolicy",
    "NullPolicy",
    "PolicySpec",
    "RandomPolicy",
    "ScriptedPolicy",
    "SeedNoisePolicy",
    "drift_policy",
    "game_policy_names",
    "load_policy_spec",
    "near_bias_policy",
    "null_policy",
    "parse_policy_spec",
    "random_policy",
    "resolve_game_policy",
    "resolve_seed_policy",
    "scripted_policy",
    "seed_policy_names",
]
