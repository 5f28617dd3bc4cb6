"""Policy lookup by name, as used by ``--policy <name|file:path>``."""

from collections.abc import Callable

from src.adversaries.base import GameAdversary, SeedNoisePolicy
from src.adversaries.builtin import drift_policy, near_bias_policy, null_policy, random_policy
from src.adversaries.scripted import ScriptedPolicy, scripted_policy
from src.config import PartitionConfig
from src.core.errors import InputError
from src.log_config import get_logger

logger = get_logger(__name__)

FILE_PREFIX = "file:"

_GAME_POLICIES: dict[str, Callable[[float], GameAdversary]] = {
    "null": lambda _eps: null_policy(),
    "random": random_policy,
    "drift": drift_policy,
}

_SEED_POLICIES: dict[str, Callable[[float], SeedNoisePolicy]] = {
    "null": lambda _eps: null_policy(),
    "random": random_policy,
    "near_bias": near_bias_policy,
}


def game_policy_names() -> list[str]:
    """Names of the built-in game adversaries."""
    return sorted(_GAME_POLICIES)


def seed_policy_names() -> list[str]:
    """Names of the built-in seeding noise policies."""
    return sorted(_SEED_POLICIES)


def _load_file_policy(name: str, epsilon: float, partition: PartitionConfig | None = None) -> ScriptedPolicy:
    policy = scripted_policy(name[len(FILE_PREFIX) :], partition)
    if policy.epsilon > epsilon:
        logger.warning(
            "policy_epsilon_exceeds_run",
            policy=policy.name,
            policy_epsilon=policy.epsilon,
            game_epsilon=epsilon,
        )
    return policy


def resolve_game_policy(name: str, epsilon: float) -> GameAdversary:
    """Build a game adversary from a registry name or ``file:<path>``.

    Args:
        name: Built-in name or ``file:`` followed by a policy file path
        epsilon: Noise level of the game

    Returns:
        Game adversary instance

    Raises:
        InputError: If the name is unknown
        PolicySpecError: If a policy file is malformed
        FileNotFoundError: If a policy file is missing
    """
    if name.startswith(FILE_PREFIX):
        return _load_file_policy(name, epsilon)

    factory = _GAME_POLICIES.get(name)
    if factory is None:
        msg = f"Unknown game policy '{name}'; choose from {game_policy_names()} or file:<path>"
        raise InputError(msg)
    return factory(epsilon)


def resolve_seed_policy(name: str, epsilon: float, partition: PartitionConfig | None = None) -> SeedNoisePolicy:
    """Build a seeding noise policy from a registry name or ``file:<path>``.

    Args:
        name: Built-in name or ``file:`` followed by a policy file path
        epsilon: Noise level of the seeding run
        partition: Thresholds a policy file classifies dataset indices with

    Raises:
        InputError: If the name is unknown
        PolicySpecError: If a policy file is malformed
        FileNotFoundError: If a policy file is missing
    """
    if name.startswith(FILE_PREFIX):
        return _load_file_policy(name, epsilon, partition)

    factory = _SEED_POLICIES.get(name)
    if factory is None:
        msg = f"Unknown seeding policy '{name}'; choose from {seed_policy_names()} or file:<path>"
        raise InputError(msg)
    return factory(epsilon)


__all__ = [
    "game_policy_names",
    "resolve_game_policy",
    "resolve_seed_policy",
    "seed_policy_names",
]
