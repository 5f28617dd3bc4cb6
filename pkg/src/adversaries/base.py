"""Adversary interfaces for noisy seeding and the sampling game.

Policies only see the round history, the base distribution and (in the
game) a partition view. They never touch the sampler's random stream, so
their choices cannot correlate with the draw of the current round.
"""

from abc import ABC, abstractmethod
from collections.abc import Sequence
from typing import TYPE_CHECKING, Any

from src.core.points import FloatArray

if TYPE_CHECKING:
    from src.game.partition import PartitionView
    from src.game.process import RoundSnapshot
    from src.seeding.noisy_kmeanspp import SeedingRound


class GameAdversary(ABC):
    """Adversary of the sampling game.

    Each round the adversary first tilts the base distribution through
    multipliers, then (after the sampled element is removed) may lower the
    weights of the survivors.

    Attributes:
        name: Registry name of the policy
        epsilon: Noise level the multipliers are bounded by
    """

    name: str = "game_adversary"

    def __init__(self, epsilon: float = 0.0):
        """Initialize the adversary.

        Args:
            epsilon: Noise level; multipliers must stay within [1 - ε, 1 + ε]
        """
        self.epsilon = float(epsilon)

    @abstractmethod
    def perturb(
        self,
        history: Sequence["RoundSnapshot"],
        base: FloatArray,
        view: "PartitionView",
    ) -> FloatArray:
        """Emit one multiplier per surviving element.

        Args:
            history: Snapshots of the earlier rounds (read-only)
            base: Base distribution over ``view.alive_ids``
            view: Partition of the surviving elements

        Returns:
            Multipliers aligned with ``view.alive_ids``
        """

    def reweigh(
        self,
        history: Sequence["RoundSnapshot"],
        weights: FloatArray,
        view: "PartitionView",
    ) -> FloatArray:
        """Choose the next weights of the survivors; unchanged by default.

        Args:
            history: Snapshots including the round just played (read-only)
            weights: Current weights of the survivors
            view: Partition of the survivors

        Returns:
            New weights, entrywise in [0, old]
        """
        return weights

    def fork(self, seed: int) -> "GameAdversary":  # noqa: ARG002
        """Return an instance for one run; stateless policies return self."""
        return self

    def describe(self) -> dict[str, Any]:
        """Fields identifying the policy in records and logs."""
        return {"policy": self.name, "policy_epsilon": self.epsilon}


class SeedNoisePolicy(ABC):
    """Noise adversary of k-means++ seeding."""

    name: str = "seed_noise_policy"

    def __init__(self, epsilon: float = 0.0):
        """Initialize the policy with its noise level."""
        self.epsilon = float(epsilon)

    @abstractmethod
    def perturb_seeding(
        self,
        base: FloatArray,
        round_index: int,
        history: Sequence["SeedingRound"],
    ) -> FloatArray:
        """Emit one multiplier per dataset index.

        Args:
            base: Base distribution of this round (uniform in round 1, D² after)
            round_index: 1-based seeding round
            history: Earlier rounds (read-only)

        Returns:
            Multipliers aligned with the dataset indices
        """

    def fork(self, seed: int) -> "SeedNoisePolicy":  # noqa: ARG002
        """Return an instance for one run; stateless policies return self."""
        return self

    def describe(self) -> dict[str, Any]:
        """Fields identifying the policy in records and logs."""
        return {"policy": self.name, "policy_epsilon": self.epsilon}


__all__ = ["GameAdversary", "SeedNoisePolicy"]
