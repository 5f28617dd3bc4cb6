"""Built-in noise policies.

- null: multipliers all 1, weights unchanged
- random: i.i.d. multipliers uniform on [1 - ε, 1 + ε]
- drift: favors removing small elements so that big weights survive, and
  truncates medium weights down to the small threshold
- near_bias (seeding only): favors points close to the current centers
"""

from collections.abc import Sequence
from typing import TYPE_CHECKING

import numpy as np

from src.adversaries.base import GameAdversary, SeedNoisePolicy
from src.core.errors import InputError
from src.core.points import FloatArray
from src.core.rng import make_generator
from src.game.partition import ElementClass, PartitionView
from src.seeding.perturbation import check_epsilon

if TYPE_CHECKING:
    from src.game.process import RoundSnapshot
    from src.seeding.noisy_kmeanspp import SeedingRound


class NullPolicy(GameAdversary, SeedNoisePolicy):
    """Applies no noise at all."""

    name = "null"

    def __init__(self) -> None:
        """Initialize with ε = 0."""
        super().__init__(0.0)

    def perturb(
        self,
        history: Sequence["RoundSnapshot"],  # noqa: ARG002
        base: FloatArray,
        view: PartitionView,  # noqa: ARG002
    ) -> FloatArray:
        """All-ones multipliers."""
        return np.ones_like(base)

    def perturb_seeding(
        self,
        base: FloatArray,
        round_index: int,  # noqa: ARG002
        history: Sequence["SeedingRound"],  # noqa: ARG002
    ) -> FloatArray:
        """All-ones multipliers."""
        return np.ones_like(base)


class RandomPolicy(GameAdversary, SeedNoisePolicy):
    """Independent uniform multipliers, modeling numerical noise.

    The policy owns a Philox stream separate from the sampler's, seeded per
    run through ``fork``.
    """

    name = "random"

    def __init__(self, epsilon: float, seed: int = 0):
        """Initialize the policy.

        Args:
            epsilon: Noise level in [0, 1/2)
            seed: Seed of the policy's own random stream
        """
        super().__init__(check_epsilon(epsilon))
        self.seed = seed
        self._rng = make_generator(seed)

    def _draw(self, size: int) -> FloatArray:
        if self.epsilon == 0.0:
            return np.ones(size)
        return self._rng.uniform(1.0 - self.epsilon, 1.0 + self.epsilon, size=size)

    def perturb(
        self,
        history: Sequence["RoundSnapshot"],  # noqa: ARG002
        base: FloatArray,
        view: PartitionView,  # noqa: ARG002
    ) -> FloatArray:
        """Fresh uniform multipliers for every survivor."""
        return self._draw(base.size)

    def perturb_seeding(
        self,
        base: FloatArray,
        round_index: int,  # noqa: ARG002
        history: Sequence["SeedingRound"],  # noqa: ARG002
    ) -> FloatArray:
        """Fresh uniform multipliers for every dataset index."""
        return self._draw(base.size)

    def fork(self, seed: int) -> "RandomPolicy":
        """New instance with its own stream for one run."""
        return RandomPolicy(self.epsilon, seed)


class DriftPolicy(GameAdversary):
    """Heuristic maximizer of the average surviving weight.

    Small elements get multiplier 1 + ε, big ones 1 - ε and medium ones 1,
    so removals land on small elements. After each removal every medium
    weight is truncated to the small threshold. Big weights are never
    modified.
    """

    name = "drift"

    def __init__(self, epsilon: float):
        """Initialize the policy.

        Args:
            epsilon: Noise level in (0, 1/2); without noise there is nothing to tilt

        Raises:
            InputError: If epsilon is not positive or not below 1/2
        """
        epsilon = check_epsilon(epsilon)
        if epsilon <= 0.0:
            msg = f"drift needs a positive epsilon, got {epsilon}"
            raise InputError(msg)
        super().__init__(epsilon)

    def perturb(
        self,
        history: Sequence["RoundSnapshot"],  # noqa: ARG002
        base: FloatArray,
        view: PartitionView,
    ) -> FloatArray:
        """Tilt toward small elements and away from big ones."""
        multipliers = np.ones_like(base)
        multipliers[view.mask(ElementClass.SMALL)] = 1.0 + self.epsilon
        multipliers[view.mask(ElementClass.BIG)] = 1.0 - self.epsilon
        return multipliers

    def reweigh(
        self,
        history: Sequence["RoundSnapshot"],  # noqa: ARG002
        weights: FloatArray,
        view: PartitionView,
    ) -> FloatArray:
        """Truncate medium weights to the small threshold."""
        medium = view.mask(ElementClass.MEDIUM)
        if not medium.any():
            return weights
        new_weights = weights.copy()
        new_weights[medium] = np.minimum(weights[medium], view.partition.small_threshold)
        return new_weights


class NearBiasPolicy(SeedNoisePolicy):
    """Seeding noise that steers sampling toward already-covered regions.

    Points whose base probability is below the median of the positive
    entries get 1 + ε, the rest 1 - ε.
    """

    name = "near_bias"

    def __init__(self, epsilon: float):
        """Initialize the policy with its noise level in [0, 1/2)."""
        super().__init__(check_epsilon(epsilon))

    def perturb_seeding(
        self,
        base: FloatArray,
        round_index: int,  # noqa: ARG002
        history: Sequence["SeedingRound"],  # noqa: ARG002
    ) -> FloatArray:
        """Boost low-cost points and damp high-cost ones."""
        positive = base[base > 0.0]
        if positive.size == 0:
            return np.ones_like(base)
        median = float(np.median(positive))
        return np.where(base < median, 1.0 + self.epsilon, 1.0 - self.epsilon)


def null_policy() -> NullPolicy:
    """Policy that reduces noisy seeding and the game to their noiseless forms."""
    return NullPolicy()


def random_policy(epsilon: float, seed: int = 0) -> RandomPolicy:
    """Policy with i.i.d. uniform multipliers on [1 - ε, 1 + ε]."""
    return RandomPolicy(epsilon, seed)


def drift_policy(epsilon: float) -> DriftPolicy:
    """Greedy drift heuristic for the sampling game."""
    return DriftPolicy(epsilon)


def near_bias_policy(epsilon: float) -> NearBiasPolicy:
    """Seeding noise that favors points near existing centers."""
    return NearBiasPolicy(epsilon)


__all__ = [
    "DriftPolicy",
    "NearBiasPolicy",
    "NullPolicy",
    "RandomPolicy",
    "drift_policy",
    "near_bias_policy",
    "null_policy",
    "random_policy",
]
