"""Exact and noisy k-means++ seeding.

Round 1 samples from the uniform distribution over the dataset, every later
round from the D² distribution of the centers chosen so far. In each round
the noise policy tilts the distribution within the multiplicative band of
the noise model before one index is drawn. Exactly k centers are returned.

Random stream: one Philox generator per run, one uniform draw per round,
consumed in round order. The noise policy is forked with a seed derived
from the run seed, so it never shares the sampler's stream.
"""

import csv
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from src.core.errors import InputError
from src.core.io import format_float
from src.core.points import CenterSet, Dataset, FloatArray, ProbVec
from src.core.rng import derive_seed, make_generator, sample_index
from src.log_config import get_logger
from src.seeding.perturbation import check_epsilon, perturb_distribution

if TYPE_CHECKING:
    from src.adversaries.base import SeedNoisePolicy

logger = get_logger(__name__)

TRACE_COLUMNS = (
    "round",
    "sampled_index",
    "base_prob_of_sampled",
    "perturbed_prob_of_sampled",
    "cost_after",
    "degenerate",
)


@dataclass(frozen=True)
class NoiseModel:
    """Noise applied to every seeding round.

    Attributes:
        epsilon: Noise level in [0, 1/2)
        policy: Noise policy; None behaves as the null policy
    """

    epsilon: float = 0.0
    policy: "SeedNoisePolicy | None" = None

    def __post_init__(self) -> None:
        """Validate the noise level."""
        object.__setattr__(self, "epsilon", check_epsilon(self.epsilon))

    @property
    def policy_name(self) -> str:
        """Registry name of the policy."""
        return self.policy.name if self.policy is not None else "null"


@dataclass(frozen=True)
class SeedingRound:
    """Audit record of one seeding round.

    Attributes:
        round: 1-based round number
        sampled_index: Dataset index chosen as the new center
        base_prob_of_sampled: Base probability of that index
        perturbed_prob_of_sampled: Perturbed probability of that index
        cost_after: k-means cost once the new center is added
        degenerate: True when the cost was already 0 and the draw fell back
            to the uniform distribution over unchosen indices
        contraction: Fraction of the policy's tilt that was applied
        base: Full base distribution (only when distributions are kept)
        perturbed: Full perturbed distribution (only when distributions are kept)
    """

    round: int
    sampled_index: int
    base_prob_of_sampled: float
    perturbed_prob_of_sampled: float
    cost_after: float
    degenerate: bool = False
    contraction: float = 1.0
    base: ProbVec | None = None
    perturbed: ProbVec | None = None

    def as_row(self) -> dict[str, str]:
        """CSV row with 17-significant-digit floats."""
        return {
            "round": str(self.round),
            "sampled_index": str(self.sampled_index),
            "base_prob_of_sampled": format_float(self.base_prob_of_sampled),
            "perturbed_prob_of_sampled": format_float(self.perturbed_prob_of_sampled),
            "cost_after": format_float(self.cost_after),
            "degenerate": str(int(self.degenerate)),
        }


@dataclass
class SeedingTrace:
    """Per-round audit trail of one seeding run."""

    rounds: list[SeedingRound] = field(default_factory=list)
    epsilon: float = 0.0
    policy: str = "null"
    seed: int = 0

    def __len__(self) -> int:
        return len(self.rounds)

    @property
    def sampled_indices(self) -> list[int]:
        """Chosen dataset indices in round order."""
        return [r.sampled_index for r in self.rounds]

    @property
    def costs(self) -> list[float]:
        """Cost after every round."""
        return [r.cost_after for r in self.rounds]

    @property
    def degenerate_rounds(self) -> list[int]:
        """Rounds that used the uniform fallback."""
        return [r.round for r in self.rounds if r.degenerate]

    def write_csv(self, path: str | Path) -> Path:
        """Write the trace as CSV, creating parent directories."""
        csv_path = Path(path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        with csv_path.open("w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=TRACE_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for record in self.rounds:
                writer.writerow(record.as_row())
        return csv_path


def _policy_multipliers(
    policy: "SeedNoisePolicy | None",
    base: FloatArray,
    round_index: int,
    history: Sequence[SeedingRound],
) -> FloatArray:
    if policy is None:
        return np.ones_like(base)
    return policy.perturb_seeding(base, round_index, history)


def seed(
    X: Dataset,  # noqa: N803
    k: int,
    noise: NoiseModel | None = None,
    rng_seed: int = 0,
    keep_distributions: bool = True,
) -> tuple[CenterSet, SeedingTrace]:
    """Run (noisy) k-means++ seeding.

    Args:
        X: Dataset to seed
        k: Number of centers, 1 ≤ k ≤ n
        noise: Noise model; None means exact k-means++
        rng_seed: 64-bit seed of the run
        keep_distributions: Store full base/perturbed vectors in the trace

    Returns:
        Tuple of (k centers in selection order, per-round trace)

    Raises:
        InputError: If k is outside [1, n]
        AdversaryViolationError: If the policy emits out-of-band multipliers

    Example:
        >>> centers, trace = seed(dataset, 3, NoiseModel(0.1, random_policy(0.1)), rng_seed=7)
        >>> len(centers), len(trace)
        (3, 3)
    """
    noise = noise or NoiseModel()
    if not 1 <= k <= X.n:
        msg = f"k must lie in [1, n={X.n}], got {k}"
        raise InputError(msg)

    rng = make_generator(rng_seed)
    policy = noise.policy.fork(derive_seed(rng_seed, "seed_noise")) if noise.policy else None
    trace = SeedingTrace(epsilon=noise.epsilon, policy=noise.policy_name, seed=rng_seed)

    points = X.points
    chosen: list[int] = []
    unchosen = np.ones(X.n, dtype=bool)
    min_sq = np.full(X.n, np.inf)

    for round_index in range(1, k + 1):
        degenerate = False
        if round_index == 1:
            base = np.full(X.n, 1.0 / X.n)
        else:
            total = float(min_sq.sum())
            if total > 0.0:
                base = min_sq / total
            else:
                degenerate = True
                base = unchosen / float(np.count_nonzero(unchosen))
                logger.info("seeding_zero_cost_fallback", round=round_index, remaining=k - round_index + 1)

        multipliers = _policy_multipliers(policy, base, round_index, trace.rounds)
        perturbation = perturb_distribution(base, multipliers, noise.epsilon, round_index=round_index)
        index = sample_index(perturbation.probs, float(rng.random()))

        chosen.append(index)
        unchosen[index] = False
        np.minimum(min_sq, np.sum((points - points[index]) ** 2, axis=1), out=min_sq)
        cost_after = float(min_sq.sum())

        trace.rounds.append(
            SeedingRound(
                round=round_index,
                sampled_index=index,
                base_prob_of_sampled=float(base[index]),
                perturbed_prob_of_sampled=float(perturbation.probs[index]),
                cost_after=cost_after,
                degenerate=degenerate,
                contraction=perturbation.contraction,
                base=ProbVec(base) if keep_distributions else None,
                perturbed=ProbVec(perturbation.probs) if keep_distributions else None,
            ),
        )
        logger.debug("seeding_round_sampled", round=round_index, index=index, cost=cost_after)

    logger.debug(
        "seeding_finished",
        k=k,
        n=X.n,
        epsilon=noise.epsilon,
        policy=noise.policy_name,
        cost=trace.rounds[-1].cost_after,
    )
    return CenterSet.from_indices(X, chosen), trace


__all__ = ["TRACE_COLUMNS", "NoiseModel", "SeedingRound", "SeedingTrace", "seed"]
