"""Simulator of the adversarial sampling game.

k weighted elements; in every round the base distribution is proportional
to the current weights, an adversary tilts it within the multiplicative
band [1 - ε, 1 + ε], one element is drawn and removed, and the adversary may
then lower (never raise) the weights of the survivors. The game ends when a
single element remains.

Element ids are 0-based positions in the initial weight vector. Snapshot i
describes the state at the start of round i (before removal); the last
snapshot describes the final singleton and has no removed element.
"""

import csv
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import ArrayLike

from src.config import PartitionConfig
from src.core.errors import AdversaryViolationError, InputError
from src.core.io import format_float
from src.core.points import FloatArray
from src.core.rng import derive_seed, make_generator, sample_index
from src.game.partition import ElementClass, PartitionView
from src.log_config import get_logger
from src.seeding.perturbation import DEFAULT_TOLERANCE, check_epsilon, perturb_distribution

if TYPE_CHECKING:
    from src.adversaries.base import GameAdversary

logger = get_logger(__name__)

TRACE_COLUMNS = (
    "round",
    "removed_id",
    "n_big",
    "n_medium",
    "n_small",
    "mass_big",
    "mass_medium",
    "mass_small",
    "avg_weight",
    "degenerate",
)


@dataclass(frozen=True)
class GameConfig:
    """Parameters of one game.

    Attributes:
        initial_weights: Nonnegative finite weights, one per element (k = length)
        epsilon: Noise level in [0, 1/2)
        partition: Big/small thresholds used for snapshots and policies
    """

    initial_weights: FloatArray
    epsilon: float = 0.0
    partition: PartitionConfig = field(default_factory=PartitionConfig)

    def __post_init__(self) -> None:
        """Validate the weights and noise level, then freeze the weights."""
        weights = np.array(self.initial_weights, dtype=np.float64)
        if weights.ndim != 1 or weights.size < 1:
            msg = f"initial_weights must be a non-empty vector, got shape {weights.shape}"
            raise InputError(msg)
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            msg = "initial_weights must be finite and nonnegative"
            raise InputError(msg)
        weights.setflags(write=False)
        object.__setattr__(self, "initial_weights", weights)
        object.__setattr__(self, "epsilon", check_epsilon(self.epsilon))

    @classmethod
    def from_weights(
        cls,
        weights: ArrayLike,
        epsilon: float = 0.0,
        partition: PartitionConfig | None = None,
    ) -> "GameConfig":
        """Build a config from any weight sequence."""
        return cls(np.asarray(weights, dtype=np.float64), epsilon, partition or PartitionConfig())

    @property
    def k(self) -> int:
        """Number of elements."""
        return int(self.initial_weights.size)

    @property
    def mean_weight(self) -> float:
        """Mean initial weight."""
        return float(self.initial_weights.mean())


def normalize(config: GameConfig) -> GameConfig:
    """Scale the initial weights so their mean is 1 (total = k).

    Raises:
        InputError: If every initial weight is 0

    Example:
        >>> normalize(GameConfig.from_weights([0.0, 4.0])).initial_weights
        array([0., 2.])
    """
    total = float(config.initial_weights.sum())
    if total <= 0.0:
        msg = "Cannot normalize all-zero weights"
        raise InputError(msg)
    return replace(config, initial_weights=config.initial_weights * (config.k / total))


@dataclass(frozen=True)
class GameState:
    """Live state of a game.

    Attributes:
        round_index: Rounds played so far
        alive: Mask of surviving element ids
        weights: Current weight of every element (entries of removed elements
            keep their last value)
    """

    round_index: int
    alive: np.ndarray
    weights: FloatArray

    @classmethod
    def initial(cls, config: GameConfig) -> "GameState":
        """State before the first round."""
        return cls(
            round_index=0,
            alive=np.ones(config.k, dtype=bool),
            weights=np.array(config.initial_weights, dtype=np.float64),
        )

    @property
    def alive_ids(self) -> np.ndarray:
        """Ids of surviving elements, ascending."""
        return np.flatnonzero(self.alive)

    @property
    def alive_count(self) -> int:
        """Number of surviving elements."""
        return int(np.count_nonzero(self.alive))

    @property
    def total_weight(self) -> float:
        """Total weight of the survivors."""
        return float(self.weights[self.alive].sum())


@dataclass(frozen=True)
class RoundSnapshot:
    """Partition statistics at the start of one round.

    Attributes:
        round: Round index i (0-based)
        alive_count: |E_i|
        n_big: |B_i|
        n_medium: |M_i|
        n_small: |S_i|
        mass_big: Weight of B_i
        mass_medium: Weight of M_i
        mass_small: Weight of S_i
        removed_id: Element removed in this round, None for the final singleton
        degenerate: Total weight was 0 and the base fell back to uniform
        perturbed_mass_big: Perturbed probability mass of B_i
        perturbed_mass_small: Perturbed probability mass of S_i
        contraction: Fraction of the adversary's tilt that was applied
        base: Base distribution over the survivors (only when kept)
        perturbed: Perturbed distribution over the survivors (only when kept)
    """

    round: int
    alive_count: int
    n_big: int
    n_medium: int
    n_small: int
    mass_big: float
    mass_medium: float
    mass_small: float
    removed_id: int | None = None
    degenerate: bool = False
    perturbed_mass_big: float = 0.0
    perturbed_mass_small: float = 0.0
    contraction: float = 1.0
    base: FloatArray | None = None
    perturbed: FloatArray | None = None

    @property
    def total_weight(self) -> float:
        """w_i(E_i)."""
        return self.mass_big + self.mass_medium + self.mass_small

    @property
    def avg_weight(self) -> float:
        """Average surviving weight w_i(E_i) / |E_i|."""
        return self.total_weight / self.alive_count

    def as_row(self) -> dict[str, str]:
        """CSV row with 17-significant-digit floats."""
        return {
            "round": str(self.round),
            "removed_id": "" if self.removed_id is None else str(self.removed_id),
            "n_big": str(self.n_big),
            "n_medium": str(self.n_medium),
            "n_small": str(self.n_small),
            "mass_big": format_float(self.mass_big),
            "mass_medium": format_float(self.mass_medium),
            "mass_small": format_float(self.mass_small),
            "avg_weight": format_float(self.avg_weight),
            "degenerate": str(int(self.degenerate)),
        }


def _snapshot(
    view: PartitionView,
    removed_id: int | None = None,
    degenerate: bool = False,
    perturbed: FloatArray | None = None,
    base: FloatArray | None = None,
    contraction: float = 1.0,
    keep_distributions: bool = False,
) -> RoundSnapshot:
    q_big = q_small = 0.0
    if perturbed is not None:
        q_big = float(perturbed[view.mask(ElementClass.BIG)].sum())
        q_small = float(perturbed[view.mask(ElementClass.SMALL)].sum())
    return RoundSnapshot(
        round=view.round_index,
        alive_count=view.size,
        n_big=view.count(ElementClass.BIG),
        n_medium=view.count(ElementClass.MEDIUM),
        n_small=view.count(ElementClass.SMALL),
        mass_big=view.mass(ElementClass.BIG),
        mass_medium=view.mass(ElementClass.MEDIUM),
        mass_small=view.mass(ElementClass.SMALL),
        removed_id=removed_id,
        degenerate=degenerate,
        perturbed_mass_big=q_big,
        perturbed_mass_small=q_small,
        contraction=contraction,
        base=base if keep_distributions else None,
        perturbed=perturbed if keep_distributions else None,
    )


def _check_reweigh(
    old: FloatArray,
    new: FloatArray,
    survivor_ids: np.ndarray,
    round_index: int,
) -> None:
    if new.shape != old.shape:
        msg = f"Policy returned {new.size} weights for {old.size} survivors"
        raise AdversaryViolationError(msg, {"round": round_index})
    offending = np.flatnonzero(~np.isfinite(new) | (new < 0.0) | (new > old))
    if offending.size:
        pos = int(offending[0])
        element = int(survivor_ids[pos])
        msg = (
            f"Policy set weight of element {element} to {new[pos]!r} in round {round_index}; "
            f"allowed range is [0, {old[pos]!r}]"
        )
        raise AdversaryViolationError(
            msg,
            {"round": round_index, "element": element, "old": float(old[pos]), "new": float(new[pos])},
        )


def step(
    state: GameState,
    policy: "GameAdversary",
    rng: np.random.Generator,
    config: GameConfig,
    history: list[RoundSnapshot] | None = None,
    keep_distributions: bool = False,
    tolerance: float = DEFAULT_TOLERANCE,
) -> tuple[GameState, RoundSnapshot]:
    """Play one round.

    When ``history`` is given, the new snapshot is appended to it before the
    adversary reweighs, so ``reweigh`` sees the round just played.

    Args:
        state: Current state with at least one survivor
        policy: Game adversary
        rng: Sampler stream; exactly one uniform is consumed
        config: Game parameters (ε and partition thresholds)
        history: Snapshots of earlier rounds
        keep_distributions: Store full distributions in the snapshot
        tolerance: Slack of the perturbation validation

    Returns:
        Tuple of (next state, snapshot of the round played)

    Raises:
        InputError: If no element survives
        AdversaryViolationError: If the policy breaks the band or raises a weight
    """
    alive_ids = state.alive_ids
    if alive_ids.size == 0:
        msg = "Cannot step a game with no surviving elements"
        raise InputError(msg)
    past: Sequence[RoundSnapshot] = history if history is not None else ()

    weights = state.weights[alive_ids]
    view = PartitionView.build(state.round_index, config.epsilon, alive_ids, weights, config.partition)
    total = float(weights.sum())
    degenerate = total <= 0.0
    if degenerate:
        base = np.full(alive_ids.size, 1.0 / alive_ids.size)
        logger.debug("game_zero_weight_fallback", round=state.round_index, alive=int(alive_ids.size))
    else:
        base = weights / total

    multipliers = policy.perturb(past, base, view)
    perturbation = perturb_distribution(
        base,
        multipliers,
        config.epsilon,
        tolerance=tolerance,
        round_index=state.round_index,
    )
    position = sample_index(perturbation.probs, float(rng.random()))
    removed = int(alive_ids[position])

    snapshot = _snapshot(
        view,
        removed_id=removed,
        degenerate=degenerate,
        perturbed=perturbation.probs,
        base=base,
        contraction=perturbation.contraction,
        keep_distributions=keep_distributions,
    )
    if history is not None:
        history.append(snapshot)

    alive = state.alive.copy()
    alive[removed] = False
    survivor_ids = np.delete(alive_ids, position)
    survivor_weights = np.delete(weights, position)
    next_weights = state.weights.copy()

    if survivor_ids.size:
        survivor_view = PartitionView.build(
            state.round_index + 1,
            config.epsilon,
            survivor_ids,
            survivor_weights,
            config.partition,
        )
        new_weights = np.asarray(
            policy.reweigh(history if history is not None else (snapshot,), survivor_weights, survivor_view),
            dtype=np.float64,
        )
        _check_reweigh(survivor_weights, new_weights, survivor_ids, state.round_index)
        next_weights[survivor_ids] = new_weights

    return GameState(state.round_index + 1, alive, next_weights), snapshot


@dataclass
class GameTrace:
    """Snapshots of a complete game.

    Attributes:
        config: Parameters the game was played with
        snapshots: One snapshot per round plus the final singleton (k entries)
        seed: Seed of the run
        policy: Registry name of the adversary
    """

    config: GameConfig
    snapshots: list[RoundSnapshot] = field(default_factory=list)
    seed: int = 0
    policy: str = "null"

    def __len__(self) -> int:
        return len(self.snapshots)

    @property
    def avg_weights(self) -> FloatArray:
        """Average surviving weight per round."""
        return np.array([s.avg_weight for s in self.snapshots])

    @property
    def small_counts(self) -> np.ndarray:
        """|S_i| per round."""
        return np.array([s.n_small for s in self.snapshots], dtype=np.int64)

    @property
    def big_masses(self) -> FloatArray:
        """w_i(B_i) per round."""
        return np.array([s.mass_big for s in self.snapshots])

    @property
    def removal_order(self) -> list[int]:
        """Removed element ids in round order."""
        return [s.removed_id for s in self.snapshots if s.removed_id is not None]

    def removal_round(self, element_id: int) -> int | None:
        """Round in which an element was removed, or None if it survived."""
        for snapshot in self.snapshots:
            if snapshot.removed_id == element_id:
                return snapshot.round
        return None

    def write_csv(self, path: str | Path) -> Path:
        """Write the trace as CSV, creating parent directories."""
        csv_path = Path(path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        with csv_path.open("w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=TRACE_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for snapshot in self.snapshots:
                writer.writerow(snapshot.as_row())
        return csv_path


def run(
    config: GameConfig,
    policy: "GameAdversary",
    rng_seed: int,
    keep_distributions: bool = False,
    tolerance: float = DEFAULT_TOLERANCE,
) -> GameTrace:
    """Play a full game until one element remains.

    The sampler uses one Philox stream seeded with ``rng_seed``; the policy
    is forked with a seed derived from it.

    Args:
        config: Game parameters
        policy: Game adversary
        rng_seed: 64-bit seed of the run
        keep_distributions: Store full distributions in every snapshot
        tolerance: Slack of the perturbation validation

    Returns:
        GameTrace with k snapshots

    Raises:
        AdversaryViolationError: If the policy breaks the rules in any round
    """
    rng = make_generator(rng_seed)
    run_policy = policy.fork(derive_seed(rng_seed, "game_policy"))
    state = GameState.initial(config)
    history: list[RoundSnapshot] = []

    while state.alive_count > 1:
        state, _ = step(
            state,
            run_policy,
            rng,
            config,
            history=history,
            keep_distributions=keep_distributions,
            tolerance=tolerance,
        )

    alive_ids = state.alive_ids
    final_view = PartitionView.build(
        state.round_index,
        config.epsilon,
        alive_ids,
        state.weights[alive_ids],
        config.partition,
    )
    history.append(_snapshot(final_view))
    return GameTrace(config=config, snapshots=history, seed=rng_seed, policy=policy.name)


__all__ = [
    "TRACE_COLUMNS",
    "GameConfig",
    "GameState",
    "GameTrace",
    "RoundSnapshot",
    "normalize",
    "run",
    "step",
]
