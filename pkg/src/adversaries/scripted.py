"""Adversaries replayed from a JSON policy file.

Example file::

    {
      "name": "drift_replica",
      "epsilon": 0.25,
      "rules": [
        {"when": "small", "multiplier": 1.25},
        {"when": "big", "multiplier": 0.75}
      ],
      "reweigh": [{"when": "medium", "floor_to": 2.0}]
    }

For every element the first matching rule applies; unmatched elements get
multiplier 1 and keep their weight. ``from_round`` (inclusive) and
``until_round`` (exclusive) restrict a rule to a range of rounds.

The same file drives seeding noise. There a dataset index is classified by
its base probability scaled by n (mean 1 over the dataset, like normalized
game weights) against the partition thresholds, rounds count from 0 like
game rounds, and reweigh rules do not apply.
"""

import json
from collections.abc import Sequence
from pathlib import Path
from typing import TYPE_CHECKING, Literal

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from src.adversaries.base import GameAdversary, SeedNoisePolicy
from src.config import PartitionConfig
from src.core.errors import PolicySpecError
from src.core.points import FloatArray
from src.game.partition import ElementClass, PartitionView, classify
from src.log_config import get_logger
from src.seeding.perturbation import MAX_EPSILON

if TYPE_CHECKING:
    from src.game.process import RoundSnapshot
    from src.seeding.noisy_kmeanspp import SeedingRound

logger = get_logger(__name__)

ClassName = Literal["small", "medium", "big", "any"]

_CLASS_CODES: dict[str, ElementClass | None] = {
    "small": ElementClass.SMALL,
    "medium": ElementClass.MEDIUM,
    "big": ElementClass.BIG,
    "any": None,
}


class _RoundWindow(BaseModel):
    from_round: int = Field(default=0, ge=0)
    until_round: int | None = Field(default=None, ge=0)

    model_config = {"extra": "forbid", "frozen": True}

    def active(self, round_index: int) -> bool:
        """Whether the rule applies in a round."""
        if round_index < self.from_round:
            return False
        return self.until_round is None or round_index < self.until_round


class MultiplierRule(_RoundWindow):
    """Multiplier applied to one element class."""

    when: ClassName
    multiplier: float = Field(gt=0)


class ReweighRule(_RoundWindow):
    """Truncation of one element class's weights to ``floor_to``."""

    when: ClassName
    floor_to: float = Field(ge=0)


class PolicySpec(BaseModel):
    """Parsed policy file.

    Attributes:
        name: Policy name used in records
        epsilon: Noise level the multipliers must respect
        rules: Multiplier rules, first match wins
        reweigh: Weight truncation rules, first match wins
    """

    name: str = Field(min_length=1)
    epsilon: float = Field(ge=0, lt=MAX_EPSILON)
    rules: list[MultiplierRule] = Field(default_factory=list)
    reweigh: list[ReweighRule] = Field(default_factory=list)

    model_config = {"extra": "forbid", "frozen": True}

    @model_validator(mode="after")
    def check_multiplier_band(self) -> "PolicySpec":
        """Reject multipliers outside [1 - ε, 1 + ε].

        Raises:
            ValueError: Naming the offending rule
        """
        for i, rule in enumerate(self.rules):
            if abs(rule.multiplier - 1.0) > self.epsilon + 1e-12:
                msg = (
                    f"rules.{i}.multiplier: {rule.multiplier} outside "
                    f"[{1.0 - self.epsilon}, {1.0 + self.epsilon}] for epsilon {self.epsilon}"
                )
                raise ValueError(msg)
        return self


def _class_mask(classes: np.ndarray, when: str) -> np.ndarray:
    code = _CLASS_CODES[when]
    if code is None:
        return np.ones(classes.size, dtype=bool)
    return classes == code


def _rule_multipliers(rules: Sequence[MultiplierRule], classes: np.ndarray, round_index: int) -> FloatArray:
    multipliers = np.ones(classes.size)
    assigned = np.zeros(classes.size, dtype=bool)
    for rule in rules:
        if not rule.active(round_index):
            continue
        mask = _class_mask(classes, rule.when) & ~assigned
        multipliers[mask] = rule.multiplier
        assigned |= mask
    return multipliers


class ScriptedPolicy(GameAdversary, SeedNoisePolicy):
    """Deterministic adversary replaying a PolicySpec in the game or in seeding."""

    def __init__(self, spec: PolicySpec, partition: PartitionConfig | None = None):
        """Initialize from a validated spec.

        Args:
            spec: Parsed policy file
            partition: Thresholds classifying dataset indices in seeding
        """
        super().__init__(spec.epsilon)
        self.spec = spec
        self.name = spec.name
        self.partition = partition or PartitionConfig()

    def perturb(
        self,
        history: Sequence["RoundSnapshot"],  # noqa: ARG002
        base: FloatArray,
        view: PartitionView,
    ) -> FloatArray:
        """Multipliers from the first matching rule of each element."""
        return _rule_multipliers(self.spec.rules, view.classes, view.round_index)

    def reweigh(
        self,
        history: Sequence["RoundSnapshot"],  # noqa: ARG002
        weights: FloatArray,
        view: PartitionView,
    ) -> FloatArray:
        """Truncate weights per the first matching reweigh rule."""
        if not self.spec.reweigh:
            return weights
        new_weights = weights.copy()
        assigned = np.zeros(weights.size, dtype=bool)
        for rule in self.spec.reweigh:
            if not rule.active(view.round_index):
                continue
            mask = _class_mask(view.classes, rule.when) & ~assigned
            new_weights[mask] = np.minimum(weights[mask], rule.floor_to)
            assigned |= mask
        return new_weights

    def perturb_seeding(
        self,
        base: FloatArray,
        round_index: int,
        history: Sequence["SeedingRound"],  # noqa: ARG002
    ) -> FloatArray:
        """Multipliers from the first matching rule of each dataset index.

        Args:
            base: Base distribution of the round
            round_index: 1-based seeding round; rule windows see round_index - 1
            history: Earlier rounds (unused)

        Returns:
            Multipliers aligned with the dataset indices
        """
        classes = classify(base * base.size, self.partition)
        return _rule_multipliers(self.spec.rules, classes, round_index - 1)


def parse_policy_spec(text: str, source: str = "<string>") -> PolicySpec:
    """Parse and validate policy JSON.

    Args:
        text: JSON document
        source: Name used in error messages

    Returns:
        Validated PolicySpec

    Raises:
        PolicySpecError: With line/column context for syntax errors or the
            dotted field path for schema errors
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        msg = f"{source}: line {e.lineno} col {e.colno}: {e.msg}"
        raise PolicySpecError(msg) from e

    try:
        return PolicySpec.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "<root>"
        msg = f"{source}: field {location}: {first['msg']}"
        raise PolicySpecError(msg) from e


def load_policy_spec(path: str | Path) -> PolicySpec:
    """Read a policy file.

    Raises:
        FileNotFoundError: If the file does not exist
        PolicySpecError: If it is malformed
    """
    spec_path = Path(path)
    if not spec_path.exists():
        msg = f"Policy file not found: {spec_path}"
        raise FileNotFoundError(msg)
    spec = parse_policy_spec(spec_path.read_text(), str(spec_path))
    logger.info("policy_spec_loaded", path=str(spec_path), name=spec.name, rules=len(spec.rules))
    return spec


def scripted_policy(spec: PolicySpec | str | Path, partition: PartitionConfig | None = None) -> ScriptedPolicy:
    """Build a scripted adversary from a spec or a policy file path."""
    if not isinstance(spec, PolicySpec):
        spec = load_policy_spec(spec)
    return ScriptedPolicy(spec, partition)


__all__ = [
    "MultiplierRule",
    "PolicySpec",
    "ReweighRule",
    "ScriptedPolicy",
    "load_policy_spec",
    "parse_policy_spec",
    "scripted_policy",
]
