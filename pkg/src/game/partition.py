"""Big/medium/small classification of surviving elements."""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from src.config import PartitionConfig
from src.core.points import FloatArray


class ElementClass(IntEnum):
    """Weight class of a surviving element."""

    SMALL = 0
    MEDIUM = 1
    BIG = 2


def classify(weights: FloatArray, partition: PartitionConfig) -> np.ndarray:
    """Class code of every weight.

    An element is big iff w ≥ big_threshold, small iff w ≤ small_threshold,
    and medium otherwise.

    Returns:
        int8 array of ElementClass values
    """
    classes = np.full(weights.shape, ElementClass.MEDIUM, dtype=np.int8)
    classes[weights >= partition.big_threshold] = ElementClass.BIG
    classes[weights <= partition.small_threshold] = ElementClass.SMALL
    return classes


@dataclass(frozen=True)
class PartitionView:
    """What a game adversary sees about the surviving elements in a round.

    Arrays are aligned: entry j describes element ``alive_ids[j]``.

    Attributes:
        round_index: Current round (0-based)
        epsilon: Noise level of the game
        alive_ids: Ids of surviving elements, ascending
        weights: Current weights of the surviving elements
        classes: ElementClass code per surviving element
        partition: Thresholds used for the classification
    """

    round_index: int
    epsilon: float
    alive_ids: np.ndarray
    weights: FloatArray
    classes: np.ndarray
    partition: PartitionConfig

    @classmethod
    def build(
        cls,
        round_index: int,
        epsilon: float,
        alive_ids: np.ndarray,
        weights: FloatArray,
        partition: PartitionConfig,
    ) -> "PartitionView":
        """Classify the weights and assemble the view."""
        return cls(
            round_index=round_index,
            epsilon=epsilon,
            alive_ids=alive_ids,
            weights=weights,
            classes=classify(weights, partition),
            partition=partition,
        )

    def mask(self, element_class: ElementClass) -> np.ndarray:
        """Boolean mask of the elements in a class."""
        return self.classes == element_class

    def count(self, element_class: ElementClass) -> int:
        """Number of surviving elements in a class."""
        return int(np.count_nonzero(self.classes == element_class))

    def mass(self, element_class: ElementClass) -> float:
        """Total weight of the surviving elements in a class."""
        return float(self.weights[self.classes == element_class].sum())

    @property
    def size(self) -> int:
        """Number of surviving elements."""
        return int(self.alive_ids.size)


__all__ = ["ElementClass", "PartitionView", "classify"]
