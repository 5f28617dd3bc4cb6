"""Exhaustive optimal k-means on tiny instances.

Partitions are enumerated as restricted growth strings: point 0 opens block
0 and each later point joins an existing block or opens the next one, up to
k blocks. Block costs are maintained incrementally while descending, and a
branch is cut as soon as its partial cost reaches the best complete cost
(adding points never lowers a block's cost).
"""

from dataclasses import dataclass

import numpy as np

from src.core.cost import set_cost
from src.core.errors import InputError
from src.core.points import CenterSet, Dataset
from src.log_config import get_logger

logger = get_logger(__name__)

MAX_POINTS = 12
MAX_CLUSTERS = 4


@dataclass(frozen=True)
class OptimalClustering:
    """A globally optimal clustering.

    Attributes:
        partition: Block label of every point, in restricted-growth form
        centers: Centroid of every non-empty block, in label order
        cost: k-means cost of the centers, recomputed directly
    """

    partition: tuple[int, ...]
    centers: CenterSet
    cost: float

    @property
    def blocks(self) -> list[list[int]]:
        """Point indices of each block."""
        groups: list[list[int]] = [[] for _ in range(max(self.partition) + 1)]
        for index, label in enumerate(self.partition):
            groups[label].append(index)
        return groups


def _centroids(points: np.ndarray, labels: tuple[int, ...]) -> np.ndarray:
    label_arr = np.asarray(labels)
    return np.array([points[label_arr == b].mean(axis=0) for b in range(max(labels) + 1)])


def brute_force_optimal(X: Dataset, k: int) -> OptimalClustering:  # noqa: N803
    """Minimum-cost clustering over all partitions into at most k blocks.

    Args:
        X: Dataset with n ≤ 12 points
        k: Number of clusters, 1 ≤ k ≤ 4

    Returns:
        OptimalClustering with centroid centers

    Raises:
        InputError: If n or k exceed the enumeration caps or k < 1

    Example:
        >>> result = brute_force_optimal(Dataset.from_rows([[0], [1], [10], [11]]), 2)
        >>> result.cost
        1.0
    """
    if k < 1:
        msg = f"k must be positive, got {k}"
        raise InputError(msg)
    if X.n > MAX_POINTS or k > MAX_CLUSTERS:
        msg = (
            f"Brute force is limited to n <= {MAX_POINTS} and k <= {MAX_CLUSTERS} "
            f"(got n={X.n}, k={k})"
        )
        raise InputError(msg)

    points = X.points
    n = X.n
    counts = np.zeros(k, dtype=np.int64)
    sums = np.zeros((k, X.d))
    labels = [0] * n
    best_cost = np.inf
    best_labels: tuple[int, ...] = ()
    improvements = 0

    def descend(index: int, used: int, partial: float) -> None:
        nonlocal best_cost, best_labels, improvements
        if partial >= best_cost:
            return
        if index == n:
            improvements += 1
            best_cost = partial
            best_labels = tuple(labels)
            return
        x = points[index]
        for block in range(min(used + 1, k)):
            count = counts[block]
            if count:
                offset = x - sums[block] / count
                increase = float(count / (count + 1) * np.dot(offset, offset))
            else:
                increase = 0.0
            previous_sum = sums[block].copy()
            counts[block] += 1
            sums[block] += x
            labels[index] = block
            descend(index + 1, max(used, block + 1), partial + increase)
            counts[block] -= 1
            sums[block] = previous_sum

    descend(0, 0, 0.0)

    centers = CenterSet(_centroids(points, best_labels))
    cost = set_cost(X, centers)
    logger.debug("brute_force_finished", n=n, k=k, cost=cost, improvements=improvements)
    return OptimalClustering(partition=best_labels, centers=centers, cost=cost)


__all__ = ["MAX_CLUSTERS", "MAX_POINTS", "OptimalClustering", "brute_force_optimal"]
