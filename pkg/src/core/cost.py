"""Squared-Euclidean k-means cost and exact D² sampling distributions."""

import numpy as np
from numpy.typing import ArrayLike

from src.core.errors import DegenerateInstanceError, InputError
from src.core.points import CenterSet, Dataset, FloatArray, ProbVec, as_point


def _check_dimension(d_points: int, centers: CenterSet) -> None:
    if d_points != centers.d:
        msg = f"Dimension mismatch: points have d={d_points}, centers have d={centers.d}"
        raise InputError(msg)


def squared_distances(points: FloatArray, centers: FloatArray) -> FloatArray:
    """Pairwise squared distances, shape (n, m).

    Computed as explicit differences rather than the expanded
    ``|x|² - 2x·c + |c|²`` form, so coincident points give exactly 0.
    """
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("nmd,nmd->nm", diff, diff)


def point_costs(X: Dataset, C: CenterSet) -> FloatArray:  # noqa: N803
    """Per-point cost φ(x, C) for every point of the dataset.

    Raises:
        InputError: If the dataset and centers differ in dimension
    """
    _check_dimension(X.d, C)
    costs = np.full(X.n, np.inf)
    # One center at a time keeps memory at O(n) for large n
    for center in C.centers:
        np.minimum(costs, np.sum((X.points - center) ** 2, axis=1), out=costs)
    return costs


def point_cost(x: ArrayLike, C: CenterSet) -> float:  # noqa: N803
    """Squared distance from a point to its nearest center.

    Args:
        x: The point
        C: Non-empty center set of the same dimension

    Returns:
        min over c in C of ||x - c||²; exactly 0 iff x is a center

    Raises:
        InputError: On dimension mismatch or invalid coordinates

    Example:
        >>> point_cost([0.0, 0.0], CenterSet(np.array([[3.0, 4.0]])))
        25.0
    """
    point = as_point(x)
    _check_dimension(point.size, C)
    return float(np.min(np.sum((C.centers - point) ** 2, axis=1)))


def set_cost(X: Dataset, C: CenterSet) -> float:  # noqa: N803
    """k-means cost φ(X, C): sum of point costs over the dataset.

    Raises:
        InputError: If the dataset and centers differ in dimension
    """
    return float(np.sum(point_costs(X, C)))


def normalized_costs(costs: FloatArray) -> FloatArray:
    """Normalize nonnegative costs into probabilities.

    Raises:
        DegenerateInstanceError: If every cost is 0
    """
    total = float(np.sum(costs))
    if total <= 0.0:
        msg = "Total cost is 0: every point coincides with a center"
        raise DegenerateInstanceError(msg)
    return costs / total


def d2_distribution(X: Dataset, C: CenterSet) -> ProbVec:  # noqa: N803
    """Exact D² distribution φ(x_j, C) / φ(X, C) over dataset indices.

    Points that coincide with a center get probability exactly 0.

    Args:
        X: The dataset
        C: Current centers

    Returns:
        ProbVec of length n

    Raises:
        InputError: On dimension mismatch
        DegenerateInstanceError: If set_cost(X, C) is 0
    """
    return ProbVec(normalized_costs(point_costs(X, C)))


__all__ = [
    "d2_distribution",
    "normalized_costs",
    "point_cost",
    "point_costs",
    "set_cost",
    "squared_distances",
]
