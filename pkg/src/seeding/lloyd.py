"""Lloyd refinement of a center set."""

from dataclasses import dataclass, field

import numpy as np

from src.core.cost import point_costs, squared_distances
from src.core.errors import InputError
from src.core.points import CenterSet, Dataset
from src.log_config import get_logger

logger = get_logger(__name__)


@dataclass
class LloydResult:
    """Outcome of a Lloyd run.

    Attributes:
        centers: Refined centers
        costs: Cost before the first iteration followed by the cost after each
        iterations: Iterations performed
        converged: True when the assignment stopped changing before max_iters
    """

    centers: CenterSet
    costs: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    @property
    def final_cost(self) -> float:
        """Cost of the refined centers."""
        return self.costs[-1]


def refine_with_trace(X: Dataset, C: CenterSet, max_iters: int) -> LloydResult:  # noqa: N803
    """Alternate assignment and centroid steps, recording the cost.

    Empty clusters keep their previous center. Ties in the assignment go to
    the lowest center index.

    Args:
        X: Dataset
        C: Starting centers
        max_iters: Upper bound on iterations (≥ 1)

    Returns:
        LloydResult with the cost sequence

    Raises:
        InputError: If max_iters < 1 or dimensions differ
    """
    if max_iters < 1:
        msg = f"max_iters must be positive, got {max_iters}"
        raise InputError(msg)

    costs = [float(point_costs(X, C).sum())]
    centers = np.array(C.centers, dtype=np.float64)
    assignment = np.argmin(squared_distances(X.points, centers), axis=1)
    iterations = 0
    converged = False

    for _ in range(max_iters):
        updated = centers.copy()
        for j in range(centers.shape[0]):
            members = assignment == j
            if members.any():
                updated[j] = X.points[members].mean(axis=0)
        distances = squared_distances(X.points, updated)
        new_assignment = np.argmin(distances, axis=1)
        centers = updated
        iterations += 1
        costs.append(float(distances[np.arange(X.n), new_assignment].sum()))
        if np.array_equal(new_assignment, assignment):
            converged = True
            break
        assignment = new_assignment

    logger.debug("lloyd_finished", iterations=iterations, converged=converged, cost=costs[-1])
    return LloydResult(
        centers=CenterSet(centers, source_rounds=C.source_rounds),
        costs=costs,
        iterations=iterations,
        converged=converged,
    )


def lloyd_refine(X: Dataset, C: CenterSet, max_iters: int) -> CenterSet:  # noqa: N803
    """Refine centers with at most ``max_iters`` Lloyd iterations."""
    return refine_with_trace(X, C, max_iters).centers


__all__ = ["LloydResult", "lloyd_refine", "refine_with_trace"]
