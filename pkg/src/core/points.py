"""Point sets, center sets and discrete distributions.

All containers hold read-only numpy arrays.
"""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.errors import InputError

PROB_SUM_TOLERANCE = 1e-9

FloatArray = NDArray[np.float64]


def _frozen(values: ArrayLike) -> FloatArray:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


def as_point(coords: ArrayLike) -> FloatArray:
    """Validate and freeze a single point.

    Args:
        coords: Coordinates of the point

    Returns:
        Read-only 1-D float array

    Raises:
        InputError: If the point is not 1-D, empty, or has non-finite coordinates
    """
    point = np.asarray(coords, dtype=np.float64)
    if point.ndim != 1 or point.size == 0:
        msg = f"A point must be a non-empty 1-D coordinate sequence, got shape {point.shape}"
        raise InputError(msg)
    if not np.all(np.isfinite(point)):
        msg = "Point coordinates must be finite"
        raise InputError(msg)
    return _frozen(point)


@dataclass(frozen=True)
class Dataset:
    """A multiset of n points in d-dimensional space.

    Duplicate rows are kept as distinct indices.

    Attributes:
        points: Array of shape (n, d)
    """

    points: FloatArray

    def __post_init__(self) -> None:
        """Validate shape and finiteness, then freeze the array."""
        array = np.asarray(self.points, dtype=np.float64)
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:  # noqa: PLR2004
            msg = f"Dataset needs shape (n >= 1, d >= 1), got {array.shape}"
            raise InputError(msg)
        if not np.all(np.isfinite(array)):
            msg = "Dataset contains non-finite coordinates"
            raise InputError(msg)
        object.__setattr__(self, "points", _frozen(array))

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]]) -> "Dataset":
        """Build a dataset from row sequences, rejecting ragged input.

        Args:
            rows: One coordinate sequence per point

        Returns:
            Validated Dataset

        Raises:
            InputError: If rows differ in length or the input is empty
        """
        materialized = [list(row) for row in rows]
        if not materialized:
            msg = "Dataset needs at least one point"
            raise InputError(msg)
        widths = {len(row) for row in materialized}
        if len(widths) != 1:
            msg = f"Ragged rows: found widths {sorted(widths)}"
            raise InputError(msg)
        return cls(np.array(materialized, dtype=np.float64))

    @property
    def n(self) -> int:
        """Number of points."""
        return int(self.points.shape[0])

    @property
    def d(self) -> int:
        """Dimension of every point."""
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return self.n

    def translated(self, shift: ArrayLike) -> "Dataset":
        """Return a copy shifted by a common vector."""
        return Dataset(self.points + as_point(shift))


@dataclass(frozen=True)
class CenterSet:
    """An ordered set of centers with provenance.

    Attributes:
        centers: Array of shape (m, d), m >= 1
        source_rounds: Round (1-based) in which each center was chosen
        point_indices: Dataset index of each center, or None when the centers
            are not dataset members (e.g. after Lloyd refinement)
    """

    centers: FloatArray
    source_rounds: tuple[int, ...] = ()
    point_indices: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        """Validate shapes and fill default provenance."""
        array = np.asarray(self.centers, dtype=np.float64)
        if array.ndim == 1:
            array = array.reshape(1, -1)
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:  # noqa: PLR2004
            msg = f"CenterSet needs shape (m >= 1, d >= 1), got {array.shape}"
            raise InputError(msg)
        if not np.all(np.isfinite(array)):
            msg = "Centers must have finite coordinates"
            raise InputError(msg)
        object.__setattr__(self, "centers", _frozen(array))

        rounds = self.source_rounds or tuple(range(1, array.shape[0] + 1))
        if len(rounds) != array.shape[0]:
            msg = "source_rounds must have one entry per center"
            raise InputError(msg)
        object.__setattr__(self, "source_rounds", tuple(int(r) for r in rounds))

        if self.point_indices is not None and len(self.point_indices) != array.shape[0]:
            msg = "point_indices must have one entry per center"
            raise InputError(msg)

    @classmethod
    def from_indices(cls, dataset: Dataset, indices: Sequence[int]) -> "CenterSet":
        """Select dataset rows as centers, in the given order."""
        if not indices:
            msg = "At least one center index is required"
            raise InputError(msg)
        idx = [int(i) for i in indices]
        return cls(
            dataset.points[idx],
            source_rounds=tuple(range(1, len(idx) + 1)),
            point_indices=tuple(idx),
        )

    @property
    def size(self) -> int:
        """Number of centers."""
        return int(self.centers.shape[0])

    @property
    def d(self) -> int:
        """Dimension of the centers."""
        return int(self.centers.shape[1])

    def __len__(self) -> int:
        return self.size

    def with_center(self, center: ArrayLike, source_round: int | None = None) -> "CenterSet":
        """Return a new center set with one more center appended."""
        point = as_point(center)
        rounds = (*self.source_rounds, source_round or self.size + 1)
        return CenterSet(np.vstack([self.centers, point]), source_rounds=rounds)


@dataclass(frozen=True)
class ProbVec:
    """A discrete probability distribution over active indices.

    Attributes:
        probs: Nonnegative entries summing to 1 within ``tolerance``
        tolerance: Absolute tolerance of the sum-to-one check
    """

    probs: FloatArray
    tolerance: float = field(default=PROB_SUM_TOLERANCE, compare=False)

    def __post_init__(self) -> None:
        """Validate nonnegativity and normalization."""
        array = np.asarray(self.probs, dtype=np.float64)
        if array.ndim != 1 or array.size == 0:
            msg = f"ProbVec needs a non-empty 1-D array, got shape {array.shape}"
            raise InputError(msg)
        if not np.all(np.isfinite(array)) or np.any(array < 0):
            msg = "ProbVec entries must be finite and nonnegative"
            raise InputError(msg)
        total = float(array.sum())
        if abs(total - 1.0) > self.tolerance:
            msg = f"ProbVec entries must sum to 1 (got {total!r})"
            raise InputError(msg)
        object.__setattr__(self, "probs", _frozen(array))

    @classmethod
    def uniform(cls, size: int) -> "ProbVec":
        """Uniform distribution over ``size`` items."""
        if size < 1:
            msg = "Uniform distribution needs at least one item"
            raise InputError(msg)
        return cls(np.full(size, 1.0 / size))

    def __len__(self) -> int:
        return int(self.probs.size)

    def __getitem__(self, index: int) -> float:
        return float(self.probs[index])


__all__ = ["CenterSet", "Dataset", "FloatArray", "ProbVec", "as_point"]
