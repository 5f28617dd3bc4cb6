"""Reproducible synthetic instances for clustering and game experiments.

All randomness comes from one Philox stream per spec; normal variates use
the inverse-CDF transform, so outputs are stable across platforms.
"""

import json
import math
import re
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, Field

from src.core.errors import InputError
from src.core.points import Dataset, FloatArray
from src.core.rng import make_generator, open_uniforms, standard_normals
from src.log_config import get_logger

logger = get_logger(__name__)

Family = Literal["gaussian_mixture", "uniform_cube", "separated_clusters"]

PARETO_SHAPE = 1.5
GENERATOR_PREFIX = "generator:"
_ONE_HEAVY = re.compile(r"^one_heavy\((?P<m>[^)]+)\)$")


class GenSpec(BaseModel):
    """Parameters of a synthetic dataset.

    Attributes:
        family: Instance family
        n: Number of points
        d: Dimension
        k_true: Number of planted clusters
        separation: Minimum distance between planted means
        seed: Seed of the generator stream
    """

    family: Family = "gaussian_mixture"
    n: int = Field(default=100, ge=1)
    d: int = Field(default=2, ge=1)
    k_true: int = Field(default=3, ge=1)
    separation: float = Field(default=10.0, ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)

    model_config = {"frozen": True}


@dataclass
class PlantedMetadata:
    """Ground truth of a generated dataset.

    Attributes:
        family: Instance family
        n: Number of points
        d: Dimension
        k_true: Planted cluster count
        separation: Requested separation
        seed: Generator seed
        means: Planted means (None for uniform_cube)
        assignment: Planted cluster of every point (None for uniform_cube)
        planted_cost: Cost of the planted means (None for uniform_cube)
    """

    family: str
    n: int
    d: int
    k_true: int
    separation: float
    seed: int
    means: list[list[float]] | None = None
    assignment: list[int] | None = None
    planted_cost: float | None = None

    def to_dict(self) -> dict[str, Any]:
        """JSON-serializable representation."""
        return asdict(self)

    def write_json(self, path: str | Path) -> Path:
        """Write the metadata as JSON, creating parent directories."""
        json_path = Path(path)
        json_path.parent.mkdir(parents=True, exist_ok=True)
        with json_path.open("w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        return json_path


def lattice_means(k: int, d: int, spacing: float) -> FloatArray:
    """First k points of the integer lattice with side ceil(k^(1/d)), scaled.

    Distinct lattice points are at least ``spacing`` apart.
    """
    side = 1
    while side**d < k:
        side += 1
    remainder = np.arange(k, dtype=np.int64)
    coords = np.zeros((k, d))
    for axis in range(d):
        coords[:, axis] = remainder % side
        remainder = remainder // side
    return coords * spacing


def simplex_means(k: int, d: int, spacing: float) -> FloatArray:
    """k points with every pairwise distance equal to spacing (needs d ≥ k)."""
    means = np.zeros((k, d))
    means[np.arange(k), np.arange(k)] = spacing / math.sqrt(2.0)
    return means


def _planted_cost(points: FloatArray, means: FloatArray, assignment: np.ndarray) -> float:
    return float(np.sum((points - means[assignment]) ** 2))


def generate(spec: GenSpec) -> tuple[Dataset, PlantedMetadata]:
    """Generate a dataset with its planted ground truth.

    - gaussian_mixture: k_true unit-variance spherical clusters around
      lattice means spaced ``separation`` apart
    - separated_clusters: point masses, n/k_true copies each, pairwise at
      distance ``separation`` (on a lattice when d < k_true); planted cost 0
    - uniform_cube: i.i.d. uniform points on [0, 1]^d

    Points are assigned to clusters round-robin, so cluster sizes differ by
    at most one.

    Raises:
        InputError: If n < k_true
    """
    if spec.n < spec.k_true:
        msg = f"Infeasible spec: n={spec.n} < k_true={spec.k_true}"
        raise InputError(msg)

    rng = make_generator(spec.seed)
    meta = PlantedMetadata(
        family=spec.family,
        n=spec.n,
        d=spec.d,
        k_true=spec.k_true,
        separation=spec.separation,
        seed=spec.seed,
    )

    if spec.family == "uniform_cube":
        points = open_uniforms(rng, (spec.n, spec.d))
    else:
        if spec.family == "separated_clusters" and spec.d >= spec.k_true:
            means = simplex_means(spec.k_true, spec.d, spec.separation)
        else:
            means = lattice_means(spec.k_true, spec.d, spec.separation)
        means = means[rng.permutation(spec.k_true)]
        assignment = np.arange(spec.n) % spec.k_true
        points = means[assignment].copy()
        if spec.family == "gaussian_mixture":
            points += standard_normals(rng, (spec.n, spec.d))
        meta.means = means.tolist()
        meta.assignment = assignment.tolist()
        meta.planted_cost = _planted_cost(points, means, assignment)

    logger.info(
        "dataset_generated",
        family=spec.family,
        n=spec.n,
        d=spec.d,
        k_true=spec.k_true,
        planted_cost=meta.planted_cost,
    )
    return Dataset(points), meta


def _normalized(weights: FloatArray) -> FloatArray:
    return weights * (weights.size / float(weights.sum()))


def one_heavy_weights(m: float, k: int) -> FloatArray:
    """One element of weight m, the other k - 1 sharing (k - m) equally.

    Raises:
        InputError: If m is negative, exceeds k, or k = 1 with m ≠ 1
    """
    if m < 0 or m > k:
        msg = f"one_heavy({m}) is infeasible for k={k}: need 0 <= m <= k"
        raise InputError(msg)
    if k == 1:
        if m != 1:
            msg = f"one_heavy({m}) is infeasible for k=1: the only weight must be 1"
            raise InputError(msg)
        return np.ones(1)
    weights = np.full(k, (k - m) / (k - 1))
    weights[0] = m
    return weights


def heavy_weight(token: str, k: int) -> float:
    """Resolve the m of ``one_heavy(m)``; ``log2`` means log2(k)."""
    if token.strip() == "log2":
        return math.log2(k)
    try:
        return float(token)
    except ValueError as e:
        msg = f"Invalid one_heavy parameter '{token}'"
        raise InputError(msg) from e


def game_weights(generator: str, k: int, seed: int = 0) -> FloatArray:
    """Initial weight profile for the sampling game.

    Args:
        generator: ``all_ones``, ``pareto_tail`` or ``one_heavy(m)`` where m is
            a number or ``log2``
        k: Number of elements
        seed: Seed for random profiles

    Returns:
        Nonnegative weights of length k with mean 1

    Raises:
        InputError: On unknown generators or infeasible parameters

    Example:
        >>> game_weights("one_heavy(3)", 4)
        array([3.        , 0.33333333, 0.33333333, 0.33333333])
    """
    if k < 1:
        msg = f"k must be positive, got {k}"
        raise InputError(msg)
    name = generator.strip()
    if name == "all_ones":
        return np.ones(k)
    if name == "pareto_tail":
        uniforms = open_uniforms(make_generator(seed), k)
        return _normalized(uniforms ** (-1.0 / PARETO_SHAPE))
    match = _ONE_HEAVY.match(name)
    if match:
        return one_heavy_weights(heavy_weight(match.group("m"), k), k)
    msg = f"Unknown weight generator '{generator}'"
    raise InputError(msg)


def heavy_element(generator: str) -> int | None:
    """Id of the tracked heavy element of a profile, if it has one."""
    return 0 if _ONE_HEAVY.match(generator.strip()) else None


def parse_weight_source(source: str, k: int | None = None, seed: int = 0) -> FloatArray:
    """Resolve ``--weights``: ``generator:<name>``, a CSV file or an inline list.

    Raises:
        InputError: If k is missing for a generator, values are invalid, or
            the length disagrees with k
    """
    if source.startswith(GENERATOR_PREFIX):
        if k is None:
            msg = "--k is required with a weight generator"
            raise InputError(msg)
        return game_weights(source[len(GENERATOR_PREFIX) :], k, seed)

    path = Path(source)
    text = path.read_text() if path.is_file() else source
    tokens = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    try:
        weights = np.array([float(t) for t in tokens])
    except ValueError as e:
        msg = f"Invalid weight list '{source}'"
        raise InputError(msg) from e
    if weights.size == 0:
        msg = "Weight list is empty"
        raise InputError(msg)
    if k is not None and weights.size != k:
        msg = f"Weight list has {weights.size} entries but k={k}"
        raise InputError(msg)
    return weights


__all__ = [
    "Family",
    "GenSpec",
    "PlantedMetadata",
    "game_weights",
    "generate",
    "heavy_element",
    "lattice_means",
    "one_heavy_weights",
    "parse_weight_source",
]
