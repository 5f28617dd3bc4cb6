"""Shared numeric substrate: points, costs, D² distributions and seeded RNG."""

from src.core.cost import d2_distribution, point_cost, point_costs, set_cost
from src.core.errors import (
    AdversaryViolationError,
    BoundViolationError,
    DegenerateInstanceError,
    InputError,
    PolicySpecError,
)
from src.core.io import format_float, load_dataset, save_dataset
from src.core.points import CenterSet, Dataset, ProbVec, as_point
from src.core.rng import derive_seed, make_generator, sample_index, standard_normals
from src.core.stats import Interval, clopper_pearson, normal_interval

__all__ = [
    "AdversaryViolationError",
    "BoundViolationError",
    "CenterSet",
    "Dataset",
    "DegenerateInstanceError",
    "InputError",
    "Interval",
    "PolicySpecError",
    "ProbVec",
    "as_point",
    "clopper_pearson",
    "d2_distribution",
    "derive_seed",
    "format_float",
    "load_dataset",
    "make_generator",
    "normal_interval",
    "point_cost",
    "point_costs",
    "sample_index",
    "save_dataset",
    "set_cost",
    "standard_normals",
]
