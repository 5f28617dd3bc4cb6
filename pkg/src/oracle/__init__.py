"""Brute-force references used to validate samplers and clustering costs."""

from src.oracle.brute_force import MAX_CLUSTERS, MAX_POINTS, OptimalClustering, brute_force_optimal
from src.oracle.sampling_check import SamplingCheckResult, empirical_distribution_check, inverse_cdf_sampler

__all__ = [
    "MAX_CLUSTERS",
    "MAX_POINTS",
    "OptimalClustering",
    "SamplingCheckResult",
    "brute_force_optimal",
    "empirical_distribution_check",
    "inverse_cdf_sampler",
]
