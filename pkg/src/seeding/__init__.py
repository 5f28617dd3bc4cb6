"""Exact and noisy k-means++ seeding, perturbation checks and Lloyd refinement."""

from src.seeding.lloyd import LloydResult, lloyd_refine, refine_with_trace
from src.seeding.noisy_kmeanspp import NoiseModel, SeedingRound, SeedingTrace, seed
from src.seeding.perturbation import (
    Perturbation,
    PerturbationReport,
    check_epsilon,
    perturb_distribution,
    validate_perturbation,
)

__all__ = [
    "LloydResult",
    "NoiseModel",
    "Perturbation",
    "PerturbationReport",
    "SeedingRound",
    "SeedingTrace",
    "check_epsilon",
    "lloyd_refine",
    "perturb_distribution",
    "refine_with_trace",
    "seed",
    "validate_perturbation",
]
