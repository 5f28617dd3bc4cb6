"""Multiplicative perturbation of sampling distributions.

A noise policy never hands over a distribution directly. It emits one
multiplier per entry in [1 - ε, 1 + ε]; the product with the base
distribution is renormalized and must then still lie within the same
multiplicative band around the base. When renormalization pushes an entry
out of the band, the multipliers are contracted toward 1 by bisection. The
all-ones vector is always feasible, so the contraction terminates.
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from src.core.errors import AdversaryViolationError, InputError
from src.core.points import FloatArray, ProbVec
from src.log_config import get_logger

logger = get_logger(__name__)

DEFAULT_TOLERANCE = 1e-9
MULTIPLIER_SLACK = 1e-12
BISECTION_STEPS = 50
MAX_EPSILON = 0.5


@dataclass
class PerturbationReport:
    """Result of checking a perturbed distribution against its base.

    Attributes:
        is_valid: Whether every check passed
        errors: Error messages in detection order
        index: First offending index, if any
        value: Perturbed probability at that index
        lower: Lower bound (1 - ε)·base at that index
        upper: Upper bound (1 + ε)·base at that index
        total: Sum of the perturbed distribution
    """

    is_valid: bool = True
    errors: list[str] = field(default_factory=list)
    index: int | None = None
    value: float | None = None
    lower: float | None = None
    upper: float | None = None
    total: float = 1.0

    def add_error(self, message: str) -> None:
        """Add an error message and mark the report as failed."""
        self.errors.append(message)
        self.is_valid = False
        logger.warning("perturbation_violation", message=message)

    def as_details(self) -> dict[str, Any]:
        """Structured fields for exception details and log lines."""
        return {
            "index": self.index,
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "total": self.total,
            "errors": list(self.errors),
        }

    def summary(self) -> str:
        """Generate a human-readable summary of the report."""
        lines = [f"Perturbation Status: {'PASS' if self.is_valid else 'FAIL'}"]
        if self.index is not None:
            lines.append(
                f"First violation at index {self.index}: {self.value!r} "
                f"outside [{self.lower!r}, {self.upper!r}]",
            )
        lines.extend(f"  - {error}" for error in self.errors)
        return "\n".join(lines)


@dataclass(frozen=True)
class Perturbation:
    """A validated perturbed distribution.

    Attributes:
        probs: Final perturbed probabilities
        contraction: Fraction of the emitted tilt that was applied (1.0 = all)
    """

    probs: FloatArray
    contraction: float


def _as_array(values: ProbVec | ArrayLike) -> FloatArray:
    if isinstance(values, ProbVec):
        return values.probs
    return np.asarray(values, dtype=np.float64)


def check_epsilon(epsilon: float) -> float:
    """Validate a noise level, returning it as float.

    Raises:
        InputError: If epsilon is outside [0, 1/2)
    """
    eps = float(epsilon)
    if not 0.0 <= eps < MAX_EPSILON:
        msg = f"epsilon must lie in [0, 0.5), got {epsilon}"
        raise InputError(msg)
    return eps


def _within_band(
    base: FloatArray,
    perturbed: FloatArray,
    epsilon: float,
    tolerance: float,
) -> bool:
    if abs(float(perturbed.sum()) - 1.0) > tolerance:
        return False
    lower = (1.0 - epsilon) * base - tolerance
    upper = (1.0 + epsilon) * base + tolerance
    return bool(np.all(perturbed >= lower) and np.all(perturbed <= upper))


def validate_perturbation(
    base: ProbVec | ArrayLike,
    perturbed: ProbVec | ArrayLike,
    epsilon: float,
    tolerance: float = DEFAULT_TOLERANCE,
) -> PerturbationReport:
    """Check a perturbed distribution against the multiplicative band.

    Every entry must satisfy (1 - ε)·base ≤ perturbed ≤ (1 + ε)·base within
    ``tolerance``, and the perturbed entries must sum to 1 within
    ``tolerance``.

    Args:
        base: Base distribution
        perturbed: Candidate perturbed distribution
        epsilon: Noise level
        tolerance: Absolute slack for both checks

    Returns:
        PerturbationReport naming the first offending index, if any

    Raises:
        InputError: If the two vectors differ in length

    Example:
        >>> report = validate_perturbation([0.5, 0.5], [0.6, 0.4], 0.1)
        >>> report.is_valid, report.index
        (False, 0)
    """
    base_arr = _as_array(base)
    pert_arr = _as_array(perturbed)
    if base_arr.shape != pert_arr.shape:
        msg = f"Length mismatch: base has {base_arr.size} entries, perturbed has {pert_arr.size}"
        raise InputError(msg)

    report = PerturbationReport(total=float(pert_arr.sum()))
    lower = (1.0 - epsilon) * base_arr
    upper = (1.0 + epsilon) * base_arr
    offending = np.flatnonzero((pert_arr < lower - tolerance) | (pert_arr > upper + tolerance))
    if offending.size:
        idx = int(offending[0])
        report.index = idx
        report.value = float(pert_arr[idx])
        report.lower = float(lower[idx])
        report.upper = float(upper[idx])
        report.add_error(
            f"Entry {idx} = {report.value!r} outside [{report.lower!r}, {report.upper!r}]",
        )
    if abs(report.total - 1.0) > tolerance:
        report.add_error(f"Perturbed distribution sums to {report.total!r}, not 1")
    return report


def perturb_distribution(
    base: ProbVec | ArrayLike,
    multipliers: ArrayLike,
    epsilon: float,
    tolerance: float = DEFAULT_TOLERANCE,
    round_index: int | None = None,
) -> Perturbation:
    """Apply policy multipliers to a base distribution.

    Args:
        base: Base distribution
        multipliers: One multiplier per entry, each within [1 - ε, 1 + ε]
        epsilon: Noise level
        tolerance: Absolute slack for the final validation
        round_index: Round number, attached to violation details

    Returns:
        Perturbation with the validated distribution and applied contraction

    Raises:
        AdversaryViolationError: If multipliers are malformed or out of band
    """
    base_arr = _as_array(base)
    mult = np.asarray(multipliers, dtype=np.float64)

    if mult.shape != base_arr.shape:
        msg = f"Policy emitted {mult.size} multipliers for {base_arr.size} entries"
        raise AdversaryViolationError(msg, {"round": round_index})

    bad = np.flatnonzero(
        ~np.isfinite(mult)
        | (mult < 1.0 - epsilon - MULTIPLIER_SLACK)
        | (mult > 1.0 + epsilon + MULTIPLIER_SLACK),
    )
    if bad.size:
        idx = int(bad[0])
        msg = (
            f"Multiplier {mult[idx]!r} at index {idx} outside "
            f"[{1.0 - epsilon!r}, {1.0 + epsilon!r}]"
        )
        raise AdversaryViolationError(
            msg,
            {"round": round_index, "index": idx, "multiplier": float(mult[idx]), "epsilon": epsilon},
        )

    if np.all(mult == 1.0):
        return Perturbation(probs=base_arr.copy(), contraction=1.0)

    def tilted(t: float) -> FloatArray:
        weighted = base_arr * (1.0 + t * (mult - 1.0))
        return weighted / weighted.sum()

    contraction = 1.0
    candidate = tilted(1.0)
    if not _within_band(base_arr, candidate, epsilon, tolerance):
        low, high = 0.0, 1.0
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (low + high)
            if _within_band(base_arr, tilted(mid), epsilon, tolerance):
                low = mid
            else:
                high = mid
        contraction = low
        candidate = tilted(low)
        logger.debug("perturbation_contracted", round=round_index, contraction=contraction)

    report = validate_perturbation(base_arr, candidate, epsilon, tolerance)
    if not report.is_valid:
        msg = f"Perturbed distribution failed validation: {report.errors[0]}"
        raise AdversaryViolationError(msg, {"round": round_index, **report.as_details()})

    return Perturbation(probs=candidate, contraction=contraction)


__all__ = [
    "Perturbation",
    "PerturbationReport",
    "check_epsilon",
    "perturb_distribution",
    "validate_perturbation",
]
