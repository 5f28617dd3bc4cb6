"""Unit tests for multiplicative perturbation of distributions."""

import numpy as np
import pytest

from src.core.errors import AdversaryViolationError, InputError
from src.core.rng import make_generator
from src.seeding.perturbation import check_epsilon, perturb_distribution, validate_perturbation


class TestCheckEpsilon:
    """Tests for check_epsilon."""

    @pytest.mark.parametrize("epsilon", [0.0, 0.1, 0.49])
    def test_accepts_valid(self, epsilon):
        """Test noise levels in [0, 1/2) are accepted."""
        assert check_epsilon(epsilon) == epsilon

    @pytest.mark.parametrize("epsilon", [-0.01, 0.5, 1.0])
    def test_rejects_invalid(self, epsilon):
        """Test noise levels outside [0, 1/2) are rejected."""
        with pytest.raises(InputError, match=r"epsilon must lie in \[0, 0.5\)"):
            check_epsilon(epsilon)


class TestValidatePerturbation:
    """Tests for validate_perturbation."""

    def test_identity_is_valid(self):
        """Test the base distribution is its own valid perturbation."""
        report = validate_perturbation([0.2, 0.3, 0.5], [0.2, 0.3, 0.5], 0.0)
        assert report.is_valid
        assert report.errors == []

    def test_names_first_offending_index(self):
        """Test an entry above (1 + ε)·base is reported."""
        report = validate_perturbation([0.5, 0.5], [0.6, 0.4], 0.1)

        assert not report.is_valid
        assert report.index == 0
        assert report.upper == pytest.approx(0.55)
        assert "FAIL" in report.summary()

    def test_sum_must_be_one(self):
        """Test an in-band vector that does not sum to 1 fails."""
        report = validate_perturbation([0.5, 0.5], [0.5, 0.49], 0.1)

        assert not report.is_valid
        assert report.index is None
        assert "sums to" in report.errors[0]

    def test_tolerance_absorbs_rounding(self):
        """Test violations smaller than the tolerance pass."""
        report = validate_perturbation([0.5, 0.5], [0.55 + 1e-12, 0.45 - 1e-12], 0.1)
        assert report.is_valid

    def test_zero_base_forces_zero(self):
        """Test a zero base entry admits only zero."""
        report = validate_perturbation([0.0, 1.0], [0.01, 0.99], 0.3)
        assert not report.is_valid
        assert report.index == 0

    def test_length_mismatch(self):
        """Test vectors of different lengths are rejected."""
        with pytest.raises(InputError, match="Length mismatch"):
            validate_perturbation([0.5, 0.5], [1.0], 0.1)


class TestPerturbDistribution:
    """Tests for perturb_distribution."""

    def test_all_ones_returns_base(self):
        """Test unit multipliers leave the distribution unchanged."""
        result = perturb_distribution([0.25, 0.75], [1.0, 1.0], 0.2)
        np.testing.assert_array_equal(result.probs, [0.25, 0.75])
        assert result.contraction == 1.0

    def test_in_band_tilt_is_applied_fully(self):
        """Test a tilt whose renormalization stays in band is not contracted."""
        result = perturb_distribution([0.5, 0.5], [1.3, 0.7], 0.3)
        np.testing.assert_allclose(result.probs, [0.65, 0.35])
        assert result.contraction == 1.0

    def test_out_of_band_tilt_is_contracted(self):
        """Test renormalization overshoot is pulled back into the band."""
        base = np.array([0.1, 0.9])
        result = perturb_distribution(base, [1.3, 0.7], 0.3)

        assert 0.0 < result.contraction < 1.0
        assert validate_perturbation(base, result.probs, 0.3).is_valid
        assert result.probs[0] > base[0]

    def test_random_multipliers_always_validate(self):
        """Test random in-band multipliers always produce a valid distribution."""
        rng = make_generator(11)
        for _ in range(200):
            base = rng.dirichlet(np.ones(8))
            multipliers = rng.uniform(0.51, 1.49, size=8)
            result = perturb_distribution(base, multipliers, 0.49)
            assert validate_perturbation(base, result.probs, 0.49).is_valid

    def test_rejects_out_of_band_multiplier(self):
        """Test a multiplier beyond 1 + ε is a violation."""
        with pytest.raises(AdversaryViolationError, match="outside") as exc_info:
            perturb_distribution([0.5, 0.5], [1.2, 1.0], 0.1, round_index=4)

        assert exc_info.value.details["round"] == 4
        assert exc_info.value.details["index"] == 0

    def test_rejects_non_finite_multiplier(self):
        """Test NaN multipliers are a violation."""
        with pytest.raises(AdversaryViolationError):
            perturb_distribution([0.5, 0.5], [np.nan, 1.0], 0.1)

    def test_rejects_wrong_length(self):
        """Test the multiplier count must match the distribution."""
        with pytest.raises(AdversaryViolationError, match="emitted 1 multipliers for 2 entries"):
            perturb_distribution([0.5, 0.5], [1.0], 0.1)
