"""Unit tests for the empirical sampler check."""

import numpy as np
import pytest

from src.core.errors import InputError
from src.core.points import ProbVec
from src.oracle.sampling_check import MIN_DRAWS, empirical_distribution_check, inverse_cdf_sampler


@pytest.fixture
def exact() -> ProbVec:
    """Small skewed distribution."""
    return ProbVec(np.array([0.2, 0.3, 0.5]))


class TestEmpiricalDistributionCheck:
    """Tests for empirical_distribution_check."""

    def test_inverse_cdf_sampler_passes(self, exact):
        """Test the seeding sampler reproduces the exact distribution."""
        result = empirical_distribution_check(inverse_cdf_sampler(exact), exact, draws=50_000, seed=1)

        assert result.passed
        assert result.tv_distance <= 0.01
        assert result.frequencies.sum() == pytest.approx(1.0)
        assert result.draws == 50_000

    def test_biased_sampler_fails(self, exact):
        """Test a sampler stuck on one index is caught."""
        result = empirical_distribution_check(lambda _rng: 0, exact, draws=MIN_DRAWS)

        assert not result.passed
        assert result.tv_distance == pytest.approx(0.8)
        assert result.max_deviation_index == 0

    def test_zero_entries_never_drawn(self):
        """Test indices with probability 0 get no draws."""
        exact = ProbVec(np.array([0.0, 0.5, 0.0, 0.5]))
        result = empirical_distribution_check(inverse_cdf_sampler(exact), exact, draws=MIN_DRAWS)

        assert result.frequencies[0] == 0.0
        assert result.frequencies[2] == 0.0

    def test_rejects_few_draws(self, exact):
        """Test at least 10^4 draws are required."""
        with pytest.raises(InputError, match="at least 10000"):
            empirical_distribution_check(inverse_cdf_sampler(exact), exact, draws=100)

    def test_rejects_out_of_range_index(self, exact):
        """Test a sampler returning an invalid index is an input error."""
        with pytest.raises(InputError, match="outside"):
            empirical_distribution_check(lambda _rng: 3, exact, draws=MIN_DRAWS)
