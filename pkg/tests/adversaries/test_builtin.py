"""Unit tests for the built-in noise policies."""

import math

import numpy as np
import pytest

from src.adversaries.builtin import (
    DriftPolicy,
    NearBiasPolicy,
    RandomPolicy,
    drift_policy,
    near_bias_policy,
    null_policy,
    random_policy,
)
from src.config import PartitionConfig
from src.core.errors import InputError
from src.datagen.generators import one_heavy_weights
from src.game.montecarlo import estimate_advantage
from src.game.partition import PartitionView
from src.game.process import GameConfig


@pytest.fixture
def mixed_view() -> PartitionView:
    """One small, one medium and one big survivor."""
    return PartitionView.build(
        round_index=0,
        epsilon=0.25,
        alive_ids=np.array([0, 1, 2]),
        weights=np.array([1.0, 10.0, 100.0]),
        partition=PartitionConfig(),
    )


class TestNullPolicy:
    """Tests for the null policy."""

    def test_all_ones(self, mixed_view):
        """Test multipliers are 1 in the game and in seeding."""
        policy = null_policy()
        base = np.array([0.2, 0.3, 0.5])

        np.testing.assert_array_equal(policy.perturb([], base, mixed_view), np.ones(3))
        np.testing.assert_array_equal(policy.perturb_seeding(base, 1, []), np.ones(3))
        assert policy.epsilon == 0.0
        assert policy.name == "null"

    def test_reweigh_is_identity(self, mixed_view):
        """Test the default reweigh keeps the weights."""
        weights = np.array([1.0, 10.0, 100.0])
        assert null_policy().reweigh([], weights, mixed_view) is weights


class TestRandomPolicy:
    """Tests for the random policy."""

    def test_multipliers_in_band(self, mixed_view):
        """Test draws stay within [1 - ε, 1 + ε]."""
        policy = random_policy(0.25, seed=3)
        for _ in range(50):
            multipliers = policy.perturb([], np.full(3, 1 / 3), mixed_view)
            assert np.all(multipliers >= 0.75)
            assert np.all(multipliers <= 1.25)

    def test_zero_epsilon_gives_ones(self):
        """Test ε = 0 produces no noise."""
        policy = random_policy(0.0)
        np.testing.assert_array_equal(policy.perturb_seeding(np.full(4, 0.25), 2, []), np.ones(4))

    def test_fork_gives_independent_stream(self):
        """Test forks with the same seed agree and differ from other seeds."""
        base = np.full(5, 0.2)
        first = random_policy(0.3).fork(11).perturb_seeding(base, 1, [])
        again = random_policy(0.3).fork(11).perturb_seeding(base, 1, [])
        other = random_policy(0.3).fork(12).perturb_seeding(base, 1, [])

        assert isinstance(random_policy(0.3).fork(1), RandomPolicy)
        np.testing.assert_array_equal(first, again)
        assert not np.array_equal(first, other)

    def test_rejects_invalid_epsilon(self):
        """Test ε must lie in [0, 1/2)."""
        with pytest.raises(InputError, match="epsilon"):
            random_policy(0.6)

    def test_mean_multiplier_is_one(self):
        """Test 10^5 multipliers average to 1 within three standard errors."""
        eps = 0.3
        draws = 100_000
        multipliers = random_policy(eps, seed=21).perturb_seeding(np.full(draws, 1 / draws), 1, [])

        stderr = eps / math.sqrt(3.0) / math.sqrt(draws)
        assert abs(float(multipliers.mean()) - 1.0) < 3.0 * stderr


class TestDriftPolicy:
    """Tests for the drift heuristic."""

    def test_tilts_toward_small(self, mixed_view):
        """Test small gets 1 + ε, medium 1 and big 1 - ε."""
        multipliers = drift_policy(0.25).perturb([], np.array([0.01, 0.09, 0.9]), mixed_view)
        np.testing.assert_allclose(multipliers, [1.25, 1.0, 0.75])

    def test_truncates_medium(self, mixed_view):
        """Test medium weights drop to the small threshold and big ones are kept."""
        new_weights = drift_policy(0.25).reweigh([], np.array([1.0, 10.0, 100.0]), mixed_view)
        np.testing.assert_array_equal(new_weights, [1.0, 2.0, 100.0])

    def test_fork_returns_self(self):
        """Test the stateless policy is shared across runs."""
        policy = DriftPolicy(0.1)
        assert policy.fork(5) is policy

    def test_rejects_zero_epsilon(self):
        """Test drift needs noise to tilt with."""
        with pytest.raises(InputError, match="positive epsilon"):
            drift_policy(0.0)

    @pytest.mark.slow
    def test_late_mean_above_null(self):
        """Test drift keeps a heavy element alive longer than no noise does.

        Both start from the normalized mean 1 at round 0, so the comparison
        uses the largest mean over rounds after the first removal.
        """
        config = GameConfig.from_weights(one_heavy_weights(120.0, 256), epsilon=0.49)

        drift = estimate_advantage(config, drift_policy(0.49), trials=400, seed=8, check_bounds=False)
        null = estimate_advantage(config, null_policy(), trials=400, seed=8, check_bounds=False)

        assert drift.max_mean == pytest.approx(1.0)
        assert null.max_mean == pytest.approx(1.0)
        assert drift.late_max_mean > null.late_max_mean
        assert drift.late_max_mean == pytest.approx(0.893, abs=0.05)
        assert null.late_max_mean == pytest.approx(0.782, abs=0.05)


class TestNearBiasPolicy:
    """Tests for the seeding-only near-bias policy."""

    def test_boosts_low_probability_points(self):
        """Test entries below the positive median get 1 + ε."""
        multipliers = near_bias_policy(0.2).perturb_seeding(np.array([0.0, 0.1, 0.2, 0.7]), 2, [])
        np.testing.assert_allclose(multipliers, [1.2, 1.2, 0.8, 0.8])

    def test_all_zero_base(self):
        """Test a base without positive mass gets unit multipliers."""
        multipliers = NearBiasPolicy(0.2).perturb_seeding(np.zeros(3), 2, [])
        np.testing.assert_array_equal(multipliers, np.ones(3))

    def test_describe(self):
        """Test the record fields of a policy."""
        assert NearBiasPolicy(0.2).describe() == {"policy": "near_bias", "policy_epsilon": 0.2}
