"""Unit tests for the sampling game simulator."""

import csv
from collections.abc import Sequence

import numpy as np
import pytest
from scipy import stats

from src.adversaries.base import GameAdversary
from src.adversaries.builtin import drift_policy, null_policy, random_policy
from src.core.errors import AdversaryViolationError, InputError
from src.core.points import FloatArray
from src.core.rng import make_generator
from src.game.partition import PartitionView
from src.game.process import TRACE_COLUMNS, GameConfig, GameState, RoundSnapshot, normalize, run, step
from src.seeding.perturbation import validate_perturbation


class RaisingPolicy(GameAdversary):
    """Breaks the rules by raising every survivor's weight."""

    name = "raising"

    def perturb(self, history: Sequence[RoundSnapshot], base: FloatArray, view: PartitionView) -> FloatArray:
        return np.ones_like(base)

    def reweigh(self, history: Sequence[RoundSnapshot], weights: FloatArray, view: PartitionView) -> FloatArray:
        return weights + 1.0


class GreedyPolicy(GameAdversary):
    """Breaks the rules by emitting multipliers of 2."""

    name = "greedy"

    def perturb(self, history: Sequence[RoundSnapshot], base: FloatArray, view: PartitionView) -> FloatArray:
        return np.full_like(base, 2.0)


class RecordingPolicy(GameAdversary):
    """Records the history length it sees in every call."""

    name = "recording"

    def __init__(self) -> None:
        super().__init__(0.0)
        self.perturb_lengths: list[int] = []
        self.reweigh_lengths: list[int] = []

    def perturb(self, history: Sequence[RoundSnapshot], base: FloatArray, view: PartitionView) -> FloatArray:
        self.perturb_lengths.append(len(history))
        return np.ones_like(base)

    def reweigh(self, history: Sequence[RoundSnapshot], weights: FloatArray, view: PartitionView) -> FloatArray:
        self.reweigh_lengths.append(len(history))
        return weights


@pytest.fixture
def pareto_config() -> GameConfig:
    """Mean-one profile with 196 small, two medium and two big weights."""
    weights = np.concatenate([np.full(196, 10.0 / 196), [5.0, 10.0, 85.0, 90.0]])
    return normalize(GameConfig.from_weights(weights, epsilon=0.3))


class TestGameConfig:
    """Tests for GameConfig and normalize."""

    def test_k_and_mean(self):
        """Test k is the number of weights."""
        config = GameConfig.from_weights([1.0, 2.0, 3.0])
        assert config.k == 3
        assert config.mean_weight == 2.0

    @pytest.mark.parametrize("weights", [[], [1.0, -1.0], [1.0, np.inf]])
    def test_rejects_invalid_weights(self, weights):
        """Test empty, negative and non-finite weights are rejected."""
        with pytest.raises(InputError, match="initial_weights"):
            GameConfig.from_weights(weights)

    def test_rejects_epsilon_half(self):
        """Test ε must be below 1/2."""
        with pytest.raises(InputError, match="epsilon"):
            GameConfig.from_weights([1.0], epsilon=0.5)

    def test_normalize_scales_to_mean_one(self):
        """Test normalization makes the total equal to k."""
        config = normalize(GameConfig.from_weights([0.0, 4.0]))
        np.testing.assert_allclose(config.initial_weights, [0.0, 2.0])

    def test_normalize_rejects_all_zero(self):
        """Test all-zero weights cannot be normalized."""
        with pytest.raises(InputError, match="all-zero"):
            normalize(GameConfig.from_weights([0.0, 0.0]))


class TestStep:
    """Tests for a single round."""

    def test_consumes_one_uniform(self):
        """Test a round draws exactly one number from the sampler stream."""
        config = GameConfig.from_weights([1.0, 2.0, 3.0], epsilon=0.2)
        rng = make_generator(3)
        step(GameState.initial(config), random_policy(0.2, seed=1), rng, config)

        reference = make_generator(3)
        reference.random()
        assert rng.random() == reference.random()

    def test_zero_weight_is_never_removed(self):
        """Test an element of weight 0 cannot be drawn while others have weight."""
        config = GameConfig.from_weights([0.0, 1.0])
        for seed_value in range(20):
            _, snapshot = step(GameState.initial(config), null_policy(), make_generator(seed_value), config)
            assert snapshot.removed_id == 1

    def test_rejects_empty_state(self):
        """Test stepping a finished game fails."""
        config = GameConfig.from_weights([1.0])
        state = GameState(round_index=1, alive=np.zeros(1, dtype=bool), weights=np.ones(1))
        with pytest.raises(InputError, match="no surviving"):
            step(state, null_policy(), make_generator(0), config)

    def test_removal_frequencies_follow_perturbed_distribution(self):
        """Test repeated first rounds under a maximal tilt remove elements at the perturbed rates."""
        config = GameConfig.from_weights([0.5, 0.5, 1.5, 5.0, 90.0, 100.0], epsilon=0.45)
        policy = drift_policy(0.45)
        state = GameState.initial(config)
        rng = make_generator(17)
        draws = 10_000

        counts = np.zeros(config.k)
        for _ in range(draws):
            _, snapshot = step(state, policy, rng, config, keep_distributions=True)
            counts[snapshot.removed_id] += 1

        probs = np.asarray(snapshot.perturbed)
        assert not np.allclose(probs, np.asarray(snapshot.base))
        result = stats.chisquare(counts, probs / probs.sum() * draws)
        assert result.pvalue > 0.001

    def test_reweigh_sees_current_round(self):
        """Test the adversary reweighs after the round's snapshot is recorded."""
        policy = RecordingPolicy()
        run(GameConfig.from_weights(np.ones(4)), policy, rng_seed=0)

        assert policy.perturb_lengths == [0, 1, 2]
        assert policy.reweigh_lengths == [1, 2, 3]


class TestRun:
    """Tests for complete games."""

    def test_trace_shape(self, pareto_config):
        """Test k snapshots with one removal per played round."""
        trace = run(pareto_config, random_policy(0.3), rng_seed=11)

        assert len(trace) == pareto_config.k
        assert [s.alive_count for s in trace.snapshots] == list(range(pareto_config.k, 0, -1))
        assert len(set(trace.removal_order)) == pareto_config.k - 1
        assert trace.snapshots[-1].removed_id is None

    def test_first_snapshot_matches_config(self, pareto_config):
        """Test round 0 describes the initial weights."""
        trace = run(pareto_config, null_policy(), rng_seed=0)
        first = trace.snapshots[0]

        assert first.avg_weight == pytest.approx(1.0)
        assert first.n_big == 2
        assert first.n_medium == 2
        assert first.n_small == 196

    def test_same_seed_same_trace(self, pareto_config):
        """Test games are reproducible from their seed."""
        first = run(pareto_config, random_policy(0.3), rng_seed=5)
        second = run(pareto_config, random_policy(0.3), rng_seed=5)
        assert first.removal_order == second.removal_order
        np.testing.assert_array_equal(first.avg_weights, second.avg_weights)

    def test_null_policy_ignores_epsilon(self, pareto_config):
        """Test the null policy plays the same game at every noise level."""
        noiseless = GameConfig(pareto_config.initial_weights, 0.0, pareto_config.partition)

        for seed_value in (1, 2):
            noisy_trace = run(pareto_config, null_policy(), rng_seed=seed_value)
            plain_trace = run(noiseless, null_policy(), rng_seed=seed_value)

            assert noisy_trace.removal_order == plain_trace.removal_order
            np.testing.assert_array_equal(noisy_trace.avg_weights, plain_trace.avg_weights)

    def test_removal_round(self, pareto_config):
        """Test removal_round is consistent with the removal order."""
        trace = run(pareto_config, null_policy(), rng_seed=2)
        for round_index, element in enumerate(trace.removal_order):
            assert trace.removal_round(element) == round_index

    def test_all_zero_weights_fall_back_to_uniform(self):
        """Test zero total weight is played with a uniform base."""
        trace = run(GameConfig.from_weights(np.zeros(4)), null_policy(), rng_seed=1)

        assert all(s.degenerate for s in trace.snapshots[:-1])
        assert len(trace.removal_order) == 3

    def test_kept_distributions_stay_in_band(self, pareto_config):
        """Test every perturbed distribution respects the band."""
        trace = run(pareto_config, drift_policy(0.3), rng_seed=7, keep_distributions=True)
        for snapshot in trace.snapshots[:-1]:
            assert validate_perturbation(snapshot.base, snapshot.perturbed, 0.3).is_valid

    def test_drift_removes_medium_weights(self, pareto_config):
        """Test drift truncates medium weights after the first round."""
        trace = run(pareto_config, drift_policy(0.3), rng_seed=3)
        assert all(s.n_medium == 0 for s in trace.snapshots[1:])

    def test_weights_never_grow(self, pareto_config):
        """Test total surviving weight is non-increasing."""
        trace = run(pareto_config, drift_policy(0.3), rng_seed=4)
        totals = [s.total_weight for s in trace.snapshots]
        assert all(later <= earlier + 1e-9 for earlier, later in zip(totals, totals[1:], strict=False))

    def test_rejects_raised_weights(self):
        """Test a policy may not increase a weight."""
        with pytest.raises(AdversaryViolationError, match="allowed range") as exc_info:
            run(GameConfig.from_weights(np.ones(3)), RaisingPolicy(0.1), rng_seed=0)
        assert exc_info.value.details["round"] == 0

    def test_rejects_out_of_band_multipliers(self):
        """Test multipliers outside [1 - ε, 1 + ε] are rejected."""
        with pytest.raises(AdversaryViolationError, match="outside"):
            run(GameConfig.from_weights(np.ones(3), epsilon=0.1), GreedyPolicy(0.1), rng_seed=0)


class TestGameTraceCsv:
    """Tests for GameTrace.write_csv."""

    def test_rows(self, pareto_config, tmp_path):
        """Test one row per snapshot and an empty removed_id for the survivor."""
        trace = run(pareto_config, null_policy(), rng_seed=0)
        path = trace.write_csv(tmp_path / "game.csv")

        with path.open() as f:
            rows = list(csv.DictReader(f))

        assert tuple(rows[0].keys()) == TRACE_COLUMNS
        assert len(rows) == pareto_config.k
        assert rows[-1]["removed_id"] == ""
        assert float(rows[0]["avg_weight"]) == pytest.approx(1.0)
