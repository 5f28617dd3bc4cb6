"""Unit tests for scripted game adversaries."""

import json

import numpy as np
import pytest

from src.adversaries.builtin import drift_policy
from src.adversaries.scripted import PolicySpec, ScriptedPolicy, load_policy_spec, parse_policy_spec, scripted_policy
from src.config import PartitionConfig
from src.core.errors import PolicySpecError
from src.core.points import Dataset
from src.game.partition import PartitionView
from src.game.process import GameConfig, run
from src.seeding.noisy_kmeanspp import NoiseModel, seed


@pytest.fixture
def drift_replica() -> dict:
    """Policy document mirroring the drift heuristic."""
    return {
        "name": "drift_replica",
        "epsilon": 0.25,
        "rules": [
            {"when": "small", "multiplier": 1.25},
            {"when": "big", "multiplier": 0.75},
        ],
        "reweigh": [{"when": "medium", "floor_to": 2.0}],
    }


def _view(round_index: int = 0) -> PartitionView:
    return PartitionView.build(
        round_index=round_index,
        epsilon=0.25,
        alive_ids=np.array([0, 1, 2]),
        weights=np.array([1.0, 10.0, 100.0]),
        partition=PartitionConfig(),
    )


class TestParsePolicySpec:
    """Tests for parse_policy_spec."""

    def test_valid_document(self, drift_replica):
        """Test a valid document parses into a spec."""
        spec = parse_policy_spec(json.dumps(drift_replica))

        assert spec.name == "drift_replica"
        assert spec.epsilon == 0.25
        assert len(spec.rules) == 2
        assert spec.reweigh[0].floor_to == 2.0

    def test_syntax_error_has_location(self):
        """Test JSON syntax errors report line and column."""
        with pytest.raises(PolicySpecError, match=r"policy.json: line 2 col \d+"):
            parse_policy_spec('{\n  "name": }', "policy.json")

    def test_schema_error_names_field(self, drift_replica):
        """Test schema errors report the dotted field path."""
        drift_replica["rules"][0]["when"] = "huge"
        with pytest.raises(PolicySpecError, match=r"field rules\.0\.when"):
            parse_policy_spec(json.dumps(drift_replica))

    def test_rejects_unknown_fields(self, drift_replica):
        """Test extra keys are rejected."""
        drift_replica["comment"] = "x"
        with pytest.raises(PolicySpecError, match="comment"):
            parse_policy_spec(json.dumps(drift_replica))

    def test_rejects_multiplier_outside_band(self, drift_replica):
        """Test multipliers must respect the declared epsilon."""
        drift_replica["rules"][0]["multiplier"] = 1.5
        with pytest.raises(PolicySpecError, match=r"rules\.0\.multiplier"):
            parse_policy_spec(json.dumps(drift_replica))

    def test_rejects_epsilon_half(self, drift_replica):
        """Test ε must be below 1/2."""
        drift_replica["epsilon"] = 0.5
        with pytest.raises(PolicySpecError, match="field epsilon"):
            parse_policy_spec(json.dumps(drift_replica))


class TestLoadPolicySpec:
    """Tests for loading policy files."""

    def test_load_from_file(self, tmp_path, drift_replica):
        """Test a policy file is read and validated."""
        path = tmp_path / "policy.json"
        path.write_text(json.dumps(drift_replica))

        policy = scripted_policy(path)

        assert isinstance(policy, ScriptedPolicy)
        assert policy.name == "drift_replica"

    def test_missing_file(self, tmp_path):
        """Test a missing file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError, match="Policy file not found"):
            load_policy_spec(tmp_path / "missing.json")


class TestScriptedPolicy:
    """Tests for replaying a spec."""

    def test_first_matching_rule_wins(self):
        """Test an earlier rule shadows later ones for the same element."""
        spec = PolicySpec(
            name="layered",
            epsilon=0.3,
            rules=[{"when": "big", "multiplier": 0.7}, {"when": "any", "multiplier": 1.1}],
        )
        multipliers = ScriptedPolicy(spec).perturb([], np.full(3, 1 / 3), _view())
        np.testing.assert_allclose(multipliers, [1.1, 1.1, 0.7])

    def test_round_window(self):
        """Test rules only apply within [from_round, until_round)."""
        spec = PolicySpec(
            name="windowed",
            epsilon=0.3,
            rules=[{"when": "any", "multiplier": 1.2, "from_round": 2, "until_round": 4}],
        )
        policy = ScriptedPolicy(spec)
        base = np.full(3, 1 / 3)

        assert np.all(policy.perturb([], base, _view(1)) == 1.0)
        assert np.all(policy.perturb([], base, _view(2)) == 1.2)
        assert np.all(policy.perturb([], base, _view(4)) == 1.0)

    def test_reweigh_truncates(self, drift_replica):
        """Test reweigh rules cap the matching weights."""
        policy = ScriptedPolicy(parse_policy_spec(json.dumps(drift_replica)))
        new_weights = policy.reweigh([], np.array([1.0, 10.0, 100.0]), _view())
        np.testing.assert_array_equal(new_weights, [1.0, 2.0, 100.0])

    def test_plays_full_game(self, drift_replica):
        """Test a scripted policy can drive a complete game."""
        config = GameConfig.from_weights(np.concatenate([np.full(10, 0.5), [5.0, 10.0]]), epsilon=0.25)
        trace = run(config, ScriptedPolicy(parse_policy_spec(json.dumps(drift_replica))), rng_seed=1)

        assert len(trace) == config.k
        assert trace.policy == "drift_replica"

    def test_replica_matches_builtin_drift(self, drift_replica):
        """Test the replica removes elements in the same order as the built-in drift policy."""
        config = GameConfig.from_weights(np.concatenate([np.full(30, 0.5), [3.0, 5.0, 90.0, 120.0]]), epsilon=0.25)
        replica = ScriptedPolicy(parse_policy_spec(json.dumps(drift_replica)))

        for seed in (1, 2, 3):
            scripted = run(config, replica, rng_seed=seed)
            builtin = run(config, drift_policy(0.25), rng_seed=seed)

            assert scripted.removal_order == builtin.removal_order
            np.testing.assert_array_equal(scripted.avg_weights, builtin.avg_weights)


class TestScriptedSeeding:
    """Tests for replaying a spec during seeding."""

    @pytest.fixture
    def partition(self) -> PartitionConfig:
        """Thresholds small enough for a four-point distribution."""
        return PartitionConfig(big_threshold=2.0, small_threshold=0.5)

    def test_classifies_by_scaled_probability(self, drift_replica, partition):
        """Test indices are classed by probability times n."""
        policy = ScriptedPolicy(parse_policy_spec(json.dumps(drift_replica)), partition)
        base = np.array([0.05, 0.15, 0.3, 0.5])

        multipliers = policy.perturb_seeding(base, 1, [])

        np.testing.assert_allclose(multipliers, [1.25, 1.0, 1.0, 0.75])

    def test_round_window_counts_from_zero(self, partition):
        """Test seeding round r sees rule windows as round r - 1."""
        spec = PolicySpec(
            name="windowed",
            epsilon=0.3,
            rules=[{"when": "any", "multiplier": 1.2, "from_round": 1, "until_round": 2}],
        )
        policy = ScriptedPolicy(spec, partition)
        base = np.full(4, 0.25)

        assert np.all(policy.perturb_seeding(base, 1, []) == 1.0)
        assert np.all(policy.perturb_seeding(base, 2, []) == 1.2)
        assert np.all(policy.perturb_seeding(base, 3, []) == 1.0)

    def test_drives_seeding(self, drift_replica):
        """Test a scripted policy can perturb a complete seeding run."""
        dataset = Dataset.from_rows([[0.0], [1.0], [10.0], [11.0], [50.0]])
        policy = scripted_policy(PolicySpec.model_validate(drift_replica))

        centers, trace = seed(dataset, 3, NoiseModel(0.25, policy), rng_seed=4)

        assert len(centers) == 3
        assert trace.policy == "drift_replica"
        assert len(set(trace.sampled_indices)) == 3
