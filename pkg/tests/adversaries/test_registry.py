"""Unit tests for policy lookup by name."""

import json

import pytest

from src.adversaries.base import SeedNoisePolicy
from src.adversaries.builtin import DriftPolicy, NearBiasPolicy, NullPolicy, RandomPolicy
from src.adversaries.registry import game_policy_names, resolve_game_policy, resolve_seed_policy, seed_policy_names
from src.adversaries.scripted import ScriptedPolicy
from src.config import PartitionConfig
from src.core.errors import InputError


class TestRegistry:
    """Tests for the policy registry."""

    def test_names(self):
        """Test the registered names."""
        assert game_policy_names() == ["drift", "null", "random"]
        assert seed_policy_names() == ["near_bias", "null", "random"]

    @pytest.mark.parametrize(
        ("name", "cls"),
        [("null", NullPolicy), ("random", RandomPolicy), ("drift", DriftPolicy)],
    )
    def test_resolve_game_policy(self, name, cls):
        """Test game policies resolve to their classes."""
        policy = resolve_game_policy(name, 0.2)
        assert isinstance(policy, cls)

    def test_random_policy_gets_epsilon(self):
        """Test the game epsilon is passed to the policy."""
        assert resolve_game_policy("random", 0.3).epsilon == 0.3

    @pytest.mark.parametrize(
        ("name", "cls"),
        [("null", NullPolicy), ("random", RandomPolicy), ("near_bias", NearBiasPolicy)],
    )
    def test_resolve_seed_policy(self, name, cls):
        """Test seeding policies resolve to their classes."""
        assert isinstance(resolve_seed_policy(name, 0.2), cls)

    def test_unknown_names(self):
        """Test unknown names list the valid choices."""
        with pytest.raises(InputError, match="Unknown game policy 'greedy'"):
            resolve_game_policy("greedy", 0.1)
        with pytest.raises(InputError, match="Unknown seeding policy 'drift'"):
            resolve_seed_policy("drift", 0.1)

    def test_file_policy(self, tmp_path):
        """Test file:<path> loads a scripted policy."""
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"name": "scripted", "epsilon": 0.1, "rules": []}))

        policy = resolve_game_policy(f"file:{path}", 0.1)

        assert isinstance(policy, ScriptedPolicy)
        assert policy.name == "scripted"

    def test_file_policy_keeps_own_epsilon(self, tmp_path):
        """Test a file policy declares its own epsilon even when the game uses less."""
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"name": "wide", "epsilon": 0.4, "rules": []}))

        assert resolve_game_policy(f"file:{path}", 0.1).epsilon == 0.4

    def test_seed_file_policy(self, tmp_path):
        """Test file:<path> also resolves to a seeding policy with the given thresholds."""
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"name": "seeded", "epsilon": 0.2, "rules": [{"when": "small", "multiplier": 1.2}]}))
        partition = PartitionConfig(big_threshold=40.0, small_threshold=1.0)

        policy = resolve_seed_policy(f"file:{path}", 0.2, partition)

        assert isinstance(policy, SeedNoisePolicy)
        assert policy.name == "seeded"
        assert policy.partition == partition

    def test_seed_file_policy_missing(self, tmp_path):
        """Test a missing seeding policy file is reported."""
        with pytest.raises(FileNotFoundError):
            resolve_seed_policy(f"file:{tmp_path / 'absent.json'}", 0.2)
