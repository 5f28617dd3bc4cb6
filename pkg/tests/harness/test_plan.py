"""Unit tests for experiment plans."""

import json

import pytest

from src.core.errors import InputError
from src.core.rng import derive_seed
from src.harness.plan import DEFAULT_LEVELS, ExperimentPlan, load_plan, parse_plan


@pytest.fixture
def plan_dict() -> dict:
    """Small advantage plan."""
    return {
        "experiment_id": "drift_sweep",
        "kind": "advantage",
        "grid": {
            "k": [16, 64],
            "epsilon": [0.1, 0.49],
            "policy": ["drift"],
            "weights": ["one_heavy(log2)"],
        },
        "trials": 100,
        "master_seed": 7,
    }


class TestExperimentPlan:
    """Tests for plan validation and grid expansion."""

    def test_defaults(self, plan_dict):
        """Test optional fields get their defaults."""
        plan = ExperimentPlan.model_validate(plan_dict)

        assert plan.outputs.records_csv == "records.csv"
        assert plan.outputs.detail_dir == "details"
        assert plan.levels == list(DEFAULT_LEVELS)
        assert plan.lloyd_iters == 0

    def test_points_are_sorted_cartesian_product(self, plan_dict):
        """Test keys are expanded in sorted order, values in file order."""
        points = ExperimentPlan.model_validate(plan_dict).points()

        assert [p.order for p in points] == [0, 1, 2, 3]
        assert [(p.params["epsilon"], p.params["k"]) for p in points] == [
            (0.1, 16),
            (0.1, 64),
            (0.49, 16),
            (0.49, 64),
        ]
        assert points[0].label == '{"epsilon":0.1,"k":16,"policy":"drift","weights":"one_heavy(log2)"}'

    def test_point_seed_derivation(self, plan_dict):
        """Test grid point seeds come from master seed, id and sorted labels."""
        plan = ExperimentPlan.model_validate(plan_dict)
        params = plan.points()[0].params

        expected = derive_seed(
            7,
            "drift_sweep",
            "epsilon=0.1",
            "k=16",
            'policy="drift"',
            'weights="one_heavy(log2)"',
        )
        assert plan.points()[0].seed == plan.point_seed(params) == expected

    def test_adding_grid_values_keeps_seeds(self, plan_dict):
        """Test existing grid points keep their seeds when the grid grows."""
        before = {p.label: p.seed for p in ExperimentPlan.model_validate(plan_dict).points()}
        plan_dict["grid"]["k"].append(256)
        after = {p.label: p.seed for p in ExperimentPlan.model_validate(plan_dict).points()}

        assert all(after[label] == seed for label, seed in before.items())
        assert len(after) == 6

    def test_seeds_distinct(self, plan_dict):
        """Test grid points get different seeds."""
        seeds = [p.seed for p in ExperimentPlan.model_validate(plan_dict).points()]
        assert len(set(seeds)) == len(seeds)


class TestParsePlan:
    """Tests for parse_plan and load_plan."""

    def test_parse_json(self, plan_dict):
        """Test a JSON document parses."""
        plan = parse_plan(json.dumps(plan_dict))
        assert plan.kind == "advantage"
        assert plan.trials == 100

    def test_missing_required_key(self, plan_dict):
        """Test each kind requires its grid keys."""
        del plan_dict["grid"]["weights"]
        with pytest.raises(InputError, match=r"needs keys \['weights'\]"):
            parse_plan(json.dumps(plan_dict))

    def test_empty_value_list(self, plan_dict):
        """Test grid values must be nonempty lists."""
        plan_dict["grid"]["k"] = []
        with pytest.raises(InputError, match="nonempty lists"):
            parse_plan(json.dumps(plan_dict))

    def test_unknown_kind(self, plan_dict):
        """Test kind is one of the supported experiments."""
        plan_dict["kind"] = "speedup"
        with pytest.raises(InputError, match="field kind"):
            parse_plan(json.dumps(plan_dict))

    def test_unknown_field(self, plan_dict):
        """Test extra top-level keys are rejected."""
        plan_dict["notes"] = "x"
        with pytest.raises(InputError, match="field notes"):
            parse_plan(json.dumps(plan_dict))

    def test_nonpositive_trials(self, plan_dict):
        """Test trials must be at least 1."""
        plan_dict["trials"] = 0
        with pytest.raises(InputError, match="field trials"):
            parse_plan(json.dumps(plan_dict))

    def test_syntax_error_names_line(self):
        """Test syntax errors point at the document position."""
        with pytest.raises(InputError, match=r"plan.json: line 2"):
            parse_plan('{"kind": "ratio",\n  "grid": [}', "plan.json")

    def test_document_must_be_object(self):
        """Test a list document is rejected."""
        with pytest.raises(InputError, match="plan must be an object"):
            parse_plan("[1, 2]")

    def test_load_plan(self, tmp_path, plan_dict):
        """Test reading a plan file."""
        path = tmp_path / "plan.json"
        path.write_text(json.dumps(plan_dict))
        assert load_plan(path).experiment_id == "drift_sweep"

    def test_load_plan_missing(self, tmp_path):
        """Test a missing plan file."""
        with pytest.raises(FileNotFoundError, match="Plan file not found"):
            load_plan(tmp_path / "plan.json")
