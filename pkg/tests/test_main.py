"""Tests for the command-line entry point."""

import csv
import json

import pytest

from main import EXIT_FAILED, EXIT_INPUT, EXIT_OK, main_async, parse_args
from src.core.io import load_dataset, save_dataset
from src.core.points import Dataset


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    """Run every command from an empty directory so no settings file is picked up."""
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def four_points(tmp_path):
    """Two pairs on a line."""
    return save_dataset(Dataset.from_rows([[0.0], [1.0], [10.0], [11.0]]), tmp_path / "points.csv")


async def run_cli(*argv: str) -> int:
    return await main_async(parse_args(list(argv)))


def _stdout_values(captured: str) -> dict[str, str]:
    return dict(line.split(",", 1) for line in captured.strip().splitlines() if "," in line)


class TestParseArgs:
    """Tests for argument parsing."""

    def test_common_flags_before_and_after_subcommand(self):
        """Test shared flags are accepted on either side of the subcommand."""
        before = parse_args(["--threads", "3", "oracle", "opt", "--data", "x.csv", "--k", "2"])
        after = parse_args(["oracle", "opt", "--data", "x.csv", "--k", "2", "--threads", "3"])

        assert before.threads == 3
        assert after.threads == 3

    def test_unset_common_flags_are_absent(self):
        """Test unset shared flags leave no attribute behind."""
        args = parse_args(["oracle", "opt", "--data", "x.csv", "--k", "2"])

        assert not hasattr(args, "seed")
        assert not hasattr(args, "settings")

    def test_unknown_suite_rejected(self):
        """Test argparse rejects suites outside the known list."""
        with pytest.raises(SystemExit):
            parse_args(["accept", "--suite", "speed"])

    def test_game_defaults(self):
        """Test game defaults match the documented values."""
        args = parse_args(["game", "chernoff", "--out", "tail.csv"])

        assert args.p == 0.2
        assert args.ell == 100
        assert args.levels == [40, 80, 120, 160, 200]


class TestOracleCommand:
    """Tests for ``oracle opt``."""

    @pytest.mark.asyncio
    async def test_prints_cost_and_partition(self, four_points, capsys):
        """Test the optimum and blocks are printed."""
        code = await run_cli("oracle", "opt", "--data", str(four_points), "--k", "2")

        lines = capsys.readouterr().out.strip().splitlines()
        assert code == EXIT_OK
        assert float(lines[0].split(",")[1]) == pytest.approx(1.0)
        assert lines[1:] == ["index,block", "0,0", "1,0", "2,1", "3,1"]

    @pytest.mark.asyncio
    async def test_missing_data_file(self):
        """Test a missing dataset is an input error."""
        assert await run_cli("oracle", "opt", "--data", "absent.csv", "--k", "2") == EXIT_INPUT


class TestSeedCommand:
    """Tests for ``seed``."""

    @pytest.mark.asyncio
    async def test_writes_trace_and_centers(self, four_points, tmp_path, capsys):
        """Test the trace, centers and refined cost are produced."""
        code = await run_cli(
            "seed",
            "--data",
            str(four_points),
            "--k",
            "2",
            "--eps",
            "0.2",
            "--policy",
            "random",
            "--seed",
            "5",
            "--trace-out",
            "trace.csv",
            "--centers-out",
            "centers.csv",
            "--lloyd-iters",
            "3",
        )

        values = _stdout_values(capsys.readouterr().out)
        assert code == EXIT_OK
        assert (tmp_path / "trace.csv").exists()
        assert load_dataset(tmp_path / "centers.csv").n == 2
        assert float(values["refined_cost"]) <= float(values["cost"])

    @pytest.mark.asyncio
    async def test_same_seed_same_trace(self, four_points, tmp_path):
        """Test a fixed seed reproduces the trace file."""
        for name in ("a.csv", "b.csv"):
            args = ("seed", "--data", str(four_points), "--k", "3", "--seed", "9", "--trace-out", name)
            assert await run_cli(*args) == EXIT_OK

        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    @pytest.mark.asyncio
    async def test_k_above_n(self, four_points):
        """Test an infeasible k is an input error."""
        code = await run_cli("seed", "--data", str(four_points), "--k", "5", "--trace-out", "trace.csv")

        assert code == EXIT_INPUT

    @pytest.mark.asyncio
    async def test_missing_policy_file(self, four_points):
        """Test a missing policy file is an input error."""
        code = await run_cli(
            "seed",
            "--data",
            str(four_points),
            "--k",
            "2",
            "--eps",
            "0.1",
            "--policy",
            "file:absent.yaml",
            "--trace-out",
            "trace.csv",
        )

        assert code == EXIT_INPUT

    @pytest.mark.asyncio
    async def test_policy_file(self, four_points, tmp_path):
        """Test seeding accepts a scripted policy file."""
        policy = {"name": "tilt_small", "epsilon": 0.2, "rules": [{"when": "small", "multiplier": 1.2}]}
        (tmp_path / "policy.json").write_text(json.dumps(policy))

        code = await run_cli(
            "seed",
            "--data",
            str(four_points),
            "--k",
            "2",
            "--eps",
            "0.2",
            "--policy",
            "file:policy.json",
            "--trace-out",
            "trace.csv",
        )

        assert code == EXIT_OK
        with (tmp_path / "trace.csv").open() as f:
            assert len(list(csv.DictReader(f))) == 2


class TestGameCommand:
    """Tests for ``game``."""

    @pytest.mark.asyncio
    async def test_run_all_ones(self, tmp_path, capsys):
        """Test a calm game passes every trace check."""
        code = await run_cli("game", "run", "--k", "8", "--weights", "generator:all_ones", "--out", "game.csv")

        assert code == EXIT_OK
        assert (tmp_path / "game.csv").exists()
        assert float(_stdout_values(capsys.readouterr().out)["max_avg_weight"]) == pytest.approx(1.0)

    @pytest.mark.asyncio
    async def test_run_needs_weights(self):
        """Test run without --weights is an input error."""
        assert await run_cli("game", "run", "--k", "8", "--out", "game.csv") == EXIT_INPUT

    @pytest.mark.asyncio
    async def test_inline_weights_length_mismatch(self):
        """Test an inline list must have k entries."""
        code = await run_cli("game", "run", "--k", "3", "--weights", "1,1", "--out", "game.csv")

        assert code == EXIT_INPUT

    @pytest.mark.asyncio
    async def test_advantage(self, tmp_path, capsys):
        """Test the advantage study writes one row per round."""
        code = await run_cli(
            "game",
            "advantage",
            "--k",
            "16",
            "--eps",
            "0.3",
            "--weights",
            "generator:one_heavy(log2)",
            "--policy",
            "drift",
            "--trials",
            "5",
            "--out",
            "advantage.csv",
        )

        with (tmp_path / "advantage.csv").open() as f:
            rows = list(csv.DictReader(f))
        assert code == EXIT_OK
        assert len(rows) == 16
        assert int(_stdout_values(capsys.readouterr().out)["late_max_round"]) >= 1

    @pytest.mark.asyncio
    async def test_badness_all_ones(self, tmp_path):
        """Test all-ones games are never bad."""
        code = await run_cli(
            "game",
            "badness",
            "--k",
            "8",
            "--weights",
            "generator:all_ones",
            "--trials",
            "4",
            "--levels",
            "1",
            "2",
            "--out",
            "badness.csv",
        )

        assert code == EXIT_OK
        assert (tmp_path / "badness.csv").exists()

    @pytest.mark.asyncio
    async def test_chernoff_too_few_trials(self):
        """Test the Chernoff check refuses small trial counts."""
        code = await run_cli("game", "chernoff", "--trials", "100", "--out", "tail.csv")

        assert code == EXIT_INPUT


class TestDatagenCommand:
    """Tests for ``datagen``."""

    @pytest.mark.asyncio
    async def test_writes_dataset_and_metadata(self, tmp_path):
        """Test the dataset and its planted metadata are written."""
        code = await run_cli(
            "datagen",
            "--family",
            "separated_clusters",
            "--n",
            "9",
            "--d",
            "3",
            "--k-true",
            "3",
            "--seed",
            "4",
            "--out",
            "data.csv",
            "--meta-out",
            "meta.json",
        )

        meta = json.loads((tmp_path / "meta.json").read_text())
        assert code == EXIT_OK
        assert load_dataset(tmp_path / "data.csv").n == 9
        assert meta["seed"] == 4
        assert meta["planted_cost"] == 0.0

    @pytest.mark.asyncio
    async def test_infeasible(self):
        """Test n below k_true is an input error."""
        code = await run_cli("datagen", "--n", "2", "--k-true", "3", "--out", "data.csv")

        assert code == EXIT_INPUT


class TestExperimentCommand:
    """Tests for ``experiment``."""

    @pytest.mark.asyncio
    async def test_requires_plan(self):
        """Test a plan is required."""
        assert await run_cli("experiment") == EXIT_INPUT

    @pytest.mark.asyncio
    async def test_runs_plan(self, tmp_path):
        """Test a plan runs into the output directory."""
        plan = {
            "experiment_id": "calm",
            "kind": "badness",
            "grid": {"k": [8], "epsilon": [0.0], "policy": ["null"], "weights": ["all_ones"]},
            "trials": 3,
            "levels": [1, 2],
        }
        (tmp_path / "plan.json").write_text(json.dumps(plan))

        code = await run_cli("experiment", "--config", "plan.json", "--out-dir", "out", "--seed", "3")

        assert code == EXIT_OK
        assert (tmp_path / "out" / "records.csv").exists()
        assert (tmp_path / "out" / "details" / "calm_0000_badness.csv").exists()

    @pytest.mark.asyncio
    async def test_malformed_plan(self, tmp_path):
        """Test a plan missing required grid keys is an input error."""
        (tmp_path / "plan.json").write_text(json.dumps({"experiment_id": "x", "kind": "chernoff", "grid": {"p": [0.2]}, "trials": 10}))

        assert await run_cli("experiment", "--config", "plan.json") == EXIT_INPUT


class TestAcceptCommand:
    """Tests for ``accept``."""

    @pytest.mark.asyncio
    async def test_missing_fixtures(self):
        """Test a missing fixture file is an input error."""
        assert await run_cli("accept", "--suite", "sampler", "--fixtures", "absent.yaml") == EXIT_INPUT

    @pytest.mark.asyncio
    async def test_sampler_suite(self, tmp_path, capsys):
        """Test a passing suite exits 0 and writes its report."""
        code = await run_cli("accept", "--suite", "sampler", "--trials-scale", "0.5", "--out-dir", "acc")

        assert code == EXIT_OK
        assert capsys.readouterr().out.strip() == "sampler: PASS"
        assert (tmp_path / "acc" / "acceptance.csv").exists()

    @pytest.mark.asyncio
    async def test_failing_suite_exits_one(self, tmp_path):
        """Test a failed check gives exit code 1."""
        fixtures = tmp_path / "fixtures.yaml"
        text = (
            "caps:\n"
            "  advantage_max_mean: 1.5\n"
            "  advantage_late_max_mean: 1.5\n"
            "  ratio_noiseless_mean: 0.5\n"
            "six_points: [[0, 0], [1, 0], [0, 2], [3, 1], [4, 4], [6, 0]]\n"
            "twelve_points: [[0, 0], [1, 0], [0, 1], [1, 1], [10, 0], [11, 0], [10, 1], [11, 1.5],"
            " [5, 8], [6, 8], [5, 9], [6.5, 9]]\n"
        )
        fixtures.write_text(text)

        code = await run_cli("accept", "--suite", "ratio", "--trials-scale", "0.001", "--fixtures", str(fixtures))

        assert code == EXIT_FAILED
