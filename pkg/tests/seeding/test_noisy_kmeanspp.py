"""Unit tests for exact and noisy k-means++ seeding."""

import csv

import numpy as np
import pytest

from src.adversaries.builtin import near_bias_policy, null_policy, random_policy
from src.core.cost import set_cost
from src.core.errors import InputError
from src.core.points import Dataset
from src.core.rng import make_generator
from src.seeding.noisy_kmeanspp import TRACE_COLUMNS, NoiseModel, seed
from src.seeding.perturbation import validate_perturbation


@pytest.fixture
def clusters() -> Dataset:
    """Three groups of four points."""
    rows = []
    for cx, cy in [(0.0, 0.0), (10.0, 0.0), (5.0, 8.0)]:
        rows.extend([[cx, cy], [cx + 1, cy], [cx, cy + 1], [cx + 1, cy + 1]])
    return Dataset.from_rows(rows)


class TestNoiseModel:
    """Tests for NoiseModel."""

    def test_defaults_to_noiseless(self):
        """Test the default model has no noise and no policy."""
        noise = NoiseModel()
        assert noise.epsilon == 0.0
        assert noise.policy_name == "null"

    def test_rejects_epsilon_half(self):
        """Test ε = 1/2 is rejected."""
        with pytest.raises(InputError, match="epsilon"):
            NoiseModel(0.5, random_policy(0.3))

    def test_policy_name(self):
        """Test the policy name is exposed."""
        assert NoiseModel(0.2, random_policy(0.2)).policy_name == "random"


class TestSeed:
    """Tests for seed."""

    def test_returns_k_distinct_dataset_points(self, clusters):
        """Test k centers are chosen among the points without repetition."""
        centers, trace = seed(clusters, 3, rng_seed=5)

        assert centers.size == 3
        assert len(trace) == 3
        assert len(set(centers.point_indices)) == 3
        for row, index in zip(centers.centers, centers.point_indices, strict=True):
            np.testing.assert_array_equal(row, clusters.points[index])

    def test_first_round_is_uniform(self, clusters):
        """Test round 1 samples with probability 1/n."""
        _, trace = seed(clusters, 2, rng_seed=1)
        assert trace.rounds[0].base_prob_of_sampled == pytest.approx(1.0 / clusters.n)

    def test_costs_never_increase(self, clusters):
        """Test each added center lowers or keeps the cost."""
        _, trace = seed(clusters, 6, rng_seed=3)
        assert all(later <= earlier for earlier, later in zip(trace.costs, trace.costs[1:], strict=False))

    def test_trace_cost_matches_set_cost(self, clusters):
        """Test the last recorded cost is the cost of the returned centers."""
        centers, trace = seed(clusters, 4, rng_seed=8)
        assert trace.costs[-1] == pytest.approx(set_cost(clusters, centers))

    def test_same_seed_same_centers(self, clusters):
        """Test seeding is reproducible."""
        noise = NoiseModel(0.3, random_policy(0.3))
        _, first = seed(clusters, 3, noise, rng_seed=42)
        _, second = seed(clusters, 3, noise, rng_seed=42)
        assert first.sampled_indices == second.sampled_indices

    def test_null_policy_matches_exact(self, clusters):
        """Test the null policy reproduces exact k-means++."""
        _, exact = seed(clusters, 3, None, rng_seed=9)
        _, null = seed(clusters, 3, NoiseModel(0.2, null_policy()), rng_seed=9)
        assert exact.sampled_indices == null.sampled_indices

    @pytest.mark.parametrize("rng_seed", [0, 7, 31, 2024])
    def test_transcript_matches_reference_loop(self, rng_seed):
        """Test indices and costs against a plain D² sampling loop on 20 points."""
        points = np.random.default_rng(12).normal(size=(20, 2))
        k = 8

        _, trace = seed(Dataset(points), k, NoiseModel(0.2, null_policy()), rng_seed=rng_seed)

        rng = make_generator(rng_seed)
        weights = np.ones(20)
        indices, costs = [], []
        for _ in range(k):
            cdf = np.cumsum(weights)
            index = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
            indices.append(index)
            sq = np.sum((points - points[index]) ** 2, axis=1)
            weights = sq if len(indices) == 1 else np.minimum(weights, sq)
            costs.append(float(weights.sum()))

        assert trace.sampled_indices == indices
        np.testing.assert_allclose(trace.costs, costs, rtol=1e-12)

    def test_k_equals_n_has_zero_cost(self, clusters):
        """Test choosing every point leaves zero cost."""
        centers, trace = seed(clusters, clusters.n, rng_seed=0)
        assert sorted(centers.point_indices) == list(range(clusters.n))
        assert trace.costs[-1] == 0.0

    @pytest.mark.parametrize("k", [0, 13])
    def test_rejects_k_outside_range(self, clusters, k):
        """Test k must lie in [1, n]."""
        with pytest.raises(InputError, match="k must lie"):
            seed(clusters, k)

    def test_duplicate_points_fall_back_to_uniform(self):
        """Test zero remaining cost switches to uniform over unchosen indices."""
        dataset = Dataset.from_rows([[1.0, 1.0]] * 3)
        centers, trace = seed(dataset, 3, rng_seed=2)

        assert trace.degenerate_rounds == [2, 3]
        assert len(set(centers.point_indices)) == 3

    @pytest.mark.parametrize("policy_factory", [random_policy, near_bias_policy])
    def test_noisy_rounds_stay_in_band(self, clusters, policy_factory):
        """Test every perturbed round respects the multiplicative band."""
        epsilon = 0.4
        noise = NoiseModel(epsilon, policy_factory(epsilon))
        for run in range(20):
            _, trace = seed(clusters, 4, noise, rng_seed=run, keep_distributions=True)
            for seeding_round in trace.rounds:
                report = validate_perturbation(seeding_round.base, seeding_round.perturbed, epsilon)
                assert report.is_valid, report.summary()

    def test_distributions_dropped_on_request(self, clusters):
        """Test keep_distributions=False stores no vectors."""
        _, trace = seed(clusters, 2, rng_seed=0, keep_distributions=False)
        assert trace.rounds[1].base is None
        assert trace.rounds[1].perturbed is None


class TestSeedingTraceCsv:
    """Tests for SeedingTrace.write_csv."""

    def test_columns_and_rows(self, clusters, tmp_path):
        """Test one row per round under the documented header."""
        _, trace = seed(clusters, 3, rng_seed=4)
        path = trace.write_csv(tmp_path / "out" / "trace.csv")

        with path.open() as f:
            rows = list(csv.DictReader(f))

        assert tuple(rows[0].keys()) == TRACE_COLUMNS
        assert [int(r["round"]) for r in rows] == [1, 2, 3]
        assert [int(r["sampled_index"]) for r in rows] == trace.sampled_indices
        assert float(rows[-1]["cost_after"]) == trace.costs[-1]
