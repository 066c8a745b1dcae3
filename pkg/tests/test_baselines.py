"""Baseline selectors used for comparisons and ablations."""

import numpy as np
import pytest

from unicomp import random_selection, uniqueness_bound, spatial_compress_parallel

from helpers import cluster_frame


class TestRandomSelection:
    def test_full_budget_is_identity(self):
        rng = np.random.default_rng(51)
        frame = rng.normal(size=(9, 4))
        result = random_selection(frame, budget=9, seed=3)
        assert result.retained_ids == tuple(range(9))
        np.testing.assert_array_equal(result.retained_features, frame)

    def test_seed_reproducibility(self):
        rng = np.random.default_rng(52)
        frame = rng.normal(size=(40, 5))
        first = random_selection(frame, budget=12, seed=7)
        second = random_selection(frame, budget=12, seed=7)
        other = random_selection(frame, budget=12, seed=8)
        assert first.retained_ids == second.retained_ids
        assert first.retained_ids != other.retained_ids

    def test_partition_invariant(self):
        rng = np.random.default_rng(53)
        frame = rng.normal(size=(17, 3))
        result = random_selection(frame, budget=5, seed=0)
        fused = [j for ids in result.redundancy_map.values() for j in ids]
        assert fused == []
        combined = sorted([*result.retained_ids, *result.dropped_unclaimed])
        assert combined == list(range(17))
        assert result.retained_ids == tuple(sorted(result.retained_ids))

    def test_budget_bounds(self):
        frame = np.eye(4)
        with pytest.raises(ValueError, match=r"budget must lie in \[1, 4\]"):
            random_selection(frame, budget=0)
        with pytest.raises(ValueError, match=r"budget must lie in \[1, 4\]"):
            random_selection(frame, budget=5)

    def test_worse_bound_than_greedy_on_clusters(self):
        rng = np.random.default_rng(54)
        greedy_bounds = []
        random_bounds = []
        for trial in range(200):
            frame, _ = cluster_frame(rng, num_clusters=3, per_cluster=5, d=8)
            greedy = spatial_compress_parallel(frame, budget=3, token_threshold=0.2)
            sampled = random_selection(frame, budget=3, seed=trial)
            greedy_bounds.append(uniqueness_bound(frame, greedy.retained_ids))
            random_bounds.append(uniqueness_bound(frame, sampled.retained_ids))
        assert np.mean(random_bounds) > np.mean(greedy_bounds)
