"""Random Fourier feature maps and the bandwidth heuristic."""

import numpy as np
import pytest

from mbselect.rff import FourierMap, apply_map, median_bandwidth, sample_fourier_map


class TestMedianBandwidth:
    def test_single_pair(self):
        x = np.array([[0.0], [3.0]])
        assert median_bandwidth(x) == 3.0

    def test_identical_rows_fall_back_to_one(self):
        assert median_bandwidth(np.zeros((10, 2))) == 1.0

    def test_standard_normal_scale(self):
        # |N(0,1) - N(0,1)| has median about 1.35; sample medians stay close
        rng = np.random.default_rng(0)
        bw = median_bandwidth(rng.normal(size=(100, 1)))
        assert 0.8 <= bw <= 1.6

    def test_subsample_cap(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(2000, 3))
        assert median_bandwidth(x) == median_bandwidth(x[:500])

    def test_needs_two_rows(self):
        with pytest.raises(ValueError):
            median_bandwidth(np.zeros((1, 2)))


class TestSampleFourierMap:
    def test_deterministic_given_seed(self):
        a = sample_fourier_map(2, 4, 1.0, seed=7)
        b = sample_fourier_map(2, 4, 1.0, seed=7)
        np.testing.assert_array_equal(a.weights, b.weights)
        np.testing.assert_array_equal(a.phases, b.phases)

    def test_weight_variance_matches_bandwidth(self):
        fmap = sample_fourier_map(1, 10000, 2.0, seed=3)
        assert abs(fmap.weights.var() - 0.25) < 0.01

    def test_phases_uniform(self):
        fmap = sample_fourier_map(1, 10000, 1.0, seed=4)
        sorted_phases = np.sort(fmap.phases) / (2.0 * np.pi)
        grid = np.arange(1, 10001) / 10000
        ks = np.max(np.abs(sorted_phases - grid))
        assert ks < 0.02

    def test_invalid_bandwidth_rejected(self):
        with pytest.raises(ValueError):
            sample_fourier_map(1, 5, 0.0, seed=0)

    def test_map_invariants(self):
        with pytest.raises(ValueError):
            FourierMap(np.zeros((3, 2)), np.zeros(4), 1.0)
        with pytest.raises(ValueError):
            FourierMap(np.zeros((3, 2)), np.zeros(3), -1.0)


class TestApplyMap:
    def test_constant_map(self):
        fmap = FourierMap(np.zeros((8, 2)), np.zeros(8), 1.0)
        feats = apply_map(fmap, np.random.default_rng(0).normal(size=(5, 2)))
        np.testing.assert_allclose(feats, np.sqrt(2.0 / 8.0))

    def test_self_inner_product_near_one(self):
        rng = np.random.default_rng(5)
        fmap = sample_fourier_map(3, 2000, 1.0, seed=6)
        x = rng.normal(size=(1, 3))
        feats = apply_map(fmap, x)
        assert abs(feats @ feats.T - 1.0) < 0.05

    def test_kernel_approximation_at_distance_two(self):
        fmap = sample_fourier_map(1, 5000, 1.0, seed=8)
        feats = apply_map(fmap, np.array([[0.0], [2.0]]))
        approx = float(feats[0] @ feats[1])
        assert abs(approx - np.exp(-2.0)) < 0.05

    def test_dimension_mismatch_rejected(self):
        fmap = sample_fourier_map(2, 4, 1.0, seed=9)
        with pytest.raises(ValueError):
            apply_map(fmap, np.zeros((3, 5)))

    def test_kernel_error_shrinks_with_feature_count(self):
        # median max-error over seeds should fall as d grows
        rng = np.random.default_rng(10)
        pairs = rng.normal(size=(50, 2, 2))
        true = np.exp(-np.sum((pairs[:, 0] - pairs[:, 1]) ** 2, axis=1) / 2.0)
        med_errors = []
        for d in (100, 1000, 10000):
            errs = []
            for seed in range(20):
                fmap = sample_fourier_map(2, d, 1.0, seed=seed)
                fa = apply_map(fmap, pairs[:, 0])
                fb = apply_map(fmap, pairs[:, 1])
                approx = np.sum(fa * fb, axis=1)
                errs.append(np.max(np.abs(approx - true)))
            med_errors.append(np.median(errs))
        assert med_errors[0] > med_errors[1] > med_errors[2]

    def test_shift_invariance_of_inner_products(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(30, 2))
        shift = np.array([5.0, -3.0])
        inner = []
        for offset in (np.zeros(2), shift):
            prods = []
            for seed in range(40):
                fmap = sample_fourier_map(2, 200, 1.0, seed=seed)
                feats = apply_map(fmap, x + offset)
                prods.append(feats @ feats.T)
            inner.append(np.mean(prods, axis=0))
        assert np.abs(inner[0] - inner[1]).mean() < 3.0 / np.sqrt(200 * 40)
