"""Gradient-boosted tree residualizer: fit quality, objectives, contracts."""

import numpy as np
import pytest

from mbselect.boosting import (
    LOGISTIC,
    SQUARED_ERROR,
    EnsembleParams,
    classification_defaults,
    fit,
    predict,
    raw_score,
    regression_defaults,
    residuals,
)


def _interaction_data(seed, n=4000):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    return X, X[:, 0] * X[:, 1]


def _depth(tree):
    def go(node):
        if tree.feature[node] < 0:
            return 0
        return 1 + max(go(tree.left[node]), go(tree.right[node]))

    return go(0)


class TestDefaults:
    def test_regression_defaults(self):
        p = regression_defaults()
        assert (p.max_depth, p.n_trees, p.learning_rate) == (4, 200, 0.2)
        assert p.objective == SQUARED_ERROR

    def test_classification_defaults(self):
        p = classification_defaults()
        assert (p.max_depth, p.n_trees, p.learning_rate) == (5, 300, 0.2)
        assert p.objective == LOGISTIC

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            EnsembleParams(n_trees=0, max_depth=4, learning_rate=0.2)
        with pytest.raises(ValueError):
            EnsembleParams(n_trees=10, max_depth=0, learning_rate=0.2)
        with pytest.raises(ValueError):
            EnsembleParams(n_trees=10, max_depth=4, learning_rate=1.5)


class TestRegression:
    def test_constant_target_is_fixpoint(self):
        X = np.random.default_rng(0).normal(size=(50, 3))
        y = np.full(50, 7.25)
        model = fit(X, y)
        np.testing.assert_allclose(predict(model, X), 7.25, atol=1e-12)
        assert model.base_score == 7.25

    def test_interaction_capture(self):
        X, y = _interaction_data(1)
        model = fit(X, y)
        pred = predict(model, X)
        r2 = 1.0 - np.var(y - pred) / np.var(y)
        assert r2 >= 0.9
        assert np.corrcoef(pred, y)[0, 1] >= 0.95

    def test_training_loss_monotone(self):
        X, y = _interaction_data(2, n=1000)
        model = fit(X, y)
        losses = np.asarray(model.train_loss)
        assert np.all(np.diff(losses) <= 1e-9)

    def test_noise_feature_barely_moves_fit(self):
        r2s = []
        for seed in range(10):
            X, y = _interaction_data(100 + seed, n=2000)
            rng = np.random.default_rng(200 + seed)
            X_noise = np.column_stack([X, rng.normal(size=2000)])
            r2 = []
            for mat in (X, X_noise):
                pred = predict(fit(mat, y), mat)
                r2.append(1.0 - np.var(y - pred) / np.var(y))
            r2s.append(abs(r2[0] - r2[1]))
        assert np.median(r2s) < 0.05

    def test_deterministic(self):
        X, y = _interaction_data(3, n=500)
        a = fit(X, y)
        b = fit(X, y)
        np.testing.assert_array_equal(predict(a, X), predict(b, X))

    def test_min_leaf_blocks_small_splits(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(30, 2))
        y = rng.normal(size=30)
        model = fit(X, y, EnsembleParams(n_trees=5, max_depth=3, learning_rate=0.3))
        assert all(tree.n_nodes == 1 for tree in model.trees)

    def test_depth_bound_respected(self):
        X, y = _interaction_data(5, n=500)
        model = fit(X, y, EnsembleParams(n_trees=10, max_depth=2, learning_rate=0.3))
        assert any(tree.n_leaves > 1 for tree in model.trees)
        for tree in model.trees:
            assert _depth(tree) <= 2


class TestLogistic:
    def test_logloss_beats_constant_baseline(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(4000, 1))
        p_true = 1.0 / (1.0 + np.exp(-2.0 * X[:, 0]))
        y = (rng.random(4000) < p_true).astype(np.float64)
        model = fit(X, y, classification_defaults())
        phat = np.clip(predict(model, X), 1e-12, 1 - 1e-12)
        logloss = -np.mean(y * np.log(phat) + (1 - y) * np.log(1 - phat))
        assert logloss < 0.55

    def test_probabilities_bounded_for_extreme_inputs(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(500, 1))
        y = (X[:, 0] > 0).astype(np.float64)
        model = fit(X, y, classification_defaults())
        probs = predict(model, np.array([[1e6], [-1e6]]))
        assert np.all((probs > 0.0) & (probs < 1.0))

    def test_label_validation(self):
        X = np.zeros((10, 1))
        with pytest.raises(ValueError):
            fit(X, np.linspace(0, 2, 10), classification_defaults())

    def test_residuals_in_open_unit_interval(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(800, 2))
        y = (X[:, 0] + 0.5 * rng.normal(size=800) > 0).astype(np.float64)
        res = residuals(fit(X, y, classification_defaults()), X, y)
        assert np.all(res > -1.0) and np.all(res < 1.0)

    def test_training_loss_monotone(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(600, 2))
        y = (X[:, 0] > 0.2).astype(np.float64)
        model = fit(X, y, classification_defaults())
        assert np.all(np.diff(np.asarray(model.train_loss)) <= 1e-9)


class TestPredictResiduals:
    def test_residuals_are_y_minus_prediction(self):
        X, y = _interaction_data(10, n=400)
        model = fit(X, y)
        np.testing.assert_allclose(residuals(model, X, y), y - predict(model, X))

    def test_constant_model_residuals_center(self):
        X = np.zeros((100, 1))
        rng = np.random.default_rng(11)
        y = rng.normal(size=100)
        model = fit(X, y, EnsembleParams(n_trees=5, max_depth=2, learning_rate=0.2))
        np.testing.assert_allclose(residuals(model, X, y), y - y.mean(), atol=1e-9)

    def test_dimension_mismatch_rejected(self):
        X, y = _interaction_data(12, n=100)
        model = fit(X, y)
        with pytest.raises(ValueError):
            predict(model, np.zeros((5, 3)))

    def test_tiny_or_broken_inputs_rejected(self):
        with pytest.raises(ValueError):
            fit(np.zeros((1, 2)), np.zeros(1))
        with pytest.raises(ValueError):
            fit(np.array([[0.0], [np.nan]]), np.zeros(2))
        with pytest.raises(ValueError):
            fit(np.zeros((4, 1)), np.array([0.0, 1.0, np.inf, 0.0]))

    def test_raw_score_vs_probability(self):
        rng = np.random.default_rng(13)
        X = rng.normal(size=(300, 1))
        y = (X[:, 0] > 0).astype(np.float64)
        model = fit(X, y, classification_defaults())
        raw = raw_score(model, X)
        prob = predict(model, X)
        np.testing.assert_allclose(prob, 1.0 / (1.0 + np.exp(-np.clip(raw, -20, 20))))
