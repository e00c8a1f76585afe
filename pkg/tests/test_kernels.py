"""Tree-growing kernels: split-search oracles and backend agreement."""

import os
import subprocess
import sys

import numpy as np
import pytest

from mbselect import kernels
from mbselect.kernels import numpy_backend

try:
    from mbselect.kernels import numba_backend
except ImportError:  # pragma: no cover
    numba_backend = None

BACKENDS = [pytest.param(numpy_backend, id="numpy")]
if numba_backend is not None:
    BACKENDS.append(pytest.param(numba_backend, id="numba"))


def _sorted_idx(X):
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.int32))


def _split_case(X, row_slot, g, h, n_active, min_leaf, backend):
    X = np.ascontiguousarray(X, dtype=np.float64)
    return backend.best_splits(
        X,
        _sorted_idx(X),
        np.asarray(row_slot, dtype=np.int32),
        np.asarray(g, dtype=np.float64),
        np.asarray(h, dtype=np.float64),
        n_active,
        min_leaf,
    )


@pytest.mark.parametrize("backend", BACKENDS)
class TestBestSplits:
    def test_hand_computed_split(self, backend):
        # g = [1, 1, -1, -1], h = 1: splitting at 2.5 gives gain 4/2 + 4/2 - 0.
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        gain, feat, thr, tg, th, tc = _split_case(
            X, [0, 0, 0, 0], [1.0, 1.0, -1.0, -1.0], np.ones(4), 1, 1, backend
        )
        assert feat[0] == 0
        assert thr[0] == pytest.approx(2.5)
        assert gain[0] == pytest.approx(4.0, rel=1e-9)
        assert tg[0] == pytest.approx(0.0)
        assert th[0] == pytest.approx(4.0)
        assert tc[0] == 4

    def test_min_leaf_excludes_edge_candidates(self, backend):
        # g concentrates gain at the first gap; min_leaf 2 forbids that cut.
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        g = [4.0, -1.0, -1.0, -2.0]
        gain, feat, thr, *_ = _split_case(X, [0] * 4, g, np.ones(4), 1, 2, backend)
        assert feat[0] == 0
        assert thr[0] == pytest.approx(2.5)
        loose_gain, _, loose_thr, *_ = _split_case(
            X, [0] * 4, g, np.ones(4), 1, 1, backend
        )
        assert loose_thr[0] == pytest.approx(1.5)
        assert loose_gain[0] > gain[0]

    def test_no_admissible_split(self, backend):
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        gain, feat, *_ = _split_case(
            X, [0] * 4, [1.0, 1.0, -1.0, -1.0], np.ones(4), 1, 3, backend
        )
        assert feat[0] == -1
        assert gain[0] == 0.0

    def test_constant_feature_never_splits(self, backend):
        X = np.full((6, 1), 2.0)
        gain, feat, *_ = _split_case(
            X, [0] * 6, [1, -1, 1, -1, 1, -1], np.ones(6), 1, 1, backend
        )
        assert feat[0] == -1

    def test_slots_are_independent(self, backend):
        X = np.array([[1.0], [2.0], [3.0], [4.0], [10.0], [20.0], [30.0], [40.0]])
        g = [1.0, 1.0, -1.0, -1.0, -2.0, 2.0, 2.0, -2.0]
        row_slot = [0, 0, 0, 0, 1, 1, 1, 1]
        gain, feat, thr, tg, th, tc = _split_case(
            X, row_slot, g, np.ones(8), 2, 1, backend
        )
        assert feat[0] == 0 and thr[0] == pytest.approx(2.5)
        assert gain[0] == pytest.approx(4.0, rel=1e-9)
        # Slot 1's best cut isolates the lone -2 at the left edge.
        assert feat[1] == 0 and thr[1] == pytest.approx(15.0)
        assert tc.tolist() == [4, 4]

    def test_inactive_rows_ignored(self, backend):
        X = np.array([[1.0], [2.0], [3.0], [4.0], [2.5]])
        base = _split_case(
            X[:4], [0] * 4, [1.0, 1.0, -1.0, -1.0], np.ones(4), 1, 1, backend
        )
        with_ghost = _split_case(
            X, [0, 0, 0, 0, -1], [1.0, 1.0, -1.0, -1.0, 500.0], np.ones(5), 1, 1, backend
        )
        for a, b in zip(base, with_ghost):
            np.testing.assert_allclose(a, b)

    def test_tied_values_share_no_cut(self, backend):
        # A candidate needs strictly increasing neighbours; duplicates at the
        # best-looking boundary push the cut outward.
        X = np.array([[1.0], [2.0], [2.0], [3.0]])
        gain, feat, thr, *_ = _split_case(
            X, [0] * 4, [5.0, -1.0, -1.0, -3.0], np.ones(4), 1, 1, backend
        )
        assert feat[0] == 0
        assert thr[0] == pytest.approx(1.5)

    def test_picks_best_feature(self, backend):
        rng = np.random.default_rng(0)
        noise = rng.normal(size=40)
        signal = np.repeat([0.0, 1.0], 20)
        X = np.column_stack([noise, signal])
        g = np.where(signal > 0.5, 1.0, -1.0)
        gain, feat, thr, *_ = _split_case(X, [0] * 40, g, np.ones(40), 1, 5, backend)
        assert feat[0] == 1
        assert thr[0] == pytest.approx(0.5)


@pytest.mark.parametrize("backend", BACKENDS)
class TestPredictForest:
    def test_single_stump_routing(self, backend):
        feature = np.array([0, -1, -1], dtype=np.int32)
        threshold = np.array([0.5, 0.0, 0.0])
        left = np.array([1, -1, -1], dtype=np.int32)
        right = np.array([2, -1, -1], dtype=np.int32)
        value = np.array([0.0, 2.0, 5.0])
        offsets = np.array([0, 3], dtype=np.int64)
        X = np.array([[0.5], [0.500001], [-3.0]])
        out = backend.predict_forest(feature, threshold, left, right, value, offsets, X)
        np.testing.assert_allclose(out, [2.0, 5.0, 2.0])

    def test_trees_sum(self, backend):
        feature = np.array([0, -1, -1, 0, -1, -1], dtype=np.int32)
        threshold = np.array([0.5, 0.0, 0.0, 1.5, 0.0, 0.0])
        left = np.array([1, -1, -1, 4, -1, -1], dtype=np.int32)
        right = np.array([2, -1, -1, 5, -1, -1], dtype=np.int32)
        value = np.array([0.0, 2.0, 5.0, 0.0, 10.0, 20.0])
        offsets = np.array([0, 3, 6], dtype=np.int64)
        X = np.array([[0.0], [1.0], [2.0]])
        out = backend.predict_forest(feature, threshold, left, right, value, offsets, X)
        np.testing.assert_allclose(out, [12.0, 15.0, 25.0])

    def test_single_leaf_tree(self, backend):
        feature = np.array([-1], dtype=np.int32)
        out = backend.predict_forest(
            feature,
            np.zeros(1),
            np.array([-1], dtype=np.int32),
            np.array([-1], dtype=np.int32),
            np.array([3.25]),
            np.array([0, 1], dtype=np.int64),
            np.zeros((4, 2)),
        )
        np.testing.assert_allclose(out, 3.25)


@pytest.mark.skipif(numba_backend is None, reason="numba unavailable")
class TestBackendAgreement:
    @pytest.mark.parametrize("seed", range(4))
    def test_split_search_matches(self, seed):
        rng = np.random.default_rng(seed)
        n, p = 400, 6
        X = rng.normal(size=(n, p))
        X[:, 0] = np.round(X[:, 0])
        X[:, 1] = rng.integers(0, 2, size=n)
        row_slot = rng.integers(-1, 4, size=n).astype(np.int32)
        g = rng.normal(size=n)
        h = np.abs(rng.normal(size=n)) + 0.1
        out_np = _split_case(X, row_slot, g, h, 4, 5, numpy_backend)
        out_nb = _split_case(X, row_slot, g, h, 4, 5, numba_backend)
        np.testing.assert_allclose(out_np[0], out_nb[0], rtol=1e-9, atol=1e-9)
        np.testing.assert_array_equal(out_np[1], out_nb[1])
        np.testing.assert_allclose(out_np[2], out_nb[2])
        for a, b in zip(out_np[3:], out_nb[3:]):
            np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_full_fit_matches(self, monkeypatch):
        from mbselect import boosting

        rng = np.random.default_rng(5)
        X = rng.normal(size=(600, 4))
        y = X[:, 0] * X[:, 1] + 0.1 * rng.normal(size=600)
        params = boosting.EnsembleParams(n_trees=30, max_depth=3, learning_rate=0.3)

        preds = {}
        for name, backend in (("numpy", numpy_backend), ("numba", numba_backend)):
            monkeypatch.setattr(boosting.kernels, "best_splits", backend.best_splits)
            monkeypatch.setattr(
                boosting.kernels, "predict_forest", backend.predict_forest
            )
            preds[name] = boosting.predict(boosting.fit(X, y, params), X)
        np.testing.assert_allclose(preds["numpy"], preds["numba"], atol=1e-9)


class TestBackendSelection:
    def test_active_backend_reported(self):
        assert kernels.BACKEND in ("numba", "numpy")
        if numba_backend is not None and not os.environ.get("MBSELECT_NO_NUMBA"):
            assert kernels.BACKEND == "numba"

    def test_env_flag_forces_numpy(self):
        env = dict(os.environ, MBSELECT_NO_NUMBA="1")
        out = subprocess.run(
            [sys.executable, "-c", "import mbselect.kernels as k; print(k.BACKEND)"],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        assert out.stdout.strip() == "numpy"
