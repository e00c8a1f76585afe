"""Numba implementations of the tree-growing hot loops.

`best_splits` scans every feature once per tree level and serves all open
leaves of that level simultaneously: rows carry a slot id (-1 when their leaf
is finished), and running per-slot sums over each feature's presorted order
give every candidate split in O(n * p) for the whole level.
"""

from __future__ import annotations

import numpy as np
from numba import njit

LAM = 1e-12


@njit(cache=True)
def best_splits(X, sorted_idx, row_slot, g, h, n_active, min_leaf):
    """Best (gain, feature, threshold) per active slot, plus slot totals.

    X: (n, p) float64. sorted_idx: (p, n) int32, row order per feature with
    ascending values. row_slot: (n,) int32 slot id or -1. Returns arrays of
    length n_active; feature -1 means no admissible split. Candidates are
    midpoints between strictly increasing consecutive values; acceptance is
    strictly greater gain, so the first candidate in (feature asc, value asc)
    order wins ties.
    """
    n, p = X.shape
    tot_g = np.zeros(n_active)
    tot_h = np.zeros(n_active)
    tot_c = np.zeros(n_active, np.int64)
    for i in range(n):
        s = row_slot[i]
        if s >= 0:
            tot_g[s] += g[i]
            tot_h[s] += h[i]
            tot_c[s] += 1
    parent = np.zeros(n_active)
    for s in range(n_active):
        parent[s] = tot_g[s] * tot_g[s] / (tot_h[s] + LAM)

    best_gain = np.zeros(n_active)
    best_feat = np.full(n_active, -1, np.int32)
    best_thr = np.zeros(n_active)
    run_g = np.zeros(n_active)
    run_h = np.zeros(n_active)
    run_c = np.zeros(n_active, np.int64)
    last_v = np.zeros(n_active)

    for j in range(p):
        for s in range(n_active):
            run_g[s] = 0.0
            run_h[s] = 0.0
            run_c[s] = 0
        for k in range(n):
            r = sorted_idx[j, k]
            s = row_slot[r]
            if s < 0:
                continue
            v = X[r, j]
            if run_c[s] > 0 and v > last_v[s]:
                cl = run_c[s]
                cr = tot_c[s] - cl
                if cl >= min_leaf and cr >= min_leaf:
                    gl = run_g[s]
                    hl = run_h[s]
                    gr = tot_g[s] - gl
                    hr = tot_h[s] - hl
                    gain = gl * gl / (hl + LAM) + gr * gr / (hr + LAM) - parent[s]
                    if gain > best_gain[s]:
                        best_gain[s] = gain
                        best_feat[s] = j
                        best_thr[s] = 0.5 * (last_v[s] + v)
            run_g[s] += g[r]
            run_h[s] += h[r]
            run_c[s] += 1
            last_v[s] = v
    return best_gain, best_feat, best_thr, tot_g, tot_h, tot_c


@njit(cache=True)
def predict_forest(feature, threshold, left, right, value, offsets, X):
    """Sum of leaf values over packed trees, tree-by-tree per row."""
    n = X.shape[0]
    out = np.zeros(n)
    for t in range(offsets.size - 1):
        root = offsets[t]
        for i in range(n):
            node = root
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] += value[node]
    return out
