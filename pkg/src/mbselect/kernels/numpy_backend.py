"""Pure-numpy fallback for the tree-growing hot loops.

Mirrors the numba backend's semantics (same candidates, same strict-gain
tie handling) using grouped prefix sums. Left/right gradient sums come from
global cumulative sums, so gains can differ from the numba path in the last
ulp; structural disagreement would need two candidates within ~1e-12 relative
gain of each other.
"""

from __future__ import annotations

import numpy as np

LAM = 1e-12


def best_splits(X, sorted_idx, row_slot, g, h, n_active, min_leaf):
    """Same contract as the numba backend's `best_splits`."""
    n, p = X.shape
    active = row_slot >= 0
    slot_active = row_slot[active]
    tot_g = np.bincount(slot_active, weights=g[active], minlength=n_active)
    tot_h = np.bincount(slot_active, weights=h[active], minlength=n_active)
    tot_c = np.bincount(slot_active, minlength=n_active).astype(np.int64)
    parent = tot_g * tot_g / (tot_h + LAM)

    best_gain = np.zeros(n_active)
    best_feat = np.full(n_active, -1, np.int32)
    best_thr = np.zeros(n_active)

    for j in range(p):
        order = sorted_idx[j]
        slots = row_slot[order]
        keep = slots >= 0
        rows = order[keep]
        slots = slots[keep]
        if rows.size < 2 * min_leaf:
            continue
        # Group rows by slot; stable sort keeps ascending-value order inside.
        regroup = np.argsort(slots, kind="stable")
        rows = rows[regroup]
        slots = slots[regroup]
        xv = X[rows, j]
        cg = np.concatenate(([0.0], np.cumsum(g[rows])))
        ch = np.concatenate(([0.0], np.cumsum(h[rows])))
        starts = np.searchsorted(slots, np.arange(n_active), side="left")

        cand = np.flatnonzero((slots[:-1] == slots[1:]) & (xv[1:] > xv[:-1]))
        if cand.size == 0:
            continue
        cs = slots[cand]
        gl = cg[cand + 1] - cg[starts[cs]]
        hl = ch[cand + 1] - ch[starts[cs]]
        cl = cand + 1 - starts[cs]
        cr = tot_c[cs] - cl
        ok = (cl >= min_leaf) & (cr >= min_leaf)
        if not ok.any():
            continue
        cand = cand[ok]
        cs = cs[ok]
        gl = gl[ok]
        hl = hl[ok]
        gr = tot_g[cs] - gl
        hr = tot_h[cs] - hl
        gain = gl * gl / (hl + LAM) + gr * gr / (hr + LAM) - parent[cs]

        # First maximum per slot: order by (slot, gain desc, position asc).
        sel = np.lexsort((cand, -gain, cs))
        first = np.unique(cs[sel], return_index=True)[1]
        pick = sel[first]
        ps = cs[pick]
        upd = gain[pick] > best_gain[ps]
        ups = ps[upd]
        upick = pick[upd]
        best_gain[ups] = gain[upick]
        best_feat[ups] = j
        pos = cand[upick]
        best_thr[ups] = 0.5 * (xv[pos] + xv[pos + 1])
    return best_gain, best_feat, best_thr, tot_g, tot_h, tot_c


def predict_forest(feature, threshold, left, right, value, offsets, X):
    """Same contract as the numba backend's `predict_forest`."""
    n = X.shape[0]
    out = np.zeros(n)
    rows = np.arange(n)
    for t in range(offsets.size - 1):
        node = np.full(n, offsets[t], dtype=np.int64)
        while True:
            f = feature[node]
            walking = f >= 0
            if not walking.any():
                break
            idx = rows[walking]
            sub = node[walking]
            go_left = X[idx, feature[sub]] <= threshold[sub]
            node[idx] = np.where(go_left, left[sub], right[sub])
        out += value[node]
    return out
