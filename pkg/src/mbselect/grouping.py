"""Partitioning candidate variables into small groups for selection.

Continuous candidates are clustered on absolute Pearson correlation with
average-linkage agglomeration (distance 1 - |corr|, merges stop above
1 - threshold), so correlated variables land in one group and compete
against each other early. Categorical candidates always form one group of
their own, tested last. The agglomerator is written out here rather than
taken from scipy because the contract pins deterministic tie-breaks (lowest
member index) and a recursive re-cluster rule for oversize groups.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataTable

THRESHOLD_STEP = 0.1
THRESHOLD_CAP = 0.95


@dataclass(frozen=True)
class GroupPartition:
    """Ordered continuous groups plus the (possibly empty) categorical group."""

    continuous_groups: tuple[tuple[str, ...], ...]
    categorical_group: tuple[str, ...]
    threshold_used: float

    @property
    def n_groups(self) -> int:
        return len(self.continuous_groups) + (1 if self.categorical_group else 0)

    def all_names(self) -> tuple[str, ...]:
        flat: list[str] = []
        for group in self.continuous_groups:
            flat.extend(group)
        flat.extend(self.categorical_group)
        return tuple(flat)


def association_matrix(table: DataTable, names: list[str] | tuple[str, ...]) -> np.ndarray:
    """|Pearson correlation| between continuous columns; constants get 0."""
    cols = [table.column(n) for n in names]
    if any(c.is_categorical for c in cols):
        raise ValueError("association_matrix expects continuous columns")
    X = np.column_stack([c.values for c in cols]).astype(np.float64)
    p = X.shape[1]
    sd = X.std(axis=0, ddof=1)
    varying = sd > 0
    out = np.eye(p)
    if varying.sum() >= 2:
        sub = np.abs(np.corrcoef(X[:, varying], rowvar=False))
        idx = np.flatnonzero(varying)
        out[np.ix_(idx, idx)] = sub
        np.fill_diagonal(out, 1.0)
    return out


def _average_linkage(dist: np.ndarray, cutoff: float) -> list[tuple[int, ...]]:
    """Greedy agglomeration; merge while the closest pair is within cutoff.

    Ties pick the pair whose smallest member index is lowest (then the other
    cluster's smallest member). Returned groups are sorted by smallest member.
    """
    p = dist.shape[0]
    members: dict[int, list[int]] = {i: [i] for i in range(p)}
    d = {(i, j): float(dist[i, j]) for i in range(p) for j in range(i + 1, p)}
    while len(members) > 1:
        best_key = None
        best = (np.inf, np.inf, np.inf)
        for (i, j), dij in d.items():
            rank = (dij, min(members[i]), min(members[j]))
            if rank < best:
                best = rank
                best_key = (i, j)
        if best_key is None or best[0] > cutoff:
            break
        i, j = best_key
        ni, nj = len(members[i]), len(members[j])
        for k in list(members):
            if k in (i, j):
                continue
            dik = d.pop((min(i, k), max(i, k)))
            djk = d.pop((min(j, k), max(j, k)))
            d[(min(i, k), max(i, k))] = (ni * dik + nj * djk) / (ni + nj)
        del d[(i, j)]
        members[i] = sorted(members[i] + members[j])
        del members[j]
    groups = sorted(members.values(), key=min)
    return [tuple(g) for g in groups]


def _split_oversize(
    group: tuple[int, ...], dist: np.ndarray, threshold: float, max_size: int
) -> list[tuple[int, ...]]:
    if len(group) <= max_size:
        return [group]
    if threshold >= THRESHOLD_CAP:
        return [group[i : i + max_size] for i in range(0, len(group), max_size)]
    tighter = min(threshold + THRESHOLD_STEP, THRESHOLD_CAP)
    idx = np.asarray(group)
    sub = dist[np.ix_(idx, idx)]
    out: list[tuple[int, ...]] = []
    for local in _average_linkage(sub, 1.0 - tighter):
        mapped = tuple(int(idx[i]) for i in local)
        out.extend(_split_oversize(mapped, dist, tighter, max_size))
    return sorted(out, key=min)


def cluster_groups(
    assoc: np.ndarray, threshold: float, max_group_size: int
) -> list[tuple[int, ...]]:
    """Index groups from an association matrix.

    Clusters merge while average |corr| stays above `threshold`; groups over
    `max_group_size` are re-clustered at threshold + 0.1 (capped at 0.95) and
    chunked by index order if still oversize at the cap.
    """
    assoc = np.asarray(assoc, dtype=np.float64)
    if assoc.ndim != 2 or assoc.shape[0] != assoc.shape[1]:
        raise ValueError("association matrix must be square")
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    if max_group_size < 1:
        raise ValueError("max_group_size must be >= 1")
    dist = 1.0 - np.abs(assoc)
    np.fill_diagonal(dist, 0.0)
    groups: list[tuple[int, ...]] = []
    for g in _average_linkage(dist, 1.0 - threshold):
        groups.extend(_split_oversize(g, dist, threshold, max_group_size))
    return sorted(groups, key=min)


def _pack_singleton_groups(
    groups: list[tuple[int, ...]], max_size: int
) -> list[tuple[int, ...]]:
    multi = [g for g in groups if len(g) > 1]
    single = sorted(i for g in groups if len(g) == 1 for i in g)
    packed = [tuple(single[i : i + max_size]) for i in range(0, len(single), max_size)]
    return sorted(multi + packed, key=min)


def partition(
    table: DataTable,
    candidates: list[str] | tuple[str, ...],
    threshold: float = 0.2,
    max_group_size: int = 5,
    pack_singletons: bool = True,
) -> GroupPartition:
    """Group candidate columns of a table for multi-group selection.

    Categorical candidates all go to the categorical group (table order).
    With `pack_singletons`, leftover singleton clusters are packed in column
    order into groups of up to `max_group_size`.
    """
    seen = set()
    for name in candidates:
        if name in seen:
            raise ValueError(f"duplicate candidate {name!r}")
        seen.add(name)
        table.column(name)
    cont = [n for n in candidates if not table.column(n).is_categorical]
    cat = tuple(n for n in candidates if table.column(n).is_categorical)
    if not cont:
        return GroupPartition((), cat, threshold)
    assoc = association_matrix(table, cont)
    groups = cluster_groups(assoc, threshold, max_group_size)
    if pack_singletons:
        groups = _pack_singleton_groups(groups, max_group_size)
    named = tuple(tuple(cont[i] for i in g) for g in groups)
    return GroupPartition(named, cat, threshold)


def partition_from_lists(
    table: DataTable,
    continuous_groups: list[list[str]],
    categorical_group: list[str] | None = None,
) -> GroupPartition:
    """Build a partition from user-specified groups, validating kinds."""
    flat: list[str] = [n for g in continuous_groups for n in g]
    cat = list(categorical_group or [])
    if len(set(flat + cat)) != len(flat) + len(cat):
        raise ValueError("a variable appears in more than one group")
    for name in flat:
        if table.column(name).is_categorical:
            raise ValueError(f"{name!r} is categorical but placed in a continuous group")
    for name in cat:
        if not table.column(name).is_categorical:
            raise ValueError(f"{name!r} is continuous but placed in the categorical group")
    if any(not g for g in continuous_groups):
        raise ValueError("empty group")
    return GroupPartition(tuple(tuple(g) for g in continuous_groups), tuple(cat), float("nan"))
