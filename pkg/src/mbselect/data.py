"""Typed columnar tables and the column transforms used across the package.

A table is a small immutable bundle of named columns, each either continuous
(float64 values) or categorical (int64 codes plus a level list). Everything
downstream (independence tests, grouping, selection) consumes these columns,
so validation happens once, here.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"

# Loader heuristic: numeric columns with at most this many distinct values are
# treated as categorical unless a schema hint says otherwise.
MAX_DISCRETE_LEVELS = 10


@dataclass(frozen=True)
class ColumnKind:
    """Kind tag for a column: continuous, or categorical with named levels."""

    kind: str
    levels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise ValueError(f"unknown column kind {self.kind!r}")
        if self.kind == CONTINUOUS and self.levels:
            raise ValueError("continuous columns carry no levels")
        if self.kind == CATEGORICAL:
            if not self.levels:
                raise ValueError("categorical columns need at least one level")
            if len(set(self.levels)) != len(self.levels):
                raise ValueError("categorical levels must be distinct")

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL


def continuous_kind() -> ColumnKind:
    return ColumnKind(CONTINUOUS)


def categorical_kind(levels: tuple[str, ...] | list[str]) -> ColumnKind:
    return ColumnKind(CATEGORICAL, tuple(str(v) for v in levels))


@dataclass(frozen=True)
class Column:
    """One named column: float64 values, or int64 level codes."""

    name: str
    kind: ColumnKind
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("column name must be non-empty")
        values = np.asarray(self.values)
        if values.ndim != 1:
            raise ValueError(f"column {self.name!r}: values must be 1-D")
        if self.kind.is_categorical:
            values = values.astype(np.int64, copy=False)
            if values.size and (values.min() < 0 or values.max() >= len(self.kind.levels)):
                raise ValueError(f"column {self.name!r}: code out of level range")
        else:
            values = values.astype(np.float64, copy=False)
            if not np.all(np.isfinite(values)):
                raise ValueError(f"column {self.name!r}: non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def is_categorical(self) -> bool:
        return self.kind.is_categorical

    def level_labels(self) -> tuple[str, ...]:
        return self.kind.levels


@dataclass(frozen=True)
class DataTable:
    """Immutable named-column table; all columns share one row count."""

    columns: tuple[Column, ...]

    def __post_init__(self) -> None:
        if not self.columns:
            raise ValueError("table needs at least one column")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        lengths = {c.n_rows for c in self.columns}
        if len(lengths) != 1:
            raise ValueError(f"ragged columns: lengths {sorted(lengths)}")

    @property
    def n_rows(self) -> int:
        return self.columns[0].n_rows

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> Column:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(f"no column named {name!r}")

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def select(self, names: list[str] | tuple[str, ...]) -> "DataTable":
        return DataTable(tuple(self.column(n) for n in names))


@dataclass(frozen=True)
class StandardizedColumn:
    """Zero-mean unit-variance values plus what it takes to undo them."""

    values: np.ndarray = field(repr=False)
    original_mean: float
    original_sd: float

    def unstandardize(self) -> np.ndarray:
        return self.values * self.original_sd + self.original_mean


def standardize(values: np.ndarray) -> StandardizedColumn:
    """Center and scale to unit sample variance (ddof=1).

    Raises on constant input; callers that tolerate constants must check first.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise ValueError("standardize expects a 1-D array")
    if not np.all(np.isfinite(values)):
        raise ValueError("standardize: non-finite values")
    if values.size < 2 or np.all(values == values[0]):
        raise ValueError("standardize: constant column")
    mean = float(values.mean())
    sd = float(values.std(ddof=1))
    if sd == 0.0:
        raise ValueError("standardize: constant column")
    return StandardizedColumn((values - mean) / sd, mean, sd)


def quantile_bin_codes(values: np.ndarray, n_bins: int) -> tuple[np.ndarray, int]:
    """Equal-frequency bin codes for a continuous vector.

    Bin edges sit at interior quantiles; a value equal to an edge goes to the
    lower bin. Duplicate edges collapse, and bins that end up empty are
    renumbered away, so the returned level count is the realized one (1 for a
    constant input).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("quantile_bin expects a non-empty 1-D array")
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    n_distinct = np.unique(values).size
    k = min(n_bins, n_distinct)
    if k == 1:
        return np.zeros(values.size, dtype=np.int64), 1
    probs = np.arange(1, k) / k
    edges = np.unique(np.quantile(values, probs))
    codes = np.searchsorted(edges, values, side="left").astype(np.int64)
    occupied, codes = np.unique(codes, return_inverse=True)
    return codes.astype(np.int64), int(occupied.size)


def quantile_bin(col: Column, n_bins: int = 4) -> Column:
    """Bin a continuous column into an equal-frequency categorical column."""
    if col.is_categorical:
        raise ValueError(f"column {col.name!r} is already categorical")
    codes, n_levels = quantile_bin_codes(col.values, n_bins)
    levels = tuple(str(i) for i in range(n_levels))
    return Column(col.name, categorical_kind(levels), codes)


def one_hot(col: Column) -> list[Column]:
    """Reference-coded indicators (levels[1:]) as continuous 0/1 columns.

    A single-level column encodes to nothing and returns an empty list.
    """
    if not col.is_categorical:
        raise ValueError(f"column {col.name!r} is not categorical")
    levels = col.kind.levels
    if len(levels) < 2:
        return []
    out = []
    for code, label in enumerate(levels):
        if code == 0:
            continue
        vals = (col.values == code).astype(np.float64)
        out.append(Column(f"{col.name}={label}", continuous_kind(), vals))
    return out


def _sorted_levels(raw: list[str]) -> list[str]:
    """Distinct labels ordered numerically when they all parse, else lexically."""
    distinct = sorted(set(raw))
    try:
        return sorted(distinct, key=lambda s: (float(s), s))
    except ValueError:
        return distinct


def _parse_float_column(cells: list[str]) -> np.ndarray | None:
    try:
        arr = np.array([float(c) for c in cells], dtype=np.float64)
    except ValueError:
        return None
    return arr


def load_table(
    path: str | Path,
    schema_hints: dict[str, str | ColumnKind] | None = None,
) -> DataTable:
    """Load a headered CSV into a DataTable.

    Typing is inferred per column: anything non-numeric is categorical, and
    numeric columns with few distinct values (<= 10) are categorical too.
    `schema_hints` maps column names to "continuous"/"categorical" (or a
    ColumnKind) and overrides inference. Ragged rows, empty cells, and
    non-finite numerics are rejected outright.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = rows[0]
    if any(not h for h in header) or len(set(header)) != len(header):
        raise ValueError(f"{path}: header names must be non-empty and distinct")
    body = rows[1:]
    if not body:
        raise ValueError(f"{path}: no data rows")
    width = len(header)
    for i, row in enumerate(body):
        if len(row) != width:
            raise ValueError(f"{path}: row {i + 2} has {len(row)} cells, expected {width}")
        if any(cell.strip() == "" for cell in row):
            raise ValueError(f"{path}: row {i + 2} has a missing value")

    hints: dict[str, str] = {}
    for name, hint in (schema_hints or {}).items():
        if name not in header:
            raise ValueError(f"schema hint for unknown column {name!r}")
        kind = hint.kind if isinstance(hint, ColumnKind) else str(hint)
        if kind not in (CONTINUOUS, CATEGORICAL):
            raise ValueError(f"schema hint for {name!r}: unknown kind {kind!r}")
        hints[name] = kind

    columns = []
    for j, name in enumerate(header):
        cells = [row[j].strip() for row in body]
        numeric = _parse_float_column(cells)
        hinted = hints.get(name)
        if hinted == CONTINUOUS:
            if numeric is None:
                raise ValueError(f"{path}: column {name!r} hinted continuous but not numeric")
            if not np.all(np.isfinite(numeric)):
                raise ValueError(f"{path}: column {name!r} has non-finite values")
            columns.append(Column(name, continuous_kind(), numeric))
            continue
        make_categorical = (
            hinted == CATEGORICAL
            or numeric is None
            or np.unique(numeric).size <= MAX_DISCRETE_LEVELS
        )
        if make_categorical:
            levels = _sorted_levels(cells)
            lookup = {label: code for code, label in enumerate(levels)}
            codes = np.array([lookup[c] for c in cells], dtype=np.int64)
            columns.append(Column(name, categorical_kind(tuple(levels)), codes))
        else:
            if not np.all(np.isfinite(numeric)):
                raise ValueError(f"{path}: column {name!r} has non-finite values")
            columns.append(Column(name, continuous_kind(), numeric))
    return DataTable(tuple(columns))


def write_table_csv(table: DataTable, path: str | Path) -> None:
    """Write a DataTable as a headered CSV (categoricals as level labels)."""
    path = Path(path)
    cols = []
    for col in table.columns:
        if col.is_categorical:
            labels = np.asarray(col.kind.levels, dtype=object)
            cols.append(labels[col.values])
        else:
            cols.append([repr(float(v)) for v in col.values])
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(table.names)
        writer.writerows(zip(*cols))
