"""Synthetic benchmark datasets with known Markov boundaries.

Two families share a 2-3 block covariance base (blocks of sizes 2,3,2,3,...
with within-block correlation rho): a linear-with-interactions design whose
response has 21 parents and one child, and a complex design mixing
categorical recodes, local nonlinearities, two children, and four spouse
variables feeding the second child. Every generated table carries its
ground-truth boundary and per-variable roles for scoring.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import (
    Column,
    DataTable,
    categorical_kind,
    continuous_kind,
    quantile_bin_codes,
)

KIND_LINEAR = "linear_interactions"
KIND_COMPLEX = "complex"
RESPONSE_CONTINUOUS = "continuous"
RESPONSE_BINARY = "binary"

PARENT = "parent"
CHILD = "child"
SPOUSE = "spouse"
NOISE = "noise"

# Documented conventions for dependence strengths the design leaves open.
PAIR_HIGH = 0.8
PAIR_LOW = 0.2
MIXTURE_MEANS = (-2.0, 0.0, 2.0)
LOGISTIC_SLOPE = 1.0

_LINEAR_PARENT_OFFSETS = (0, 1, 2, 3, 4, 5, 7)
_LINEAR_BLOCK_WEIGHTS = ((0, 1.0), (10, 0.7), (20, 0.4))

_COMPLEX_PARENTS = (0, 1, 2, 5, 6, 7, 8, 11, 13, 15, 31, 32, 35, 37, 41, 43)
_COMPLEX_SPOUSES = (20, 22, 23, 25)
_COMPLEX_CATEGORICAL = {
    11: 4,
    12: 2,
    15: 3,
    30: 2,
    31: 2,
    32: 2,
    33: 2,
    36: 2,
    37: 3,
    40: 3,
}


@dataclass(frozen=True)
class SimSpec:
    kind: str
    rho: float = 0.5
    n: int = 5000
    response: str = RESPONSE_CONTINUOUS
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in (KIND_LINEAR, KIND_COMPLEX):
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must be in [0, 1)")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.response not in (RESPONSE_CONTINUOUS, RESPONSE_BINARY):
            raise ValueError(f"unknown response type {self.response!r}")


@dataclass(frozen=True)
class SimData:
    table: DataTable
    true_mb: frozenset
    dag_roles: dict = field(repr=False)


def block_sizes(p: int) -> list[int]:
    """Alternating 2,3,2,3,... block sizes covering p (last one truncated)."""
    sizes = []
    covered = 0
    next_size = 2
    while covered < p:
        size = min(next_size, p - covered)
        sizes.append(size)
        covered += size
        next_size = 5 - next_size
    return sizes


def block_covariance(p: int, rho: float) -> np.ndarray:
    """Block-diagonal equicorrelation covariance with the 2-3 block layout."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must be in [0, 1)")
    cov = np.zeros((p, p))
    start = 0
    for size in block_sizes(p):
        cov[start : start + size, start : start + size] = rho
        start += size
    np.fill_diagonal(cov, 1.0)
    return cov


def sample_block_gaussian(n: int, p: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    chol = np.linalg.cholesky(block_covariance(p, rho))
    return rng.standard_normal((n, p)) @ chol.T


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def dependent_binary_pair(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """(U, V) with U ~ Ber(0.5) and P(V=1 | U) in {0.2, 0.8}."""
    u = (rng.random(n) < 0.5).astype(np.int64)
    prob = np.where(u == 1, PAIR_HIGH, PAIR_LOW)
    v = (rng.random(n) < prob).astype(np.int64)
    return u, v


def mixture_normal(codes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Normal draws whose mean (-2, 0, or 2) follows a 3-level code."""
    means = np.asarray(MIXTURE_MEANS)[codes]
    return means + rng.standard_normal(codes.size)


def _linear_signal(x: np.ndarray) -> np.ndarray:
    total = np.zeros(x.shape[0])
    for offset, weight in _LINEAR_BLOCK_WEIGHTS:
        o = offset
        block = (
            0.6 * x[:, o]
            + 0.6 * x[:, o + 1]
            - 0.51 * x[:, o + 2]
            + 0.57 * x[:, o + 3]
            - 0.57 * x[:, o + 4]
            - 0.57 * x[:, o + 5]
            + 0.57 * x[:, o + 7]
            + 0.57 * x[:, o] * x[:, o + 1]
            + 0.6 * x[:, o + 2] * x[:, o + 3]
        )
        total += weight * block
    return total


def gen_linear(spec: SimSpec) -> SimData:
    """Linear-with-interactions design: 51 covariates (x0..x50) plus y."""
    if spec.kind != KIND_LINEAR:
        raise ValueError("gen_linear needs a linear_interactions spec")
    rng = np.random.default_rng(spec.seed)
    x = sample_block_gaussian(spec.n, 50, spec.rho, rng)
    signal = _linear_signal(x)
    binary = spec.response == RESPONSE_BINARY
    if binary:
        score = -7.75 + signal + rng.standard_normal(spec.n)
        y = (rng.random(spec.n) < _sigmoid(score)).astype(np.float64)
    else:
        y = signal + rng.standard_normal(spec.n)
    x50 = 0.2 * y + rng.standard_normal(spec.n)

    columns = [Column(f"x{j}", continuous_kind(), x[:, j]) for j in range(50)]
    columns.append(Column("x50", continuous_kind(), x50))
    if binary:
        columns.append(Column("y", categorical_kind(("0", "1")), y.astype(np.int64)))
    else:
        columns.append(Column("y", continuous_kind(), y))

    parents = {f"x{o + off}" for o, _ in _LINEAR_BLOCK_WEIGHTS for off in _LINEAR_PARENT_OFFSETS}
    roles = {f"x{j}": NOISE for j in range(51)}
    roles.update({name: PARENT for name in parents})
    roles["x50"] = CHILD
    true_mb = frozenset(parents | {"x50"})
    return SimData(DataTable(tuple(columns)), true_mb, roles)


def _complex_signal(cols: dict[int, np.ndarray]) -> np.ndarray:
    x = cols
    return (
        0.65 * np.log(np.abs(x[0] + 0.5 * x[1] + 0.75 * x[2]))
        - 0.45 * x[0] ** 2 * x[5]
        + np.abs(x[1] * x[2] * x[6])
        + 2.0 * x[7] * (np.abs(x[7]) > 2)
        + 1.25 * x[7] * x[8] * (x[8] < -1)
        + 0.5 * np.log(1.0 + x[11])
        + 0.75 * x[13]
        + 0.5 * (x[15] != 1)
        - 0.2 * (x[15] == 2)
        + np.log(1.0 + x[31])
        + 0.75 * x[32]
        + 0.75 * x[35]
        + 0.5 * (x[37] != 1)
        - 0.2 * (x[37] == 1)
        + 0.75 * x[41]
        + 0.75 * np.abs(x[43])
    )


def gen_complex(spec: SimSpec) -> SimData:
    """Complex mixed-type design: 52 covariates (x0..x51) plus y.

    Categorical recodes follow the design notes: x11 is the realized quartile
    of x10; x12 ~ Ber(0.7) gates x13 to zero; x15, x37, x40 are fresh 3-level
    (x15) or mixture-driving (x37, x40) categoricals; (x30, x31) and
    (x32, x33) are dependent binary pairs; x36 is Bernoulli through a
    logistic in x35.
    """
    if spec.kind != KIND_COMPLEX:
        raise ValueError("gen_complex needs a complex spec")
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    base = sample_block_gaussian(n, 50, spec.rho, rng)
    vals: dict[int, np.ndarray] = {j: base[:, j] for j in range(50)}

    vals[11], _ = quantile_bin_codes(vals[10], 4)
    vals[12] = (rng.random(n) < 0.7).astype(np.int64)
    vals[13] = np.where(vals[12] == 1, vals[13], 0.0)
    vals[15] = rng.integers(0, 3, size=n)
    vals[30], vals[31] = dependent_binary_pair(n, rng)
    vals[32], vals[33] = dependent_binary_pair(n, rng)
    vals[36] = (rng.random(n) < _sigmoid(LOGISTIC_SLOPE * vals[35])).astype(np.int64)
    vals[37] = rng.integers(0, 3, size=n)
    vals[38] = mixture_normal(vals[37], rng)
    vals[40] = rng.integers(0, 3, size=n)
    vals[41] = mixture_normal(vals[40], rng)

    signal = _complex_signal({j: vals[j].astype(np.float64) for j in vals})
    binary = spec.response == RESPONSE_BINARY
    if binary:
        y = (rng.random(n) < _sigmoid(-5.0 + signal)).astype(np.float64)
        x50 = 0.2 * y + np.sqrt(0.5) * rng.standard_normal(n)
    else:
        y = signal + rng.standard_normal(n)
        x50 = 0.2 * np.abs(y) + np.sqrt(0.5) * rng.standard_normal(n)
    x51 = (
        0.4 * y
        + np.abs(vals[20])
        - 2.0 * np.log(1.0 + np.abs(vals[22]))
        + np.exp(0.5 * vals[23])
        + 3.51 / (1.0 + np.abs(vals[25]))
        + np.sqrt(0.1) * rng.standard_normal(n)
    )

    columns = []
    for j in range(50):
        name = f"x{j}"
        if j in _COMPLEX_CATEGORICAL:
            levels = tuple(str(v) for v in range(_COMPLEX_CATEGORICAL[j]))
            columns.append(Column(name, categorical_kind(levels), vals[j]))
        else:
            columns.append(Column(name, continuous_kind(), vals[j]))
    columns.append(Column("x50", continuous_kind(), x50))
    columns.append(Column("x51", continuous_kind(), x51))
    if binary:
        columns.append(Column("y", categorical_kind(("0", "1")), y.astype(np.int64)))
    else:
        columns.append(Column("y", continuous_kind(), y))

    parents = {f"x{j}" for j in _COMPLEX_PARENTS}
    spouses = {f"x{j}" for j in _COMPLEX_SPOUSES}
    roles = {f"x{j}": NOISE for j in range(52)}
    roles.update({name: PARENT for name in parents})
    roles.update({name: SPOUSE for name in spouses})
    roles["x50"] = CHILD
    roles["x51"] = CHILD
    true_mb = frozenset(parents | spouses | {"x50", "x51"})
    return SimData(DataTable(tuple(columns)), true_mb, roles)


def generate(spec: SimSpec) -> SimData:
    if spec.kind == KIND_LINEAR:
        return gen_linear(spec)
    return gen_complex(spec)
