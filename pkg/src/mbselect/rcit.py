"""Randomized conditional independence test on Fourier features.

The statistic is n * ||Cov(res A, res B)||_F^2 where A, B are random Fourier
featurizations of (x, z) and y, and res(.) removes the ridge-regression fit on
the featurized conditioning set. Under the null the statistic is a weighted
sum of chi-square(1) variables; the weights are eigenvalues of the empirical
covariance of the per-row residual outer products, and three interchangeable
tail approximations are provided.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import stats
from scipy.spatial.distance import pdist

from .data import standardize
from .result import CITestResult
from .rff import MEDIAN_HEURISTIC_MAX_ROWS, apply_map, sample_fourier_map

MIN_ROWS = 50

# Median heuristic is declared degenerate when the median pairwise distance
# falls below this fraction of the root-mean-square distance.
DEGENERATE_MEDIAN_RATIO = 0.25

GAMMA_TWO_MOMENT = "gamma2"
GAMMA_THREE_MOMENT = "gamma3"
MONTE_CARLO = "montecarlo"

_NULL_METHODS = (GAMMA_TWO_MOMENT, GAMMA_THREE_MOMENT, MONTE_CARLO)

# Eigenvalues from a PSD covariance can come out of eigvalsh a hair negative.
_EIG_TOL = 1e-10

_MC_BATCH = 256


@dataclass(frozen=True)
class RcitParams:
    """Knobs for one test invocation.

    `d_total` overrides the conditioning-set feature count outright; when None
    the count is max(d_min, d_per_cond_var * n_conditioners). All randomness
    (three Fourier maps plus the Monte Carlo null, when used) derives from
    `seed`.
    """

    m: int = 5
    q: int = 5
    d_per_cond_var: int = 20
    d_min: int = 25
    d_total: int | None = None
    ridge: float = 1e-8
    null_method: str = GAMMA_THREE_MOMENT
    mc_samples: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1 or self.q < 1:
            raise ValueError("m and q must be >= 1")
        if self.d_per_cond_var < 1 or self.d_min < 1:
            raise ValueError("feature counts must be >= 1")
        if self.d_total is not None and self.d_total < 1:
            raise ValueError("d_total must be >= 1")
        if not self.ridge > 0:
            raise ValueError("ridge must be positive")
        if self.null_method not in _NULL_METHODS:
            raise ValueError(f"null_method must be one of {_NULL_METHODS}")
        if self.mc_samples < 100:
            raise ValueError("mc_samples must be >= 100")

    def cond_features(self, n_cond: int) -> int:
        if self.d_total is not None:
            return self.d_total
        return max(self.d_min, self.d_per_cond_var * n_cond)


def weighted_chisq_pvalue(
    eigenvalues: np.ndarray,
    statistic: float,
    method: str = GAMMA_THREE_MOMENT,
    mc_samples: int = 100_000,
    rng: np.random.Generator | None = None,
) -> float:
    """Upper-tail probability of sum_k lambda_k * chisq_1 at `statistic`.

    gamma2 matches mean and variance to a gamma; gamma3 is the
    Hall-Buckley-Eagleson three-moment chi-square match; montecarlo simulates
    the sum directly with the add-one estimator (count + 1) / (draws + 1).
    """
    lam = np.asarray(eigenvalues, dtype=np.float64).ravel()
    if lam.size == 0:
        return 1.0
    if lam.min() < -_EIG_TOL:
        raise ValueError("negative eigenvalue in null weights")
    lam = np.clip(lam, 0.0, None)
    lam = lam[lam > 0.0]
    if lam.size == 0:
        return 1.0
    if statistic <= 0.0:
        return 1.0
    if method == GAMMA_TWO_MOMENT:
        mean = lam.sum()
        var = 2.0 * np.square(lam).sum()
        shape = mean * mean / var
        scale = var / mean
        return float(stats.gamma.sf(statistic, a=shape, scale=scale))
    if method == GAMMA_THREE_MOMENT:
        k1 = lam.sum()
        k2 = 2.0 * np.square(lam).sum()
        k3 = 8.0 * np.power(lam, 3).sum()
        nu = 8.0 * k2**3 / k3**2
        x = np.sqrt(2.0 * nu / k2) * (statistic - k1) + nu
        return float(min(1.0, stats.chi2.sf(x, df=nu)))
    if method == MONTE_CARLO:
        if rng is None:
            rng = np.random.default_rng(0)
        exceed = 0
        done = 0
        while done < mc_samples:
            batch = min(_MC_BATCH, mc_samples - done)
            draws = rng.chisquare(1.0, size=(batch, lam.size)) @ lam
            exceed += int(np.count_nonzero(draws >= statistic))
            done += batch
        return float((exceed + 1) / (mc_samples + 1))
    raise ValueError(f"unknown null method {method!r}")


def _as_matrix(x: np.ndarray, label: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"{label} must be 1-D or 2-D")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{label} has non-finite values")
    return x


def _standardize_columns(x: np.ndarray) -> np.ndarray:
    """Column-standardize, silently dropping constant columns."""
    keep = []
    for j in range(x.shape[1]):
        col = x[:, j]
        if np.all(col == col[0]):
            continue
        keep.append(standardize(col).values)
    if not keep:
        return np.empty((x.shape[0], 0))
    return np.column_stack(keep)


def _map_bandwidth(x: np.ndarray) -> float:
    """Median pairwise distance, with a clustered-input fallback.

    Residuals of a rare-event classifier pile almost every row into one tight
    cluster; the median then measures within-cluster jitter and the Fourier
    frequencies oscillate far too fast to resolve the cluster structure. When
    the median sits well below the root-mean-square distance, half the 99th
    percentile tracks the between-cluster scale instead.
    """
    sub = np.asarray(x, dtype=np.float64)[:MEDIAN_HEURISTIC_MAX_ROWS]
    dists = pdist(sub)
    med = float(np.median(dists))
    if med <= 0.0:
        return 1.0
    rms = float(np.sqrt(np.mean(np.square(dists))))
    if med < DEGENERATE_MEDIAN_RATIO * rms:
        return 0.5 * float(np.percentile(dists, 99))
    return med


def _center(x: np.ndarray) -> np.ndarray:
    return x - x.mean(axis=0)


def _ridge_residuals(feats: np.ndarray, cond: np.ndarray, ridge: float) -> np.ndarray:
    n = cond.shape[0]
    gram = cond.T @ cond + ridge * n * np.eye(cond.shape[1])
    coef = np.linalg.solve(gram, cond.T @ feats)
    return feats - cond @ coef


def _trivial_result(n: int, method: dict) -> CITestResult:
    return CITestResult(0.0, 1.0, np.empty(0), n, method)


def rcit(
    x: np.ndarray,
    y: np.ndarray,
    z: np.ndarray | None,
    params: RcitParams = RcitParams(),
) -> CITestResult:
    """Test x independent of y given z (z empty or None for marginal).

    Inputs are raw columns (1-D or 2-D, rows aligned); each non-constant
    column is standardized before featurization. An x or y with no varying
    columns is vacuously independent (p = 1).
    """
    x = _as_matrix(x, "x")
    y = _as_matrix(y, "y")
    n = x.shape[0]
    if y.shape[0] != n:
        raise ValueError("x and y row counts differ")
    if z is None:
        z = np.empty((n, 0))
    z = _as_matrix(z, "z") if z.size else np.asarray(z, dtype=np.float64).reshape(n, 0)
    if z.shape[0] != n:
        raise ValueError("z row count differs")
    if n < MIN_ROWS:
        raise ValueError(f"rcit needs at least {MIN_ROWS} rows, got {n}")

    xs = _standardize_columns(x)
    ys = _standardize_columns(y)
    zs = _standardize_columns(z)
    n_cond = zs.shape[1]
    d = params.cond_features(n_cond) if n_cond else 0
    method = {
        "test": "rcit" if n_cond else "rit",
        "null": params.null_method,
        "m": params.m,
        "q": params.q,
        "d": d,
    }
    if xs.shape[1] == 0 or ys.shape[1] == 0:
        return _trivial_result(n, method)

    rng = np.random.default_rng(params.seed)
    seeds = rng.integers(0, 2**63 - 1, size=4)

    xz = np.column_stack([xs, zs]) if n_cond else xs
    map_a = sample_fourier_map(xz.shape[1], params.m, _map_bandwidth(xz), int(seeds[0]))
    map_b = sample_fourier_map(ys.shape[1], params.q, _map_bandwidth(ys), int(seeds[1]))
    feats_a = _center(apply_map(map_a, xz))
    feats_b = _center(apply_map(map_b, ys))

    if n_cond:
        map_c = sample_fourier_map(n_cond, d, _map_bandwidth(zs), int(seeds[2]))
        feats_c = _center(apply_map(map_c, zs))
        res_a = _ridge_residuals(feats_a, feats_c, params.ridge)
        res_b = _ridge_residuals(feats_b, feats_c, params.ridge)
    else:
        res_a = feats_a
        res_b = feats_b

    cross = res_a.T @ res_b / (n - 1)
    statistic = float(n * np.sum(cross * cross))

    # Null weights: eigenvalues of the covariance of vec(res_a_i res_b_i^T).
    prods = (res_a[:, :, None] * res_b[:, None, :]).reshape(n, -1)
    prods = _center(prods)
    cov = prods.T @ prods / (n - 1)
    eigenvalues = np.linalg.eigvalsh(cov)
    eigenvalues = np.clip(eigenvalues, 0.0, None)

    mc_rng = np.random.default_rng(int(seeds[3]))
    p_value = weighted_chisq_pvalue(
        eigenvalues, statistic, params.null_method, params.mc_samples, mc_rng
    )
    return CITestResult(statistic, p_value, eigenvalues, n, method)


def rit(x: np.ndarray, y: np.ndarray, params: RcitParams = RcitParams()) -> CITestResult:
    """Marginal (unconditional) variant of `rcit`."""
    return rcit(x, y, None, params)


def with_seed(params: RcitParams, seed: int) -> RcitParams:
    return replace(params, seed=seed)
