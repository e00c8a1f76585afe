"""Random Fourier features for the Gaussian kernel.

A sampled map carries frequencies W (rows ~ N(0, I/sigma^2)) and phases
B ~ U[0, 2pi); applying it computes sqrt(2/d) * cos(x W^T + B), whose inner
products approximate exp(-||x - x'||^2 / (2 sigma^2)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

MEDIAN_HEURISTIC_MAX_ROWS = 500


@dataclass(frozen=True)
class FourierMap:
    """Frozen random map: (num_features, input_dim) frequencies plus phases."""

    weights: np.ndarray = field(repr=False)
    phases: np.ndarray = field(repr=False)
    bandwidth: float

    def __post_init__(self) -> None:
        if self.weights.ndim != 2:
            raise ValueError("weights must be 2-D (num_features, input_dim)")
        if self.phases.shape != (self.weights.shape[0],):
            raise ValueError("phases must match num_features")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    @property
    def num_features(self) -> int:
        return int(self.weights.shape[0])

    @property
    def input_dim(self) -> int:
        return int(self.weights.shape[1])


def median_bandwidth(x: np.ndarray, max_rows: int = MEDIAN_HEURISTIC_MAX_ROWS) -> float:
    """Median pairwise Euclidean distance over the first `max_rows` rows.

    Returns 1.0 when the median is zero (all subsampled points coincide) so
    the caller always gets a usable positive bandwidth.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("median_bandwidth expects a 2-D array with >= 2 rows")
    sub = x[: min(x.shape[0], max_rows)]
    med = float(np.median(pdist(sub)))
    return med if med > 0.0 else 1.0


def sample_fourier_map(
    input_dim: int, num_features: int, bandwidth: float, seed: int
) -> FourierMap:
    if input_dim < 1 or num_features < 1:
        raise ValueError("input_dim and num_features must be >= 1")
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    rng = np.random.default_rng(seed)
    weights = rng.normal(0.0, 1.0 / bandwidth, size=(num_features, input_dim))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=num_features)
    return FourierMap(weights, phases, float(bandwidth))


def apply_map(fmap: FourierMap, x: np.ndarray) -> np.ndarray:
    """Featurize rows of x: sqrt(2/d) * cos(x W^T + B), shape (n, d)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("apply_map expects a 2-D array")
    if x.shape[1] != fmap.input_dim:
        raise ValueError(
            f"input has {x.shape[1]} dims, map expects {fmap.input_dim}"
        )
    proj = x @ fmap.weights.T + fmap.phases
    return np.sqrt(2.0 / fmap.num_features) * np.cos(proj)
