"""Gradient-boosted trees for residualizing targets during selection.

Both objectives run through one Newton framework: per round, compute
gradients g and hessians h of the loss at the current score, grow one
depth-limited tree by exact greedy search on the variance-reduction gain
(g_L^2/h_L + g_R^2/h_R - g^2/h), and add its learning-rate-damped leaf values
(sum g / sum h per leaf) to the score. Squared error has h = 1, so leaves are
damped mean residuals; the logistic objective has g = y - p, h = p (1 - p).

Growth is level-synchronous: all open leaves of a level are scanned in one
kernel call (see mbselect.kernels). Exact greedy search has no randomness;
the seed in the params is recorded for provenance only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

SQUARED_ERROR = "squared_error"
LOGISTIC = "logistic"

LAM = 1e-12
# Strictly-positive gain floor: keeps float noise on constant-gradient nodes
# from manufacturing splits.
MIN_GAIN = 1e-12
LOGODDS_CLAMP = 10.0
# Raw logistic scores are clamped at prediction time so probabilities stay
# strictly inside (0, 1) even when training saturates.
SCORE_CLAMP = 20.0


@dataclass(frozen=True)
class EnsembleParams:
    n_trees: int = 200
    max_depth: int = 4
    learning_rate: float = 0.2
    min_samples_leaf: int = 20
    objective: str = SQUARED_ERROR
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.objective not in (SQUARED_ERROR, LOGISTIC):
            raise ValueError(f"unknown objective {self.objective!r}")


def regression_defaults(seed: int = 0) -> EnsembleParams:
    return EnsembleParams(n_trees=200, max_depth=4, objective=SQUARED_ERROR, seed=seed)


def classification_defaults(seed: int = 0) -> EnsembleParams:
    return EnsembleParams(n_trees=300, max_depth=5, objective=LOGISTIC, seed=seed)


@dataclass(frozen=True)
class Tree:
    """Flat array tree; feature -1 marks a leaf. Leaf values are damped."""

    feature: np.ndarray = field(repr=False)
    threshold: np.ndarray = field(repr=False)
    left: np.ndarray = field(repr=False)
    right: np.ndarray = field(repr=False)
    value: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.feature < 0))


@dataclass(frozen=True)
class FittedEnsemble:
    params: EnsembleParams
    feature_names: tuple[str, ...]
    base_score: float
    trees: tuple[Tree, ...]
    train_loss: tuple[float, ...]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return predict(self, X)

    def residuals(self, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        return residuals(self, X, y)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _loss(y: np.ndarray, score: np.ndarray, objective: str) -> float:
    if objective == SQUARED_ERROR:
        return float(np.mean((y - score) ** 2))
    return float(np.mean(np.logaddexp(0.0, score) - y * score))


def _base_score(y: np.ndarray, objective: str) -> float:
    if objective == SQUARED_ERROR:
        return float(np.mean(y))
    p = float(np.mean(y))
    if p <= 0.0:
        return -LOGODDS_CLAMP
    if p >= 1.0:
        return LOGODDS_CLAMP
    return float(np.clip(np.log(p / (1.0 - p)), -LOGODDS_CLAMP, LOGODDS_CLAMP))


def _grow_tree(X, sorted_idx, g, h, params: EnsembleParams) -> Tree:
    n = X.shape[0]
    feature = [-1]
    threshold = [0.0]
    left = [-1]
    right = [-1]
    value = [0.0]
    row_slot = np.zeros(n, dtype=np.int32)
    slot_node = [0]

    for depth in range(params.max_depth + 1):
        n_active = len(slot_node)
        bg, bf, bt, tg, th, _ = kernels.best_splits(
            X, sorted_idx, row_slot, g, h, n_active, params.min_samples_leaf
        )
        can_split = (bf >= 0) & (bg > MIN_GAIN) & (depth < params.max_depth)
        child_base = np.full(n_active, -1, dtype=np.int64)
        new_slot_node: list[int] = []
        for s in range(n_active):
            node = slot_node[s]
            if can_split[s]:
                feature[node] = int(bf[s])
                threshold[node] = float(bt[s])
                left[node] = len(feature)
                right[node] = len(feature) + 1
                child_base[s] = len(new_slot_node)
                new_slot_node.extend((len(feature), len(feature) + 1))
                feature.extend((-1, -1))
                threshold.extend((0.0, 0.0))
                left.extend((-1, -1))
                right.extend((-1, -1))
                value.extend((0.0, 0.0))
            else:
                value[node] = params.learning_rate * tg[s] / (th[s] + LAM)
        if not new_slot_node:
            break
        rows = np.flatnonzero(row_slot >= 0)
        slots = row_slot[rows]
        splitting = can_split[slots]
        sp_rows = rows[splitting]
        sp_slots = slots[splitting]
        go_left = X[sp_rows, bf[sp_slots]] <= bt[sp_slots]
        next_slot = np.full(n, -1, dtype=np.int32)
        next_slot[sp_rows] = child_base[sp_slots] + np.where(go_left, 0, 1)
        row_slot = next_slot
        slot_node = new_slot_node

    return Tree(
        np.asarray(feature, dtype=np.int32),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int32),
        np.asarray(right, dtype=np.int32),
        np.asarray(value, dtype=np.float64),
    )


def _pack(trees: tuple[Tree, ...]):
    offsets = np.zeros(len(trees) + 1, dtype=np.int64)
    for i, t in enumerate(trees):
        offsets[i + 1] = offsets[i] + t.n_nodes
    feature = np.concatenate([t.feature for t in trees])
    threshold = np.concatenate([t.threshold for t in trees])
    shift = np.repeat(offsets[:-1], [t.n_nodes for t in trees]).astype(np.int32)
    left = np.concatenate([t.left for t in trees]) + shift
    right = np.concatenate([t.right for t in trees]) + shift
    value = np.concatenate([t.value for t in trees])
    return feature, threshold, left, right, value, offsets


def _validate_xy(X: np.ndarray, y: np.ndarray | None, objective: str | None):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("X must be 2-D with at least one column")
    if not np.all(np.isfinite(X)):
        raise ValueError("X has non-finite values")
    if y is None:
        return X, None
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise ValueError("y must be 1-D and row-aligned with X")
    if not np.all(np.isfinite(y)):
        raise ValueError("y has non-finite values")
    if objective == LOGISTIC and not np.all(np.isin(y, (0.0, 1.0))):
        raise ValueError("logistic objective needs y in {0, 1}")
    return X, y


def fit(
    X: np.ndarray,
    y: np.ndarray,
    params: EnsembleParams | None = None,
    feature_names: tuple[str, ...] | None = None,
) -> FittedEnsemble:
    params = params or regression_defaults()
    X, y = _validate_xy(X, y, params.objective)
    n, p = X.shape
    if n < 2:
        raise ValueError("need at least 2 rows")
    if feature_names is None:
        feature_names = tuple(f"x{j}" for j in range(p))
    if len(feature_names) != p:
        raise ValueError("feature_names length must match X columns")

    sorted_idx = np.ascontiguousarray(
        np.argsort(X, axis=0, kind="stable").T.astype(np.int32)
    )
    base = _base_score(y, params.objective)
    score = np.full(n, base)
    trees: list[Tree] = []
    losses: list[float] = []
    for _ in range(params.n_trees):
        if params.objective == LOGISTIC:
            prob = _sigmoid(score)
            g = y - prob
            h = prob * (1.0 - prob)
        else:
            g = y - score
            h = np.ones(n)
        tree = _grow_tree(X, sorted_idx, g, h, params)
        packed = _pack((tree,))
        score = score + kernels.predict_forest(*packed, X)
        trees.append(tree)
        losses.append(_loss(y, score, params.objective))
    return FittedEnsemble(params, feature_names, base, tuple(trees), tuple(losses))


def raw_score(model: FittedEnsemble, X: np.ndarray) -> np.ndarray:
    X, _ = _validate_xy(X, None, None)
    if X.shape[1] != len(model.feature_names):
        raise ValueError("X column count differs from the fitted model")
    packed = _pack(model.trees)
    return model.base_score + kernels.predict_forest(*packed, X)


def predict(model: FittedEnsemble, X: np.ndarray) -> np.ndarray:
    """Mean prediction (probability of class 1 under the logistic objective)."""
    score = raw_score(model, X)
    if model.params.objective == LOGISTIC:
        return _sigmoid(np.clip(score, -SCORE_CLAMP, SCORE_CLAMP))
    return score


def residuals(model: FittedEnsemble, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """y minus predicted mean; continuous for both objectives."""
    X2, y = _validate_xy(X, y, None)
    return y - predict(model, X2)
