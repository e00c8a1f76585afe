"""Multi-group Markov-boundary selection with cross-group residualization.

Candidates are partitioned into small groups (categoricals together, tested
last). Each outer pass visits every group: the target is residualized with a
tree ensemble fitted on the other groups' current selections, the group is
screened against selections of the other column kind, and FBED runs inside
the group with the kind-appropriate conditional independence test (Fourier
test for continuous members, stratified chi-square for categorical members
with a quartile-binned target). A group's selection is replaced wholesale
each pass; the loop stops when a full pass leaves the union unchanged.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from . import boosting
from .boosting import EnsembleParams, classification_defaults, regression_defaults
from .chisq import chisq_conditional, chisq_marginal, mixed_marginal
from .data import Column, DataTable, continuous_kind, one_hot, quantile_bin
from .fbed import FbedConfig, SelectionTrace, fbed
from .grouping import GroupPartition, partition, partition_from_lists
from .rcit import RcitParams, rcit
from .result import CITestResult

CATEGORICAL_GROUP_ID = "cat"
RESIDUAL_NAME = "__residual__"

# Folds for cross-fitted residuals (rows are scored out-of-fold).
CROSS_FIT_FOLDS = 5

# Spacing for per-call test seeds derived from the run seed; a run issues far
# fewer tests than this, so distinct run seeds never share test seeds.
_SEED_STRIDE = 1_000_003


@dataclass(frozen=True)
class MultiGroupConfig:
    group_threshold: float = 0.2
    max_group_size: int = 5
    alpha: float = 1e-4
    fbed_k: int = 1
    max_outer_iterations: int = 10
    pack_singletons: bool = True
    rcit_params: RcitParams = field(default_factory=RcitParams)
    ensemble_params_regression: EnsembleParams = field(default_factory=regression_defaults)
    ensemble_params_classification: EnsembleParams = field(default_factory=classification_defaults)
    prespecified_groups: tuple[tuple[str, ...], ...] | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be >= 1")
        if self.fbed_k < 0:
            raise ValueError("fbed_k must be >= 0")


@dataclass
class SelectionState:
    mb_set: frozenset
    per_group_selected: dict[str, tuple[str, ...]]
    outer_iteration: int
    converged: bool
    traces: dict[str, SelectionTrace]
    partition: GroupPartition

    def __post_init__(self) -> None:
        union = {name for sel in self.per_group_selected.values() for name in sel}
        if union != set(self.mb_set):
            raise ValueError("mb_set must equal the union of group selections")


class _SeedStream:
    """Deterministic per-call seeds for the randomized tests in one run."""

    def __init__(self, base: int):
        self._base = int(base) * _SEED_STRIDE
        self._count = 0

    def next(self) -> int:
        seed = self._base + self._count
        self._count += 1
        return seed


def _state_seed(run_seed: int, tag: str, names: tuple[str, ...]) -> int:
    """Seed derived from the visited selection state, not the call sequence.

    Keying test seeds on (group, other-group selections) means a revisited
    state reproduces its decisions exactly; borderline p-values cannot flip
    from fresh Fourier draws alone, so the outer loop can actually converge.
    """
    text = repr((int(run_seed), tag, names)).encode()
    return zlib.crc32(text)


def _dependent(result: CITestResult, alpha: float) -> bool:
    return not result.data_insufficient and result.p_value < alpha


def _is_binary_target(col: Column) -> bool:
    return col.is_categorical and len(col.kind.levels) == 2


def _target_vector(col: Column) -> np.ndarray:
    if col.is_categorical:
        if len(col.kind.levels) != 2:
            raise ValueError(
                f"categorical target {col.name!r} must have exactly 2 levels"
            )
        return col.values.astype(np.float64)
    return col.values


def _design_matrix(table: DataTable, names: list[str]):
    arrays = []
    feature_names: list[str] = []
    for name in names:
        col = table.column(name)
        if col.is_categorical:
            for ind in one_hot(col):
                arrays.append(ind.values)
                feature_names.append(ind.name)
        else:
            arrays.append(col.values)
            feature_names.append(name)
    if not arrays:
        return None, ()
    return np.column_stack(arrays), tuple(feature_names)


def residual_target(
    table: DataTable,
    selected: list[str] | tuple[str, ...],
    target: Column,
    config: MultiGroupConfig,
    seed: int = 0,
) -> Column:
    """Continuous residual column y - yhat after fitting on `selected`.

    Binary (two-level categorical) targets use the logistic objective and
    subtract the predicted probability; anything else is squared-error.
    Predictions are cross-fitted (each row scored by a model trained on the
    other folds), so the ensemble cannot cancel signal it merely memorized.
    """
    if not selected:
        raise ValueError("residual_target needs a non-empty selection")
    X, feature_names = _design_matrix(table, list(selected))
    y = _target_vector(target)
    if X is None:
        # Selected columns encode to nothing (single-level categoricals).
        return Column(RESIDUAL_NAME, continuous_kind(), y - y.mean())
    if _is_binary_target(target):
        base = config.ensemble_params_classification
    else:
        base = config.ensemble_params_regression
    n = y.shape[0]
    folds = min(CROSS_FIT_FOLDS, n)
    predicted = np.empty(n, dtype=np.float64)
    for fold in range(folds):
        held = np.arange(fold, n, folds)
        train = np.ones(n, dtype=bool)
        train[held] = False
        model = boosting.fit(
            X[train], y[train], replace(base, seed=seed + fold), feature_names
        )
        predicted[held] = boosting.predict(model, X[held])
    return Column(RESIDUAL_NAME, continuous_kind(), y - predicted)


def _binned_target(temp: Column) -> Column:
    return temp if temp.is_categorical else quantile_bin(temp, 4)


def screen_group(
    group: list[str] | tuple[str, ...],
    kind: str,
    selected_other_kind: list[str] | tuple[str, ...],
    temp_target: Column,
    table: DataTable,
    alpha: float,
    rcit_params: RcitParams = RcitParams(),
    seed_stream: _SeedStream | None = None,
) -> list[str]:
    """Drop group members already explained by the other kind's selections.

    For each member X and each selected Z of the other kind: when X and Z are
    marginally dependent, test X against the temporary target given Z
    (chi-square on quartile-binned Z for categorical X, Fourier test on
    one-hot Z for continuous X); an accepted independence drops X for this
    pass only.
    """
    if kind not in ("categorical", "continuous"):
        raise ValueError("kind must be 'categorical' or 'continuous'")
    if not selected_other_kind:
        return list(group)
    stream = seed_stream or _SeedStream(rcit_params.seed)
    temp_binned = _binned_target(temp_target)
    temp_values = (
        temp_target.values.astype(np.float64)
        if temp_target.is_categorical
        else temp_target.values
    )
    retained = []
    for x_name in group:
        x_col = table.column(x_name)
        dropped = False
        for z_name in selected_other_kind:
            z_col = table.column(z_name)
            if x_col.is_categorical and z_col.is_categorical:
                marginal = chisq_marginal(x_col, z_col)
            elif x_col.is_categorical:
                marginal = mixed_marginal(x_col, z_col)
            elif z_col.is_categorical:
                marginal = mixed_marginal(z_col, x_col)
            else:
                marginal = rcit(
                    x_col.values, z_col.values, None, replace(rcit_params, seed=stream.next())
                )
            if not _dependent(marginal, alpha):
                continue
            if x_col.is_categorical:
                z_binned = z_col if z_col.is_categorical else quantile_bin(z_col, 4)
                conditional = chisq_conditional(x_col, temp_binned, [z_binned])
            else:
                z_enc = (
                    np.column_stack([c.values for c in one_hot(z_col)])
                    if z_col.is_categorical
                    else z_col.values
                )
                conditional = rcit(
                    x_col.values,
                    temp_values,
                    z_enc,
                    replace(rcit_params, seed=stream.next()),
                )
            if not _dependent(conditional, alpha):
                dropped = True
                break
        if not dropped:
            retained.append(x_name)
    return retained


def _make_rcit_tester(table, members, temp_values, rcit_params, stream):
    cache = {name: table.column(name).values for name in members}

    def tester(name: str, cond: tuple[str, ...]) -> CITestResult:
        z = np.column_stack([cache[c] for c in cond]) if cond else None
        return rcit(cache[name], temp_values, z, replace(rcit_params, seed=stream.next()))

    return tester


def _make_chisq_tester(table, members, temp_binned):
    cache = {name: table.column(name) for name in members}

    def tester(name: str, cond: tuple[str, ...]) -> CITestResult:
        return chisq_conditional(cache[name], temp_binned, [cache[c] for c in cond])

    return tester


def _build_partition(table, candidates, config) -> GroupPartition:
    if config.prespecified_groups is not None:
        cats = [n for n in candidates if table.column(n).is_categorical]
        listed = {n for g in config.prespecified_groups for n in g}
        missing = listed - set(candidates)
        if missing:
            raise ValueError(f"prespecified group names not among candidates: {sorted(missing)}")
        return partition_from_lists(table, [list(g) for g in config.prespecified_groups], cats)
    return partition(
        table,
        candidates,
        config.group_threshold,
        config.max_group_size,
        config.pack_singletons,
    )


def _run(table: DataTable, target: str, config: MultiGroupConfig, allow_categorical: bool):
    target_col = table.column(target)
    candidates = [c.name for c in table.columns if c.name != target]
    if not candidates:
        raise ValueError("no candidate columns besides the target")
    categorical = [n for n in candidates if table.column(n).is_categorical]
    if categorical and not allow_categorical:
        raise ValueError(
            f"categorical candidates {categorical[:3]}...: run_m2 is continuous-only, use run_m3"
        )
    y = _target_vector(target_col)
    order = {name: i for i, name in enumerate(table.names)}

    part = _build_partition(table, candidates, config)
    groups: list[tuple[str, tuple[str, ...]]] = [
        (f"g{i}", g) for i, g in enumerate(part.continuous_groups)
    ]
    if part.categorical_group:
        groups.append((CATEGORICAL_GROUP_ID, part.categorical_group))

    selected: dict[str, tuple[str, ...]] = {gid: () for gid, _ in groups}
    traces: dict[str, SelectionTrace] = {}
    fbed_config = FbedConfig(k=config.fbed_k, alpha=config.alpha)
    # Residuals are deterministic given the fitted-on selection, and late
    # passes revisit the same selections, so fits are cached by selection.
    residual_cache: dict[tuple[str, ...], Column] = {}
    converged = False
    outer = 0

    for outer in range(1, config.max_outer_iterations + 1):
        before = frozenset(n for sel in selected.values() for n in sel)
        for gid, members in groups:
            others = tuple(
                sorted(
                    {n for g2, sel in selected.items() if g2 != gid for n in sel},
                    key=order.__getitem__,
                )
            )
            if others:
                if others not in residual_cache:
                    residual_cache[others] = residual_target(
                        table,
                        others,
                        target_col,
                        config,
                        seed=_state_seed(config.seed, "residual", others),
                    )
                temp = residual_cache[others]
            else:
                temp = target_col
            stream = _SeedStream(_state_seed(config.seed, gid, others))
            is_cat_group = gid == CATEGORICAL_GROUP_ID
            other_kind = [
                n for n in others if table.column(n).is_categorical != is_cat_group
            ]
            pool = screen_group(
                members,
                "categorical" if is_cat_group else "continuous",
                other_kind,
                temp,
                table,
                config.alpha,
                config.rcit_params,
                stream,
            )
            if is_cat_group:
                tester = _make_chisq_tester(table, members, _binned_target(temp))
            else:
                temp_values = (
                    temp.values.astype(np.float64) if temp.is_categorical else temp.values
                )
                tester = _make_rcit_tester(
                    table, members, temp_values, config.rcit_params, stream
                )
            group_selected, trace = fbed(pool, tester, fbed_config)
            selected[gid] = tuple(group_selected)
            traces[gid] = trace
        after = frozenset(n for sel in selected.values() for n in sel)
        if after == before:
            converged = True
            break

    return SelectionState(
        mb_set=frozenset(n for sel in selected.values() for n in sel),
        per_group_selected=dict(selected),
        outer_iteration=outer,
        converged=converged,
        traces=traces,
        partition=part,
    )


def run_m2(table: DataTable, target: str, config: MultiGroupConfig = MultiGroupConfig()) -> SelectionState:
    """Multi-group selection for all-continuous candidate sets."""
    return _run(table, target, config, allow_categorical=False)


def run_m3(table: DataTable, target: str, config: MultiGroupConfig = MultiGroupConfig()) -> SelectionState:
    """Multi-group selection for mixed continuous/categorical candidates."""
    return _run(table, target, config, allow_categorical=True)
