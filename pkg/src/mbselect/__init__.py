"""Markov-boundary feature selection toolkit.

Selects the parents, children, and spouses of a target variable from
observational data using randomized Fourier-feature conditional independence
tests for continuous variables, stratified chi-square tests for categorical
ones, and a multi-group forward-backward search that residualizes the target
with gradient-boosted trees between groups.
"""

from .boosting import EnsembleParams, FittedEnsemble, classification_defaults, regression_defaults
from .chisq import chisq_conditional, chisq_marginal, mixed_marginal
from .data import Column, DataTable, load_table, one_hot, quantile_bin, standardize
from .evalbench import StudyReport, f1, rcit_calibration, replicate_study
from .fbed import FbedConfig, SelectionTrace, fbed, rank_candidates
from .grouping import GroupPartition, association_matrix, cluster_groups, partition
from .multigroup import (
    MultiGroupConfig,
    SelectionState,
    residual_target,
    run_m2,
    run_m3,
    screen_group,
)
from .rcit import RcitParams, rcit, rit, weighted_chisq_pvalue
from .result import CITestResult
from .simgen import SimData, SimSpec, block_covariance, gen_complex, gen_linear, generate

__version__ = "0.1.0"

__all__ = [
    "CITestResult",
    "Column",
    "DataTable",
    "EnsembleParams",
    "FbedConfig",
    "FittedEnsemble",
    "GroupPartition",
    "MultiGroupConfig",
    "RcitParams",
    "SelectionState",
    "SelectionTrace",
    "SimData",
    "SimSpec",
    "StudyReport",
    "association_matrix",
    "block_covariance",
    "chisq_conditional",
    "chisq_marginal",
    "classification_defaults",
    "cluster_groups",
    "f1",
    "fbed",
    "gen_complex",
    "gen_linear",
    "generate",
    "load_table",
    "mixed_marginal",
    "one_hot",
    "partition",
    "quantile_bin",
    "rank_candidates",
    "rcit",
    "rcit_calibration",
    "regression_defaults",
    "replicate_study",
    "residual_target",
    "rit",
    "run_m2",
    "run_m3",
    "screen_group",
    "standardize",
    "weighted_chisq_pvalue",
]
