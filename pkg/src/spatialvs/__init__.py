"""Criterion-based variable selection for multivariate regression on spatial grids."""

from .baselines import baseline_select, penalized_ls_path
from .estimation import (CovariancePair, SpatialSample, criterion_xi, empirical_cov_pair,
                         leave_one_out_criteria, population_cov_pair)
from .exceptions import (AllFoldsFailed, ConfigError, DegenerateSample, EmptyCell,
                         FoldTooSmall, GridTooLarge, NotUnivariateResponse,
                         SingularSubmatrix, SpatialVSError)
from .linalg import IndexSet, hs_norm, outer_product, restricted_projector
from .selection import (PenaltyConfig, SelectionResult, estimate_dimension,
                        estimate_permutation, select_variables)
from .simulator import SimulationConfig, generate_dataset
from .tuning import TuningGrid, cv_score, optimize_tuning

__all__ = [
    "AllFoldsFailed", "ConfigError", "CovariancePair", "DegenerateSample", "EmptyCell",
    "FoldTooSmall", "GridTooLarge", "IndexSet", "NotUnivariateResponse", "PenaltyConfig",
    "SelectionResult", "SimulationConfig", "SingularSubmatrix", "SpatialSample",
    "SpatialVSError", "TuningGrid", "baseline_select", "criterion_xi", "cv_score",
    "empirical_cov_pair", "estimate_dimension", "estimate_permutation", "generate_dataset",
    "hs_norm", "leave_one_out_criteria", "optimize_tuning", "outer_product",
    "penalized_ls_path", "population_cov_pair", "restricted_projector", "select_variables",
]

__version__ = "0.1.0"
