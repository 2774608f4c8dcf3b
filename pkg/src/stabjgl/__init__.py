"""Joint estimation of several sparse Gaussian graphical models with the fused
graphical lasso, tuned by subsample edge stability and multi-network eBIC."""

from .admm import SolveReport, SolverOptions, fused_prox, solve_fgl, z_update
from .core import (CovarianceSet, EdgeSet, GroupedDataset, PenaltyPair, PrecisionSet,
                   compute_sample_covariance, edge_set_from_precision, partial_correlations,
                   sparsity_of)
from .ebic import EbicConfig, EbicTrace, ebic_score, select_lambda2
from .exceptions import (SelectionError, SolverError, StabJGLError, StageError,
                         SubsampleFailureError, ZeroVarianceError)
from .metrics import ConfusionCounts, confusion, mcc, precision_recall
from .pipeline import StabJglResult, run_stabjgl
from .stability import StabilityConfig, VariabilityTrace, choose_lambda1, select_lambda1
from .synthetic import SimulationSpec, SyntheticInstance, simulate

__version__ = "0.1.0"

__all__ = [
    "CovarianceSet", "ConfusionCounts", "EbicConfig", "EbicTrace", "EdgeSet", "GroupedDataset",
    "PenaltyPair", "PrecisionSet", "SelectionError", "SimulationSpec", "SolveReport",
    "SolverError", "SolverOptions", "StabJGLError", "StabJglResult", "StabilityConfig",
    "StageError", "SubsampleFailureError", "SyntheticInstance", "VariabilityTrace",
    "ZeroVarianceError", "choose_lambda1", "compute_sample_covariance", "confusion",
    "ebic_score", "edge_set_from_precision", "fused_prox", "mcc", "partial_correlations",
    "precision_recall", "run_stabjgl", "select_lambda1", "select_lambda2", "simulate",
    "solve_fgl", "sparsity_of", "z_update",
]
