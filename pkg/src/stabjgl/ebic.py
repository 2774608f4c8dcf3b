"""Similarity-penalty selection by the multi-network extended BIC."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .admm import SolverOptions, solve_fgl
from .core import (CovarianceSet, DEFAULT_ZERO_EPS, GroupedDataset, PenaltyPair,
                   PrecisionSet, edge_set_from_precision)
from .exceptions import SelectionError, SolverError
from .parallel import map_tasks

log = logging.getLogger(__name__)


def default_lambda2_grid(count: int = 20) -> tuple:
    return tuple(np.linspace(0.0, 0.1, count).tolist())


@dataclass(frozen=True)
class EbicConfig:
    lambda2_grid: tuple = field(default_factory=default_lambda2_grid)
    gamma: float = 0.0

    def __post_init__(self):
        grid = tuple(float(v) for v in self.lambda2_grid)
        object.__setattr__(self, "lambda2_grid", grid)
        if not grid:
            raise ValueError("lambda2_grid is empty")
        if grid[0] < 0 or any(b < a for a, b in zip(grid, grid[1:])):
            raise ValueError("lambda2_grid must be nonnegative and ascending")
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")


@dataclass(frozen=True)
class EbicTrace:
    lambda2_grid: np.ndarray
    scores: np.ndarray
    edge_counts: np.ndarray
    converged: np.ndarray
    selected_lambda2: float
    selected_index: int


def ebic_terms(cov: CovarianceSet, fit: PrecisionSet, gamma: float = 0.0,
               zero_eps: float = DEFAULT_ZERO_EPS) -> np.ndarray:
    """Per-group terms of the score, shape (K, 4): trace, -logdet, BIC edge
    penalty, extra gamma edge penalty (each already multiplied out)."""
    out = np.zeros((cov.K, 4))
    logp = math.log(cov.p)
    for k in range(cov.K):
        nk = cov.n[k]
        sign, logdet = np.linalg.slogdet(fit.theta[k])
        if sign <= 0:
            raise ValueError(f"precision estimate of group {k} is not positive definite")
        n_edges = len(edge_set_from_precision(fit.z[k], zero_eps))
        out[k] = (nk * np.sum(cov.matrices[k] * fit.theta[k]),
                  -nk * logdet,
                  n_edges * math.log(nk),
                  4.0 * n_edges * gamma * logp)
    return out


def ebic_score(cov: CovarianceSet, fit: PrecisionSet, gamma: float = 0.0,
               zero_eps: float = DEFAULT_ZERO_EPS) -> float:
    """Multi-network extended BIC of a fit.

    ``sum_k n_k tr(S_k Theta_k) - n_k logdet(Theta_k) + |E_k| log n_k
    + 4 |E_k| gamma log p``.  Likelihood terms use the dense ``theta``,
    edge counts the sparse ``z``.  ``gamma = 0`` is the ordinary BIC.
    """
    return float(ebic_terms(cov, fit, gamma, zero_eps).sum())


def choose_lambda2(grid, scores) -> int:
    """Index of the smallest score; near-equal scores resolve to the smaller lambda2."""
    scores = np.asarray(scores, dtype=float)
    if not np.isfinite(scores).any():
        raise SelectionError("no finite eBIC score")
    best = scores[np.isfinite(scores)].min()
    return int(np.flatnonzero(scores <= best + 1e-12 * max(1.0, abs(best)))[0])


def _fit_at(cov, lam1, lam2, solver):
    try:
        prec, rep = solve_fgl(cov, PenaltyPair(lam1, lam2), solver)
    except (SolverError, np.linalg.LinAlgError) as exc:
        log.warning("fit failed at lambda2=%g: %s", lam2, exc)
        return None, False
    return prec, rep.converged


def select_lambda2(data: GroupedDataset, cov: CovarianceSet, lambda1: float, cfg: EbicConfig,
                   solver: SolverOptions | None = None, executor=None):
    """Fit every grid lambda2 at fixed ``lambda1`` and keep the eBIC minimizer.

    Equal scores resolve to the smaller lambda2.

    Returns
    -------
    float, EbicTrace, PrecisionSet
        Selected lambda2, the score trace and the fit at the selected value.
    """
    solver = solver or SolverOptions()
    if cov.K != data.K or cov.p != data.p:
        raise ValueError("covariances do not match the dataset")
    grid = np.asarray(cfg.lambda2_grid)
    fits = map_tasks(_fit_at, [(cov, lambda1, l2, solver) for l2 in grid], executor)
    scores = np.full(len(grid), np.inf)
    counts = np.zeros((len(grid), cov.K), dtype=int)
    converged = np.zeros(len(grid), dtype=bool)
    for i, (prec, conv) in enumerate(fits):
        if prec is None:
            continue
        converged[i] = conv
        try:
            scores[i] = ebic_score(cov, prec, cfg.gamma, solver.zero_eps)
        except ValueError as exc:
            log.warning("score undefined at lambda2=%g: %s", grid[i], exc)
            continue
        counts[i] = [len(e) for e in prec.edge_sets(solver.zero_eps)]
    if not np.isfinite(scores).any():
        raise SelectionError("every lambda2 fit failed")
    idx = choose_lambda2(grid, scores)
    trace = EbicTrace(grid, scores, counts, converged, float(grid[idx]), idx)
    return float(grid[idx]), trace, fits[idx][0]
