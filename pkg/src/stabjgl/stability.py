"""Sparsity-penalty selection by subsample edge instability (StARS extended
to K jointly estimated graphs)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .admm import SolverOptions, solve_fgl
from .core import GroupedDataset, PenaltyPair, compute_sample_covariance
from .exceptions import SolverError, StabJGLError, SubsampleFailureError
from .parallel import map_tasks

log = logging.getLogger(__name__)

# StARS switches from a fixed ratio to 10 sqrt(n) above this sample size
SQRT_RULE_MIN_N = 144


def default_lambda1_grid(count: int = 20) -> tuple:
    return tuple(np.linspace(0.01, 1.0, count).tolist())


@dataclass(frozen=True)
class StabilityConfig:
    lambda1_grid: tuple = field(default_factory=default_lambda1_grid)
    lambda2_init: float = 0.01
    beta1: float = 0.1
    n_sample: int = 20
    subsample_cap_ratio: float = 0.8
    seed: int = 0

    def __post_init__(self):
        grid = tuple(float(v) for v in self.lambda1_grid)
        object.__setattr__(self, "lambda1_grid", grid)
        if not grid:
            raise ValueError("lambda1_grid is empty")
        if grid[0] <= 0 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("lambda1_grid must be positive and strictly ascending")
        if self.lambda2_init < 0:
            raise ValueError("lambda2_init must be nonnegative")
        if not 0 < self.beta1 <= 0.5:
            raise ValueError("beta1 must lie in (0, 0.5]")
        if int(self.n_sample) < 1:
            raise ValueError("n_sample must be positive")
        if not 0 < self.subsample_cap_ratio < 1:
            raise ValueError("subsample_cap_ratio must lie in (0, 1)")


@dataclass(frozen=True)
class VariabilityTrace:
    """Per-lambda1 instability statistics; ``psi`` holds upper-triangle edge
    frequencies with shape (L, K, p(p-1)/2)."""

    lambda1_grid: np.ndarray
    d_group: np.ndarray
    d_hat: np.ndarray
    d_bar: np.ndarray
    selected_lambda1: float
    selected_index: int
    warning: bool
    n_failed: np.ndarray
    n_nonconverged: np.ndarray
    psi: np.ndarray = field(repr=False)

    @property
    def p(self) -> int:
        m = self.psi.shape[-1]
        return int(round((1 + math.sqrt(1 + 8 * m)) / 2))

    def psi_matrix(self, index: int, group: int) -> np.ndarray:
        """Symmetric p x p edge-frequency matrix (zero diagonal)."""
        p = self.p
        out = np.zeros((p, p))
        iu, ju = np.triu_indices(p, k=1)
        out[iu, ju] = self.psi[index, group]
        out[ju, iu] = self.psi[index, group]
        return out

    def xi(self) -> np.ndarray:
        return edge_instability(self.psi)


def subsample_sizes(n, cap_ratio: float = 0.8) -> list:
    """Subsample size per group: ``floor(10 sqrt(n))`` once n > 144, else
    ``floor(cap_ratio * n)``; always within ``1 .. n - 1``."""
    out = []
    for nk in n:
        nk = int(nk)
        if nk < 2:
            raise ValueError(f"group with {nk} samples cannot be subsampled")
        b = math.floor(10 * math.sqrt(nk)) if nk > SQRT_RULE_MIN_N else math.floor(cap_ratio * nk)
        out.append(min(max(b, 1), nk - 1))
    return out


def draw_subsamples(data: GroupedDataset, cfg: StabilityConfig) -> list:
    """``cfg.n_sample`` tuples of sorted without-replacement row indices, one per group.

    All draws happen up front from one generator seeded with ``cfg.seed``.
    """
    sizes = subsample_sizes(data.n, cfg.subsample_cap_ratio)
    rng = np.random.default_rng(cfg.seed)
    return [[np.sort(rng.choice(nk, size=b, replace=False)) for nk, b in zip(data.n, sizes)]
            for _ in range(cfg.n_sample)]


def edge_instability(psi):
    """``2 psi (1 - psi)``: probability that two independent fits disagree on an edge."""
    psi = np.asarray(psi, dtype=float)
    return 2.0 * psi * (1.0 - psi)


def graph_variability(xi) -> float:
    """Mean of a symmetric instability matrix over its strict upper triangle."""
    xi = np.asarray(xi, dtype=float)
    iu = np.triu_indices(xi.shape[0], k=1)
    return float(xi[iu].mean())


def monotonize(d_hat) -> np.ndarray:
    """``d_bar[l] = max(d_hat[l:])`` along an ascending grid."""
    d_hat = np.asarray(d_hat, dtype=float)
    return np.maximum.accumulate(d_hat[::-1])[::-1]


def choose_lambda1(grid, d_hat, beta1: float):
    """Smallest grid value whose monotonized variability stays within ``beta1``.

    Returns ``(lambda1, index, d_bar, warning)``; when no value qualifies the
    largest grid value is returned with ``warning=True``.
    """
    grid = np.asarray(grid, dtype=float)
    d_bar = monotonize(d_hat)
    ok = np.flatnonzero(d_bar <= beta1)
    if ok.size == 0:
        log.warning("no lambda1 meets beta1=%g; using the largest grid value", beta1)
        return float(grid[-1]), len(grid) - 1, d_bar, True
    i = int(ok[0])
    return float(grid[i]), i, d_bar, False


def _subsample_path(data, indices, grid, lambda2, solver, standardize):
    """Edge indicators of one subsample tuple at every grid value."""
    L, K, p = len(grid), data.K, data.p
    iu, ju = np.triu_indices(p, k=1)
    edges = np.zeros((L, K, iu.size), dtype=bool)
    failed = np.zeros(L, dtype=bool)
    converged = np.ones(L, dtype=bool)
    try:
        cov = compute_sample_covariance(data.take(indices), standardize)
    except StabJGLError as exc:
        log.debug("subsample covariance failed: %s", exc)
        failed[:] = True
        return edges, failed, converged
    for l, lam1 in enumerate(grid):
        try:
            prec, rep = solve_fgl(cov, PenaltyPair(lam1, lambda2), solver)
        except (SolverError, np.linalg.LinAlgError, FloatingPointError) as exc:
            log.debug("subsample fit failed at lambda1=%g: %s", lam1, exc)
            failed[l] = True
            continue
        edges[l] = np.abs(prec.z[:, iu, ju]) > solver.zero_eps
        converged[l] = rep.converged
    return edges, failed, converged


def select_lambda1(data: GroupedDataset, cfg: StabilityConfig, solver: SolverOptions | None = None,
                   standardize: bool = True, executor=None):
    """Pick lambda1 from subsample edge instability at ``lambda2 = cfg.lambda2_init``.

    Every grid value is fitted on all ``cfg.n_sample`` subsample tuples.
    Subsample fits that raise are dropped from that grid value's edge
    frequencies.

    Returns
    -------
    float, VariabilityTrace

    Raises
    ------
    SubsampleFailureError
        If more than half of the subsample fits fail at some grid value.
    """
    solver = solver or SolverOptions()
    grid = np.asarray(cfg.lambda1_grid)
    subsamples = draw_subsamples(data, cfg)
    tasks = [(data, ix, cfg.lambda1_grid, cfg.lambda2_init, solver, standardize)
             for ix in subsamples]
    results = map_tasks(_subsample_path, tasks, executor)

    edges = np.stack([r[0] for r in results])        # (N, L, K, M)
    failed = np.stack([r[1] for r in results])       # (N, L)
    converged = np.stack([r[2] for r in results])
    n_failed = failed.sum(axis=0)
    bad = np.flatnonzero(n_failed > cfg.n_sample / 2)
    if bad.size:
        raise SubsampleFailureError(
            f"{int(n_failed[bad[0]])} of {cfg.n_sample} subsample fits failed "
            f"at lambda1={grid[bad[0]]:g}")

    L, K = len(grid), data.K
    psi = np.zeros((L, K, edges.shape[-1]))
    for l in range(L):
        ok = ~failed[:, l]
        psi[l] = edges[ok, l].mean(axis=0)
    xi = edge_instability(psi)
    d_group = xi.mean(axis=-1)
    d_hat = d_group.mean(axis=1)
    lam1, idx, d_bar, warn = choose_lambda1(grid, d_hat, cfg.beta1)
    trace = VariabilityTrace(
        lambda1_grid=grid, d_group=d_group, d_hat=d_hat, d_bar=d_bar,
        selected_lambda1=lam1, selected_index=idx, warning=warn,
        n_failed=n_failed, n_nonconverged=((~converged) & (~failed)).sum(axis=0),
        psi=psi)
    return lam1, trace
