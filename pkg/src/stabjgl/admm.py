"""ADMM solver for the fused joint graphical lasso.

Minimizes, over K symmetric positive definite matrices,

    sum_k w_k [ -logdet(Theta_k) + tr(S_k Theta_k) ]
        + lam1 * sum_k sum_{i != j} |Theta_k[i, j]|
        + lam2 * sum_{k < k'} ||Theta_k - Theta_k'||_1

with the splitting Theta = Z.  The lam1 term leaves the diagonal alone, the
lam2 term fuses every entry including the diagonal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .core import CovarianceSet, PenaltyPair, PrecisionSet, DEFAULT_ZERO_EPS
from .exceptions import SolverError

# exact cluster enumeration visits 2**(K-1) partitions
MAX_ENUM_K = 8


@dataclass(frozen=True)
class SolverOptions:
    admm_rho: float = 1.0
    max_iter: int = 500
    primal_tol: float = 1e-5
    dual_tol: float = 1e-5
    zero_eps: float = DEFAULT_ZERO_EPS
    # "equal" gives every group unit likelihood weight, "sample_size" uses n_k
    weights: str = "equal"
    screening: bool = True

    def __post_init__(self):
        if not self.admm_rho > 0:
            raise ValueError("admm_rho must be positive")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be >= 1")
        if not (self.primal_tol > 0 and self.dual_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.zero_eps < 0:
            raise ValueError("zero_eps must be nonnegative")
        if self.weights not in ("equal", "sample_size"):
            raise ValueError(f"unknown weights {self.weights!r}")


@dataclass(frozen=True)
class AdmmState:
    theta: np.ndarray
    z: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    converged: bool
    primal_residual: float
    dual_residual: float
    objective: float
    n_blocks: int = 1
    largest_block: int = 0
    state: AdmmState | None = field(default=None, repr=False, compare=False)


def soft_threshold(x, t):
    """``sign(x) * max(|x| - t, 0)``, elementwise."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be nonnegative")
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.maximum(np.abs(x) - t, 0.0)
    return float(out) if out.ndim == 0 else out


def _pairwise_abs_sum(y):
    K = y.shape[0]
    tot = np.zeros(y.shape[1:])
    for a in range(K - 1):
        tot += np.abs(y[a] - y[a + 1:]).sum(axis=0)
    return tot


@lru_cache(maxsize=None)
def _partitions(K):
    """Contiguous cluster boundaries of ``range(K)``, one tuple per partition."""
    out = []
    for mask in range(2 ** (K - 1)):
        cuts = [b + 1 for b in range(K - 1) if (mask >> b) & 1]
        out.append(tuple(zip([0] + cuts, cuts + [K])))
    return tuple(out)


def _isotonic(b):
    """Pool-adjacent-violators for one nondecreasing fit of vector b."""
    vals, sizes = [], []
    for v in b:
        vals.append(float(v))
        sizes.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            n = sizes[-2] + sizes[-1]
            m = (vals[-2] * sizes[-2] + vals[-1] * sizes[-1]) / n
            vals[-2:] = [m]
            sizes[-2:] = [n]
    return np.repeat(vals, sizes)


def fused_prox(values, lam2_over_rho):
    """Proximal operator of the all-pairs fusion penalty.

    Solves ``min_y 1/2 sum_k (y_k - a_k)^2 + lam * sum_{k<k'} |y_k - y_k'|``
    independently for every column of ``values`` (shape ``(K,)`` or
    ``(K, M)``).

    The minimizer keeps the order of ``a``, so its distinct values form
    clusters of consecutive sorted entries; a cluster C takes the value
    ``mean(a_C) + lam * (#above - #below)``.  For K <= 8 all ``2**(K-1)``
    contiguous partitions are evaluated and the one with the smallest
    objective kept.  Larger K use the equivalent isotonic fit of
    ``a_(r) + lam * (K + 1 - 2r)``.
    """
    lam = float(lam2_over_rho)
    if lam < 0:
        raise ValueError("lam2_over_rho must be nonnegative")
    a = np.array(values, dtype=float)
    squeeze = a.ndim == 1
    if squeeze:
        a = a[:, None]
    K = a.shape[0]
    if K == 1 or lam == 0.0:
        return a[:, 0] if squeeze else a
    if K == 2:
        diff = a[0] - a[1]
        mean = 0.5 * (a[0] + a[1])
        shift = lam * np.sign(diff)
        merge = np.abs(diff) <= 2.0 * lam
        y = np.empty_like(a)
        y[0] = np.where(merge, mean, a[0] - shift)
        y[1] = np.where(merge, mean, a[1] + shift)
        return y[:, 0] if squeeze else y

    order = np.argsort(a, axis=0, kind="stable")
    s = np.take_along_axis(a, order, axis=0)
    if K <= MAX_ENUM_K:
        csum = np.concatenate([np.zeros((1,) + s.shape[1:]), np.cumsum(s, axis=0)])
        best = None
        best_obj = None
        for parts in _partitions(K):
            y = np.empty_like(s)
            for lo, hi in parts:
                y[lo:hi] = (csum[hi] - csum[lo]) / (hi - lo) + lam * ((K - hi) - lo)
            obj = 0.5 * ((y - s) ** 2).sum(axis=0) + lam * _pairwise_abs_sum(y)
            if best is None:
                best, best_obj = y, obj
            else:
                better = obj < best_obj
                best = np.where(better, y, best)
                best_obj = np.where(better, obj, best_obj)
    else:
        shift = lam * (K + 1 - 2 * np.arange(1, K + 1))
        best = np.column_stack([_isotonic(col) for col in (s + shift[:, None]).T])
    out = np.empty_like(a)
    np.put_along_axis(out, order, best, axis=0)
    return out[:, 0] if squeeze else out


@lru_cache(maxsize=64)
def _triu(p):
    iu, ju = np.triu_indices(p)
    return iu, ju, iu != ju


def z_update(theta_plus_u, lam1, lam2, rho):
    """Penalty proximal step: fuse across groups, then soft-threshold off-diagonals.

    Parameters
    ----------
    theta_plus_u : array, shape (K, p, p)
        Symmetric inputs.
    lam1, lam2 : float
        Sparsity and fusion penalties.
    rho : float
        ADMM penalty parameter.

    Returns
    -------
    array, shape (K, p, p)
        Symmetric output carrying exact zeros.
    """
    x = np.asarray(theta_plus_u, dtype=float)
    if x.ndim == 2:
        x = x[None]
    K, p, _ = x.shape
    iu, ju, off = _triu(p)
    vals = 0.5 * (x[:, iu, ju] + x[:, ju, iu])
    y = fused_prox(vals, lam2 / rho)
    y[:, off] = soft_threshold(y[:, off], lam1 / rho)
    out = np.empty((K, p, p))
    out[:, iu, ju] = y
    out[:, ju, iu] = y
    return out


def theta_update(S, A, n, rho):
    """Minimizer of ``-n logdet(T) + n tr(S T) + rho/2 ||T - A||_F^2``.

    With ``S - (rho/n) A = V diag(d) V^T`` the solution is
    ``V diag(n/(2 rho) * (-d + sqrt(d^2 + 4 rho/n))) V^T``.
    """
    S = np.asarray(S, dtype=float)
    A = np.asarray(A, dtype=float)
    if n <= 0:
        raise ValueError("n must be positive")
    if rho <= 0:
        raise ValueError("rho must be positive")
    return _theta_step(S[None], A[None], np.array([float(n)]), rho)[0]


def _theta_step(S, A, w, rho):
    M = S - (rho / w)[:, None, None] * A
    try:
        d, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigendecomposition failed: {exc}") from exc
    c = w[:, None]
    t = (c / (2.0 * rho)) * (-d + np.sqrt(d * d + 4.0 * rho / c))
    theta = (V * t[:, None, :]) @ V.transpose(0, 2, 1)
    return 0.5 * (theta + theta.transpose(0, 2, 1))


def group_weights(cov: CovarianceSet, opts: SolverOptions) -> np.ndarray:
    if opts.weights == "sample_size":
        return np.asarray(cov.n, dtype=float)
    return np.ones(cov.K)


def objective(cov: CovarianceSet, theta, penalties: PenaltyPair, weights=None) -> float:
    """Negated penalized log-likelihood (the quantity the solver minimizes)."""
    theta = np.asarray(theta, dtype=float)
    S = cov.matrices
    w = np.ones(cov.K) if weights is None else np.asarray(weights, dtype=float)
    total = 0.0
    for k in range(cov.K):
        sign, logdet = np.linalg.slogdet(theta[k])
        if sign <= 0:
            return np.inf
        total += w[k] * (-logdet + np.sum(S[k] * theta[k]))
    off = ~np.eye(cov.p, dtype=bool)
    total += penalties.lambda1 * np.abs(theta[:, off]).sum()
    for a, b in itertools.combinations(range(cov.K), 2):
        total += penalties.lambda2 * np.abs(theta[a] - theta[b]).sum()
    return float(total)


def zero_feasible(a, lam1, lam2):
    """True where a K-vector ``a`` of weighted covariances admits an all-zero entry.

    ``a`` has shape (K, ...).  The all-zero entry is optimal iff ``-a`` lies in
    the subdifferential of ``lam1 |y|_1 + lam2 sum_{k<k'} |y_k - y_k'|`` at 0,
    a zonotope whose facet normals are the indicator vectors of subsets A,
    giving ``|sum_A a_k| <= |A| (lam1 + lam2 (K - |A|))`` for all A.
    """
    a = np.asarray(a, dtype=float)
    K = a.shape[0]
    ok = np.ones(a.shape[1:], dtype=bool)
    if K > 12:
        # cheap sufficient condition
        return np.all(np.abs(a) <= lam1, axis=0)
    for r in range(1, K + 1):
        bound = r * (lam1 + lam2 * (K - r))
        for sub in itertools.combinations(range(K), r):
            ok &= np.abs(a[list(sub)].sum(axis=0)) <= bound
    return ok


def screen_blocks(S, w, lam1, lam2):
    """Connected components of the pairs that cannot be zero in every group."""
    a = w[:, None, None] * S
    link = ~zero_feasible(a, lam1, lam2)
    np.fill_diagonal(link, False)
    n_comp, labels = connected_components(csr_matrix(link), directed=False)
    return n_comp, labels


def _admm_block(S, w, lam1, lam2, opts, theta, z, u):
    rho = opts.admm_rho
    best = None
    it = 0
    for it in range(1, opts.max_iter + 1):
        theta = _theta_step(S, z - u, w, rho)
        z_old = z
        z = z_update(theta + u, lam1, lam2, rho)
        u = u + theta - z
        r = np.abs(theta - z).max()
        s = rho * np.abs(z - z_old).max()
        score = max(r / (opts.primal_tol * max(1.0, np.abs(z).max())),
                    s / (opts.dual_tol * max(1.0, rho * np.abs(u).max())))
        if best is None or score <= best[0]:
            best = (score, it, theta, z, u, r, s)
        if score <= 1.0:
            break
    score, _, theta, z, u, r, s = best
    return theta, z, u, it, score <= 1.0, r, s


def _admm_diagonal(s, w, lam2, opts, theta, z, u):
    """Same iteration for isolated nodes: every matrix entry is scalar."""
    rho = opts.admm_rho
    c = w[:, None]
    best = None
    it = 0
    for it in range(1, opts.max_iter + 1):
        d = s - (rho / c) * (z - u)
        theta = (c / (2.0 * rho)) * (-d + np.sqrt(d * d + 4.0 * rho / c))
        z_old = z
        z = fused_prox(theta + u, lam2 / rho)
        u = u + theta - z
        r = np.abs(theta - z).max()
        sr = rho * np.abs(z - z_old).max()
        score = max(r / (opts.primal_tol * max(1.0, np.abs(z).max())),
                    sr / (opts.dual_tol * max(1.0, rho * np.abs(u).max())))
        if best is None or score <= best[0]:
            best = (score, theta, z, u, r, sr)
        if score <= 1.0:
            break
    score, theta, z, u, r, sr = best
    return theta, z, u, it, score <= 1.0, r, sr


def _initial_state(S):
    K, p, _ = S.shape
    diag = np.diagonal(S, axis1=1, axis2=2)
    inv = 1.0 / np.maximum(diag, 1e-8)
    theta = np.zeros((K, p, p))
    idx = np.arange(p)
    theta[:, idx, idx] = inv
    return AdmmState(theta, theta.copy(), np.zeros((K, p, p)))


def solve_fgl(cov: CovarianceSet, penalties: PenaltyPair, opts: SolverOptions | None = None,
              warm: AdmmState | None = None):
    """Fit the fused joint graphical lasso.

    Parameters
    ----------
    cov : CovarianceSet
    penalties : PenaltyPair
    opts : SolverOptions, optional
    warm : AdmmState, optional
        Starting point, typically ``report.state`` of a fit at a nearby
        penalty on the same covariances.

    Returns
    -------
    PrecisionSet, SolveReport
        Non-convergence is reported through ``report.converged``; the best
        iterate found is returned.
    """
    opts = opts or SolverOptions()
    S = cov.matrices
    K, p = cov.K, cov.p
    w = group_weights(cov, opts)
    lam1, lam2 = float(penalties.lambda1), float(penalties.lambda2)
    init = warm if warm is not None else _initial_state(S)
    if init.theta.shape != S.shape:
        raise ValueError("warm start shape does not match covariances")

    if opts.screening:
        n_comp, labels = screen_blocks(S, w, lam1, lam2)
    else:
        n_comp, labels = 1, np.zeros(p, dtype=int)
    members = [np.flatnonzero(labels == c) for c in range(n_comp)]
    blocks = [m for m in members if m.size > 1]
    singles = np.array(sorted(int(m[0]) for m in members if m.size == 1), dtype=int)

    theta = np.zeros((K, p, p))
    z = np.zeros((K, p, p))
    u = np.zeros((K, p, p))
    iters, conv, r_max, s_max = 0, True, 0.0, 0.0
    for idx in blocks:
        sub = np.ix_(np.arange(K), idx, idx)
        t, zz, uu, it, ok, r, s = _admm_block(
            S[sub], w, lam1, lam2, opts,
            init.theta[sub], init.z[sub], init.u[sub])
        theta[sub], z[sub], u[sub] = t, zz, uu
        iters, conv = max(iters, it), conv and ok
        r_max, s_max = max(r_max, r), max(s_max, s)
    if singles.size:
        sd = S[:, singles, singles]
        t, zz, uu, it, ok, r, s = _admm_diagonal(
            sd, w, lam2, opts, init.theta[:, singles, singles],
            init.z[:, singles, singles], init.u[:, singles, singles])
        theta[:, singles, singles] = t
        z[:, singles, singles] = zz
        u[:, singles, singles] = uu
        iters, conv = max(iters, it), conv and ok
        r_max, s_max = max(r_max, r), max(s_max, s)

    report = SolveReport(
        iterations=iters, converged=conv,
        primal_residual=float(r_max), dual_residual=float(s_max),
        objective=objective(cov, theta, penalties, w),
        n_blocks=n_comp, largest_block=max((b.size for b in blocks), default=1),
        state=AdmmState(theta, z, u))
    return PrecisionSet(theta, z), report
