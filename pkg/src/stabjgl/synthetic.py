"""Ground-truth multi-network instances: scale-free graphs with controlled
cross-group similarity, precision matrices with small partial correlations,
and Gaussian samples."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .core import EdgeSet, GroupedDataset, partial_correlations, sparsity_of

log = logging.getLogger(__name__)

MIN_EIGENVALUE = 0.01
MAX_INFLATION_STEPS = 50


@dataclass(frozen=True)
class SimulationSpec:
    p: int = 100
    K: int = 3
    n: tuple = (150, 200, 300)
    target_sparsity: float = 0.02
    similarity: float = 1.0
    partial_corr_range: tuple = (0.1, 0.2)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        object.__setattr__(self, "partial_corr_range",
                           tuple(float(v) for v in self.partial_corr_range))
        if self.p < 3:
            raise ValueError("p must be at least 3")
        if self.K < 1 or len(self.n) != self.K:
            raise ValueError(f"need K >= 1 and one sample size per group (K={self.K}, n={self.n})")
        if any(v < 1 for v in self.n):
            raise ValueError("sample sizes must be positive")
        if not 0 < self.target_sparsity <= 1:
            raise ValueError("target_sparsity must lie in (0, 1]")
        if not 0 <= self.similarity <= 1:
            raise ValueError("similarity must lie in [0, 1]")
        lo, hi = self.partial_corr_range
        if not 0 < lo < hi:
            raise ValueError("partial_corr_range must satisfy 0 < lo < hi")


@dataclass(frozen=True)
class SyntheticInstance:
    spec: SimulationSpec
    edge_sets: list
    precisions: list
    covariances: list
    data: GroupedDataset = field(repr=False)

    def measured_similarity(self) -> float:
        """Smallest pairwise shared-edge fraction between groups (1.0 if K = 1)."""
        return min((_shared_fraction(a, b) for i, a in enumerate(self.edge_sets)
                    for b in self.edge_sets[i + 1:]), default=1.0)

    def measured_sparsity(self) -> list:
        return [sparsity_of(e) for e in self.edge_sets]


def _shared_fraction(a: EdgeSet, b: EdgeSet) -> float:
    denom = max(len(a), len(b))
    return 1.0 if denom == 0 else len(a.edges & b.edges) / denom


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def generate_scale_free_graph(p: int, target_sparsity: float, seed=None) -> EdgeSet:
    """Preferential-attachment graph with ``round(target_sparsity * p(p-1)/2)`` edges.

    Node v (v >= 2) attaches to ``m_v`` distinct earlier nodes chosen with
    probability proportional to their degree, where the ``m_v`` are spread
    as evenly as node capacities allow.  When fewer than p - 1 edges are
    requested the attachment tree is built first and leaf edges are removed
    uniformly at random (the result need not be connected).
    """
    if p < 3:
        raise ValueError("p must be at least 3")
    rng = _rng(seed)
    max_edges = p * (p - 1) // 2
    target = int(round(target_sparsity * max_edges))
    if not 0 <= target <= max_edges:
        raise ValueError(f"cannot place {target} edges on {p} nodes")
    n_attach = max(target, p - 1)

    # per-node attachment counts by water-filling: node v can take at most v
    # edges, and the floor share leaves the remainder to later, roomier nodes
    counts = np.zeros(p, dtype=int)
    remaining = n_attach - 1
    for v in range(2, p):
        counts[v] = min(v, remaining // (p - v))
        remaining -= counts[v]

    deg = np.zeros(p)
    deg[0] = deg[1] = 1
    edges = {(0, 1)}
    for v in range(2, p):
        prob = deg[:v] / deg[:v].sum()
        targets = rng.choice(v, size=counts[v], replace=False, p=prob)
        for t in targets:
            edges.add((int(t), v))
            deg[t] += 1
        deg[v] += counts[v]

    if target < len(edges):
        log.info("removing %d leaf edges to reach %d edges; graph may be disconnected",
                 len(edges) - target, target)
        edges = set(edges)
        while len(edges) > target:
            d = np.zeros(p, dtype=int)
            for i, j in edges:
                d[i] += 1
                d[j] += 1
            leaf_edges = sorted(e for e in edges if d[e[0]] == 1 or d[e[1]] == 1)
            edges.remove(leaf_edges[rng.integers(len(leaf_edges))])
    return EdgeSet(p, frozenset(edges))


def perturb_for_similarity(base: EdgeSet, K: int, similarity: float, seed=None) -> list:
    """K graphs sharing ``round(similarity * |E|)`` edges of ``base``.

    Group 1 is ``base`` itself.  One common subset of base edges is kept by
    every other group; each of those groups independently replaces the rest
    by uniformly drawn non-edges of ``base``, so edge counts are preserved.
    """
    if not 0 <= similarity <= 1:
        raise ValueError("similarity must lie in [0, 1]")
    rng = _rng(seed)
    base_edges = sorted(base.edges)
    m = len(base_edges)
    keep_n = int(round(similarity * m))
    n_new = m - keep_n
    iu, ju = np.triu_indices(base.p, k=1)
    adj = base.adjacency()
    non_edges = [(int(i), int(j)) for i, j in zip(iu, ju) if not adj[i, j]]
    if n_new > len(non_edges):
        raise ValueError(f"only {len(non_edges)} non-edges available to rewire {n_new} edges")
    kept_idx = rng.choice(m, size=keep_n, replace=False) if keep_n else np.array([], int)
    kept = frozenset(base_edges[i] for i in kept_idx)
    out = [base]
    for _ in range(1, K):
        new_idx = rng.choice(len(non_edges), size=n_new, replace=False)
        out.append(EdgeSet(base.p, kept | frozenset(non_edges[i] for i in new_idx)))
    return out


def precision_from_graph(g: EdgeSet, partial_corr_range=(0.1, 0.2), seed=None) -> np.ndarray:
    """Unit-diagonal PD precision matrix supported on ``g``.

    Off-diagonal magnitudes are uniform in ``partial_corr_range`` with random
    signs.  If the smallest eigenvalue falls below 0.01 the diagonal is
    inflated and the matrix rescaled back to unit diagonal, which shrinks
    every partial correlation by the same factor.

    Raises
    ------
    ValueError
        If positive definiteness is not reached within 50 inflation steps.
    """
    rng = _rng(seed)
    lo, hi = partial_corr_range
    theta = np.eye(g.p)
    pairs = sorted(g.edges)
    if pairs:
        ij = np.array(pairs)
        vals = rng.uniform(lo, hi, size=len(pairs)) * rng.choice([-1.0, 1.0], size=len(pairs))
        theta[ij[:, 0], ij[:, 1]] = vals
        theta[ij[:, 1], ij[:, 0]] = vals
    for _ in range(MAX_INFLATION_STEPS):
        lam_min = np.linalg.eigvalsh(theta)[0]
        if lam_min >= MIN_EIGENVALUE:
            return theta
        # after rescaling, (lam_min + c) / (1 + c) lands slightly above the floor
        c = (MIN_EIGENVALUE - lam_min) / (1.0 - MIN_EIGENVALUE) * (1.0 + 1e-9) + 1e-12
        theta = theta + c * np.eye(g.p)
        d = 1.0 / np.sqrt(np.diag(theta))
        theta = theta * d[:, None] * d[None, :]
        theta = 0.5 * (theta + theta.T)
    raise ValueError("could not reach a positive definite matrix; reseed")


def sample_gaussian(theta: np.ndarray, n: int, seed=None) -> np.ndarray:
    """n draws from ``N(0, theta^{-1})``.

    With ``theta = L L^T`` (Cholesky), ``x = L^{-T} e`` for standard normal
    ``e`` has covariance ``theta^{-1}``.
    """
    rng = _rng(seed)
    try:
        L = cholesky(np.asarray(theta, dtype=float), lower=True)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"precision matrix is not positive definite: {exc}") from exc
    e = rng.standard_normal((L.shape[0], int(n)))
    return solve_triangular(L.T, e, lower=False).T


def simulate(spec: SimulationSpec) -> SyntheticInstance:
    """Build a full instance; a pure function of ``spec``."""
    ss = np.random.SeedSequence(spec.seed)
    s_graph, s_sim, s_prec, s_data = ss.spawn(4)
    base = generate_scale_free_graph(spec.p, spec.target_sparsity, np.random.default_rng(s_graph))
    graphs = perturb_for_similarity(base, spec.K, spec.similarity, np.random.default_rng(s_sim))
    prec_rngs = [np.random.default_rng(s) for s in s_prec.spawn(spec.K)]
    data_rngs = [np.random.default_rng(s) for s in s_data.spawn(spec.K)]
    precisions = [precision_from_graph(g, spec.partial_corr_range, r)
                  for g, r in zip(graphs, prec_rngs)]
    covariances = [np.linalg.inv(t) for t in precisions]
    samples = [sample_gaussian(t, n, r) for t, n, r in zip(precisions, spec.n, data_rngs)]
    names = tuple(f"V{i + 1}" for i in range(spec.p))
    data = GroupedDataset(tuple(samples), variable_names=names)
    return SyntheticInstance(spec, graphs, precisions, covariances, data)


def true_partial_correlations(instance: SyntheticInstance) -> list:
    return [partial_correlations(t) for t in instance.precisions]
