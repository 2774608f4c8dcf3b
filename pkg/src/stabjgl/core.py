"""Domain types and deterministic transforms between data, covariance,
precision matrices and graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ZeroVarianceError

DEFAULT_ZERO_EPS = 1e-10


@dataclass(frozen=True)
class GroupedDataset:
    """K observation matrices (rows = samples) over a shared set of p variables."""

    groups: tuple
    variable_names: tuple | None = None
    group_names: tuple | None = None

    def __post_init__(self):
        groups = tuple(np.array(g, dtype=float) for g in self.groups)
        if len(groups) < 1:
            raise ValueError("at least one group is required")
        for k, g in enumerate(groups):
            if g.ndim != 2:
                raise ValueError(f"group {k} must be a 2-d array, got ndim={g.ndim}")
            if not np.all(np.isfinite(g)):
                raise ValueError(f"group {k} contains non-finite entries")
            if g.shape[0] < 2:
                raise ValueError(f"group {k} has {g.shape[0]} samples; need at least 2")
        p = groups[0].shape[1]
        if p < 2:
            raise ValueError(f"need at least 2 variables, got {p}")
        for k, g in enumerate(groups):
            if g.shape[1] != p:
                raise ValueError(
                    f"group {k} has {g.shape[1]} columns, expected {p}")
        for g in groups:
            g.setflags(write=False)
        object.__setattr__(self, "groups", groups)
        if self.variable_names is not None:
            names = tuple(str(v) for v in self.variable_names)
            if len(names) != p:
                raise ValueError(f"{len(names)} variable names for {p} variables")
            object.__setattr__(self, "variable_names", names)
        if self.group_names is not None:
            names = tuple(str(v) for v in self.group_names)
            if len(names) != len(groups):
                raise ValueError(f"{len(names)} group names for {len(groups)} groups")
            object.__setattr__(self, "group_names", names)

    @property
    def K(self) -> int:
        return len(self.groups)

    @property
    def p(self) -> int:
        return self.groups[0].shape[1]

    @property
    def n(self) -> tuple:
        return tuple(g.shape[0] for g in self.groups)

    def take(self, indices: Sequence[np.ndarray]) -> "GroupedDataset":
        """Row-subset every group; ``indices[k]`` selects rows of group k."""
        if len(indices) != self.K:
            raise ValueError("need one index array per group")
        return GroupedDataset(
            tuple(g[np.asarray(ix)] for g, ix in zip(self.groups, indices)),
            self.variable_names, self.group_names)


@dataclass(frozen=True)
class CovarianceSet:
    """Stacked K x p x p sample covariance matrices and their sample counts."""

    matrices: np.ndarray
    n: tuple

    def __post_init__(self):
        mats = np.array(self.matrices, dtype=float)
        if mats.ndim == 2:
            mats = mats[None]
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError(f"expected shape (K, p, p), got {mats.shape}")
        if len(self.n) != mats.shape[0]:
            raise ValueError("one sample count per matrix is required")
        if not np.allclose(mats, mats.transpose(0, 2, 1), rtol=0, atol=1e-12):
            raise ValueError("covariance matrices must be symmetric")
        if np.any(np.diagonal(mats, axis1=1, axis2=2) < 0):
            raise ValueError("covariance diagonals must be nonnegative")
        mats = 0.5 * (mats + mats.transpose(0, 2, 1))
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))

    @property
    def K(self) -> int:
        return self.matrices.shape[0]

    @property
    def p(self) -> int:
        return self.matrices.shape[1]


@dataclass(frozen=True)
class PrecisionSet:
    """Dense PD estimates ``theta`` with their exact-sparse consensus copies ``z``.

    Graph decisions are read from ``z``; ``theta`` is what enters likelihoods.
    """

    theta: np.ndarray
    z: np.ndarray

    @property
    def K(self) -> int:
        return self.theta.shape[0]

    @property
    def p(self) -> int:
        return self.theta.shape[1]

    def edge_sets(self, zero_eps: float = DEFAULT_ZERO_EPS) -> list:
        return [edge_set_from_precision(zk, zero_eps) for zk in self.z]


@dataclass(frozen=True)
class EdgeSet:
    """Undirected simple graph on nodes ``0 .. p-1``; pairs stored as ``(i, j)``, i < j."""

    p: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        norm = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.p and 0 <= j < self.p):
                raise ValueError(f"edge ({i}, {j}) outside 0..{self.p - 1}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(sorted(self.edges))

    def __contains__(self, pair) -> bool:
        i, j = pair
        return (min(i, j), max(i, j)) in self.edges

    @classmethod
    def from_adjacency(cls, adj: np.ndarray) -> "EdgeSet":
        adj = np.asarray(adj, dtype=bool)
        iu, ju = np.nonzero(np.triu(adj | adj.T, k=1))
        return cls(adj.shape[0], frozenset(zip(iu.tolist(), ju.tolist())))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.p, self.p), dtype=bool)
        if self.edges:
            ij = np.array(sorted(self.edges))
            a[ij[:, 0], ij[:, 1]] = True
            a[ij[:, 1], ij[:, 0]] = True
        return a

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1)

    def relabel(self, perm: Iterable[int]) -> "EdgeSet":
        """Apply node map ``i -> perm[i]``."""
        perm = list(perm)
        return EdgeSet(self.p, frozenset((perm[i], perm[j]) for i, j in self.edges))


@dataclass(frozen=True)
class PenaltyPair:
    lambda1: float
    lambda2: float = 0.0

    def __post_init__(self):
        if not self.lambda1 > 0:
            raise ValueError(f"lambda1 must be positive, got {self.lambda1}")
        if not self.lambda2 >= 0:
            raise ValueError(f"lambda2 must be nonnegative, got {self.lambda2}")


def compute_sample_covariance(data: GroupedDataset, standardize: bool = True) -> CovarianceSet:
    """Per-group sample covariance ``X^T X / (n - 1)`` of the centered columns.

    With ``standardize`` the columns are also scaled to unit sample standard
    deviation, so each matrix is a correlation matrix.

    Raises
    ------
    ZeroVarianceError
        If ``standardize`` is set and some column is constant.
    """
    mats = []
    for k, x in enumerate(data.groups):
        xc = x - x.mean(axis=0)
        if standardize:
            sd = np.sqrt((xc ** 2).sum(axis=0) / (x.shape[0] - 1))
            bad = np.flatnonzero(sd <= 1e-12 * max(1.0, np.abs(x).max()))
            if bad.size:
                col = int(bad[0])
                label = data.variable_names[col] if data.variable_names else str(col)
                gname = data.group_names[k] if data.group_names else str(k)
                raise ZeroVarianceError(gname, label)
            xc = xc / sd
        s = xc.T @ xc / (x.shape[0] - 1)
        if standardize:
            np.fill_diagonal(s, 1.0)
        mats.append(0.5 * (s + s.T))
    return CovarianceSet(np.stack(mats), data.n)


def partial_correlations(theta: np.ndarray) -> np.ndarray:
    """Partial correlation matrix ``-theta_ij / sqrt(theta_ii theta_jj)``, unit diagonal."""
    theta = np.asarray(theta, dtype=float)
    d = np.diag(theta)
    if np.any(d <= 0):
        raise ValueError("precision matrix must have a positive diagonal")
    s = 1.0 / np.sqrt(d)
    rho = -theta * s[:, None] * s[None, :]
    rho = 0.5 * (rho + rho.T)
    np.fill_diagonal(rho, 1.0)
    return np.clip(rho, -1.0, 1.0)


def edge_set_from_precision(z: np.ndarray, zero_eps: float = DEFAULT_ZERO_EPS) -> EdgeSet:
    z = np.asarray(z)
    # symmetrize the decision so edge_set(z) == edge_set(z.T)
    nz = (np.abs(z) > zero_eps) | (np.abs(z.T) > zero_eps)
    np.fill_diagonal(nz, False)
    return EdgeSet.from_adjacency(nz)


def sparsity_of(e: EdgeSet) -> float:
    """Fraction of possible edges present, ``2|E| / (p^2 - p)``."""
    if e.p < 2:
        raise ValueError("sparsity needs p >= 2")
    return 2.0 * len(e) / (e.p * e.p - e.p)


def upper_indices(p: int, k: int = 1):
    return np.triu_indices(p, k=k)
