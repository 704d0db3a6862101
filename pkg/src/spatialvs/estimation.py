"""Empirical covariance operators on a spatial grid and the selection criterion."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .exceptions import DegenerateSample, SingularSubmatrix
from .linalg import IndexLike, IndexSet, as_index_set, hs_norm, restricted_solve


@dataclass(frozen=True)
class SpatialSample:
    """Paired observations ``(x_s, y_s)`` at the sites of ``{1..n}^d``.

    Rows of ``x`` (``N x p``) and ``y`` (``N x q``) follow lexicographic site
    order, with ``N = n**d``.
    """

    grid_side: int
    grid_dim: int
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.grid_side < 1 or self.grid_dim < 1:
            raise ValueError("grid_side and grid_dim must be >= 1")
        n_sites = self.grid_side ** self.grid_dim
        if x.ndim != 2 or x.shape[0] != n_sites:
            raise ValueError(f"x must have {n_sites} rows, got shape {x.shape}")
        if y.ndim != 2 or y.shape[0] != n_sites:
            raise ValueError(f"y must have {n_sites} rows, got shape {y.shape}")
        if x.shape[1] < 2 or y.shape[1] < 1:
            raise ValueError("need p >= 2 covariates and q >= 1 responses")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("sample contains non-finite entries")

    @property
    def n_sites(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def q(self) -> int:
        return self.y.shape[1]

    def sites(self) -> np.ndarray:
        """``N x d`` array of 1-based site coordinates in row order."""
        axes = [range(1, self.grid_side + 1)] * self.grid_dim
        return np.array(list(product(*axes)), dtype=int).reshape(-1, self.grid_dim)


@dataclass(frozen=True)
class CovariancePair:
    v1: np.ndarray
    v12: np.ndarray
    mean_x: np.ndarray
    mean_y: np.ndarray
    n_sites: int

    @property
    def p(self) -> int:
        return self.v1.shape[0]


def cov_pair_from_arrays(x, y) -> CovariancePair:
    """Centered second moments with divisor ``N`` (the number of rows)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    N = x.shape[0]
    if N < 2:
        raise DegenerateSample(f"need at least 2 sites, got {N}")
    mx = x.mean(axis=0)
    my = y.mean(axis=0)
    xc = x - mx
    yc = y - my
    v1 = xc.T @ xc / N
    v1 = 0.5 * (v1 + v1.T)
    # (y - ybar) (x) (x - xbar) maps R^q -> R^p, hence p x q
    v12 = xc.T @ yc / N
    return CovariancePair(v1=v1, v12=v12, mean_x=mx, mean_y=my, n_sites=N)


def empirical_cov_pair(sample: SpatialSample) -> CovariancePair:
    return cov_pair_from_arrays(sample.x, sample.y)


def criterion_xi(K: IndexLike, v1, v12) -> float:
    """Loss ``||v12 - v1 Pi_K v12||_HS`` from keeping only the variables in ``K``.

    Works the same for exact population operators and plug-in estimates. An
    empty ``K`` gives ``||v12||``.
    """
    v1 = np.asarray(v1, dtype=float)
    v12 = np.asarray(v12, dtype=float)
    if v12.ndim == 1:
        v12 = v12[:, None]
    K = K if isinstance(K, IndexSet) else as_index_set(K, v1.shape[0])
    return hs_norm(v12 - v1 @ restricted_solve(K, v1, v12))


def leave_one_out_criteria(cov: CovariancePair) -> np.ndarray:
    """``xi`` of ``I - {i}`` for each variable ``i = 1..p`` (as a length-p array)."""
    p = cov.p
    if p < 2:
        raise ValueError("leave-one-out criteria need p >= 2")
    full = IndexSet.full(p)
    out = np.empty(p)
    for i in range(1, p + 1):
        try:
            out[i - 1] = criterion_xi(full.without(i), cov.v1, cov.v12)
        except SingularSubmatrix as exc:
            raise SingularSubmatrix(f"leave-one-out block without variable {i}: {exc}",
                                    members=exc.members, index=i) from exc
    return out


def population_cov_pair(v1, B) -> CovariancePair:
    """Exact operators for ``Y = B X + eps`` with ``eps`` independent of ``X``.

    ``B`` is ``q x p`` and the cross-covariance is ``v1 B^T``.
    """
    v1 = np.asarray(v1, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    p = v1.shape[0]
    return CovariancePair(v1=v1, v12=v1 @ B.T, mean_x=np.zeros(p),
                          mean_y=np.zeros(B.shape[0]), n_sites=0)
