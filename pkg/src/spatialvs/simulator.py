"""Data-generating process on a 2-D grid.

Covariates are spatially weighted random cosine series, the error is a
centered Gaussian field with squared-exponential covariance, and responses
follow ``Y = B X + eps`` site by site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from .estimation import SpatialSample
from .exceptions import GridTooLarge

#: Ranges at or above this are treated as infinite (``D == 1``).
A_INFINITE = 1e9
#: Largest number of sites for which the dense error covariance is factorized.
MAX_ERROR_SITES = 4096
#: Squared-distance scale of the error covariance ``exp(-|h|^2 / 9)``.
ERROR_LENGTH2 = 9.0

DEFAULT_B = (3.0, 5.0, 4.0, 6.0, 0.0, 0.0)


def _default_B():
    return np.array([DEFAULT_B])


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of one simulated dataset.

    ``B`` is ``q x p``; a 1-D sequence is read as a single response row.
    ``t_offsets`` defaults to ``1 + 1.5 (k - 1)`` for ``k = 1..p``.
    """

    n: int = 12
    a: float = 25.0
    kappa2: float = 1.0
    B: np.ndarray = field(default_factory=_default_B, compare=False)
    seed: int = 0
    n_terms: int = 1000
    series_scale: float = 1.0 / math.sqrt(500.0)
    freq_sd2: float = 0.25
    t_offsets: tuple | None = None

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        object.__setattr__(self, "B", B)
        if self.t_offsets is None:
            t = tuple(1.0 + 1.5 * k for k in range(B.shape[1]))
            object.__setattr__(self, "t_offsets", t)
        if self.n < 2:
            raise ValueError(f"grid side must be >= 2, got {self.n}")
        if not self.a > 0:
            raise ValueError(f"range a must be positive, got {self.a}")
        if self.kappa2 < 0:
            raise ValueError(f"kappa2 must be >= 0, got {self.kappa2}")
        if len(self.t_offsets) != B.shape[1]:
            raise ValueError("need one t offset per covariate")
        if any(b <= a for a, b in zip(self.t_offsets, self.t_offsets[1:])):
            raise ValueError("t_offsets must be strictly increasing")
        if not np.all(np.isfinite(B)):
            raise ValueError("B must be finite")

    @property
    def p(self) -> int:
        return self.B.shape[1]

    @property
    def q(self) -> int:
        return self.B.shape[0]

    @property
    def true_set(self) -> tuple:
        """1-based indices of the nonzero columns of ``B``."""
        return tuple(int(j) + 1 for j in np.flatnonzero(np.any(self.B != 0, axis=0)))

    def replace(self, **changes) -> "SimulationConfig":
        kw = {f: getattr(self, f) for f in self.__dataclass_fields__}
        if "B" in changes and "t_offsets" not in changes:
            kw["t_offsets"] = None
        kw.update(changes)
        return SimulationConfig(**kw)


def grid_sites(n: int) -> np.ndarray:
    """``n^2 x 2`` array of 1-based ``(i, j)`` in lexicographic order."""
    i, j = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
    return np.column_stack([i.ravel(), j.ravel()])


@lru_cache(maxsize=64)
def _weight_grid(n: int, a: float) -> np.ndarray:
    if a >= A_INFINITE or n == 1:
        D = np.ones((n, n))
    else:
        # kernel on absolute offsets; offsets commute so E[u, v] == E[v, u]
        u = np.arange(n, dtype=float)
        E = np.exp(-np.sqrt(u[:, None] ** 2 + u[None, :] ** 2) / a)
        idx = np.arange(n)
        off = np.abs(idx[:, None] - idx[None, :])  # off[i, m] = |i - m|
        # D[i, j] = sum_m sum_l E[|i-m|, |j-l|] / n^2
        raw = np.empty((n, n))
        for i in range(n):
            col = E[off[i]].sum(axis=0)  # col[v] = sum_m E[|i-m|, v]
            raw[i] = col[off].sum(axis=1)
        raw /= n * n
        # read each site from its dihedral-canonical representative so the
        # grid symmetries hold bit for bit
        c = np.minimum(idx, n - 1 - idx)
        lo = np.minimum(c[:, None], c[None, :])
        hi = np.maximum(c[:, None], c[None, :])
        D = raw[lo, hi]
    D.setflags(write=False)
    return D


def spatial_weight_grid(n: int, a: float) -> np.ndarray:
    """``n x n`` array of weights ``D_(i,j)`` (row ``i-1``, column ``j-1``)."""
    return _weight_grid(int(n), float(a))


def spatial_weight(i: int, j: int, n: int, a: float) -> float:
    """Average of ``exp(-dist / a)`` from site ``(i, j)`` to every site of the grid.

    >>> spatial_weight(3, 7, 10, 1e12)
    1.0
    """
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"site ({i}, {j}) outside the {n} x {n} grid")
    if not a > 0:
        raise ValueError("range a must be positive")
    return float(spatial_weight_grid(n, a)[i - 1, j - 1])


def generate_covariates(cfg: SimulationConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw one covariate dataset, shape ``(n^2, p)``.

    A single set of frequencies ``w``, ``q`` and phases ``r`` is drawn and
    shared across all sites and coordinates.
    """
    L = cfg.n_terms
    sd = math.sqrt(cfg.freq_sd2)
    w = rng.normal(0.0, sd, size=(2, L))
    qf = rng.normal(0.0, sd, size=L)
    r = rng.uniform(-math.pi, math.pi, size=L)

    sites = grid_sites(cfg.n).astype(float)
    base = sites @ w + r                       # (N, L)
    shift = np.outer(qf, np.asarray(cfg.t_offsets, dtype=float))   # (L, p)
    # sum_l cos(base + shift) via the angle-addition identity
    series = np.cos(base) @ np.cos(shift) - np.sin(base) @ np.sin(shift)
    D = spatial_weight_grid(cfg.n, cfg.a).ravel()
    return D[:, None] * cfg.series_scale * series


def error_correlation(n: int) -> np.ndarray:
    """Correlation ``exp(-|s - t|^2 / 9)`` between all pairs of grid sites."""
    s = grid_sites(n).astype(float)
    d2 = ((s[:, None, :] - s[None, :, :]) ** 2).sum(axis=-1)
    return np.exp(-d2 / ERROR_LENGTH2)


@lru_cache(maxsize=8)
def _error_factor(n: int) -> np.ndarray:
    R = error_correlation(n)
    jitter = 0.0
    while True:
        try:
            Lc = cholesky(R + jitter * np.eye(R.shape[0]), lower=True, check_finite=False)
            break
        except LinAlgError:
            # squared-exponential correlation is numerically rank deficient
            jitter = 1e-10 if jitter == 0.0 else jitter * 10.0
            if jitter > 1e-6:
                raise
    Lc.setflags(write=False)
    return Lc


def generate_errors(cfg: SimulationConfig, rng: np.random.Generator) -> np.ndarray:
    """Gaussian field with covariance ``kappa2 * exp(-|h|^2 / 9)``, shape ``(n^2, q)``.

    Standard normals are drawn even when ``kappa2 == 0`` so that configs that
    differ only in noise level consume the stream identically.
    """
    N = cfg.n * cfg.n
    if N > MAX_ERROR_SITES:
        raise GridTooLarge(f"{N} sites exceeds the dense bound {MAX_ERROR_SITES}")
    z = rng.standard_normal((N, cfg.q))
    if cfg.kappa2 == 0:
        return np.zeros((N, cfg.q))
    return math.sqrt(cfg.kappa2) * (_error_factor(cfg.n) @ z)


def generate_dataset(cfg: SimulationConfig, rng: np.random.Generator | None = None,
                     return_errors: bool = False):
    """Simulate ``(x, y)`` on the ``n x n`` grid.

    Without ``rng`` the generator is seeded from ``cfg.seed``. With
    ``return_errors`` the error field is returned alongside the sample.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    x = generate_covariates(cfg, rng)
    eps = generate_errors(cfg, rng)
    y = x @ cfg.B.T + eps
    sample = SpatialSample(grid_side=cfg.n, grid_dim=2, x=x, y=y)
    if return_errors:
        return sample, eps
    return sample


def stationary_v1(cfg: SimulationConfig) -> np.ndarray:
    """Covariance of the unweighted cosine series (the ``a = inf`` covariate covariance).

    ``Cov(X_k, X_l) = n_terms * scale^2 / 2 * exp(-freq_sd2 * (t_k - t_l)^2 / 2)``.
    """
    t = np.asarray(cfg.t_offsets, dtype=float)
    dt2 = (t[:, None] - t[None, :]) ** 2
    return 0.5 * cfg.n_terms * cfg.series_scale ** 2 * np.exp(-0.5 * cfg.freq_sd2 * dt2)


def population_v1(cfg: SimulationConfig) -> np.ndarray:
    """Site-averaged second moment of the weighted covariates, ``mean(D^2) * stationary_v1``."""
    D = spatial_weight_grid(cfg.n, cfg.a)
    return float(np.mean(D ** 2)) * stationary_v1(cfg)
