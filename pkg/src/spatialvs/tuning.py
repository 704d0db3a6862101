"""Cross-validated choice of the penalty rates ``(gamma, beta)``.

Each held-out site is predicted by an ordinary least squares fit (with
intercept) of ``y`` on the covariates selected from the retained sites.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .estimation import SpatialSample, cov_pair_from_arrays
from .exceptions import AllFoldsFailed, FoldTooSmall, SingularSubmatrix
from .selection import PenaltyConfig, _CriterionCache, select_from_cov

DEFAULT_VALUES = (0.05, 0.15, 0.25, 0.35, 0.45)
#: Largest number of sites for which the default is leave-one-out.
LOO_MAX_SITES = 256
DEFAULT_KFOLD = 10


@dataclass(frozen=True)
class TuningGrid:
    """Search grid. ``folds`` is ``"loo"``, a fold count, or ``None`` for the size-based default."""

    gamma_values: tuple = DEFAULT_VALUES
    beta_values: tuple = DEFAULT_VALUES
    folds: object = None

    def __post_init__(self):
        object.__setattr__(self, "gamma_values", tuple(float(v) for v in self.gamma_values))
        object.__setattr__(self, "beta_values", tuple(float(v) for v in self.beta_values))
        if not self.gamma_values or not self.beta_values:
            raise ValueError("tuning grid must be non-empty")
        for v in self.gamma_values + self.beta_values:
            if not 0.0 < v < 0.5:
                raise ValueError(f"grid value {v} outside (0, 1/2)")
        if self.folds not in (None, "loo") and (not isinstance(self.folds, int) or self.folds < 2):
            raise ValueError(f"folds must be 'loo', an integer >= 2, or None; got {self.folds!r}")

    def points(self):
        return [(g, b) for g in self.gamma_values for b in self.beta_values]


@dataclass(frozen=True)
class CVResult:
    cv: float
    failed_folds: int
    n_folds: int

    @property
    def failure_fraction(self) -> float:
        return self.failed_folds / self.n_folds


def fold_indices(n_sites: int, folds=None) -> list:
    """Held-out site indices per fold; K-fold assigns site ``s`` to fold ``s mod K``."""
    if folds is None:
        folds = "loo" if n_sites <= LOO_MAX_SITES else DEFAULT_KFOLD
    if folds == "loo":
        return [np.array([s]) for s in range(n_sites)]
    k = int(folds)
    if k > n_sites:
        raise ValueError(f"{k} folds for {n_sites} sites")
    sites = np.arange(n_sites)
    return [sites[sites % k == f] for f in range(k)]


def fit_restricted_ols(x, y, selected: Sequence[int]):
    """Least squares of ``y`` on an intercept plus the selected columns of ``x`` (1-based).

    Returns ``(intercept, coef)`` where ``coef`` is ``p x q`` with zero rows
    for unselected variables.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    cols = np.asarray(sorted(selected), dtype=np.intp) - 1
    design = np.column_stack([np.ones(x.shape[0]), x[:, cols]])
    sol, *_ = np.linalg.lstsq(design, y, rcond=None)
    coef = np.zeros((x.shape[1], y.shape[1]))
    coef[cols] = sol[1:]
    return sol[0], coef


def predict(intercept, coef, x) -> np.ndarray:
    return intercept + np.asarray(x, dtype=float) @ coef


def _cv_grid(sample: SpatialSample, points, folds, pen: PenaltyConfig,
             selector: Callable | None = None):
    """Accumulate held-out squared errors for every grid point.

    Returns arrays ``sse``, ``n_held`` and ``failed`` (one entry per point)
    plus the fold count.
    """
    x, y = sample.x, sample.y
    N, p = x.shape
    plan = fold_indices(N, folds)
    sse = np.zeros(len(points))
    held = np.zeros(len(points), dtype=int)
    failed = np.zeros(len(points), dtype=int)
    n, d = sample.grid_side, sample.grid_dim
    for test in plan:
        train = np.setdiff1d(np.arange(N), test, assume_unique=True)
        if train.size < p + 1:
            raise FoldTooSmall(f"training fold of {train.size} sites needs at least {p + 1}")
        xt, yt = x[train], y[train]
        if selector is not None:
            selections = [tuple(selector(xt, yt))] * len(points)
        else:
            cache = _CriterionCache(cov_pair_from_arrays(xt, yt))
            selections = []
            for gamma, beta in points:
                try:
                    res = select_from_cov(cache.cov, pen.with_rates(gamma, beta), n, d, cache)
                    selections.append(res.i1_hat.members)
                except SingularSubmatrix:
                    selections.append(None)
        fits = {}
        for k, sel in enumerate(selections):
            if sel is None:
                failed[k] += 1
                continue
            if sel not in fits:
                b0, coef = fit_restricted_ols(xt, yt, sel)
                resid = y[test] - predict(b0, coef, x[test])
                fits[sel] = float(np.sum(resid ** 2))
            sse[k] += fits[sel]
            held[k] += test.size
    return sse, held, failed, len(plan)


def cross_validate(sample: SpatialSample, gamma: float, beta: float, folds=None,
                   pen: PenaltyConfig | None = None,
                   selector: Callable | None = None) -> CVResult:
    """Cross-validated prediction error at one ``(gamma, beta)``.

    ``selector(x_train, y_train)`` replaces the penalized selection with a
    fixed rule when given (used to check the prediction step in isolation).
    Folds whose selection hits a singular block are skipped and counted.
    """
    pen = (pen or PenaltyConfig()).with_rates(gamma, beta)
    sse, held, failed, n_folds = _cv_grid(sample, [(gamma, beta)], folds, pen, selector)
    if held[0] == 0:
        raise AllFoldsFailed(f"all {n_folds} folds failed at gamma={gamma}, beta={beta}")
    return CVResult(cv=float(sse[0] / held[0]), failed_folds=int(failed[0]), n_folds=n_folds)


def cv_score(sample: SpatialSample, gamma: float, beta: float, folds=None,
             pen: PenaltyConfig | None = None) -> float:
    return cross_validate(sample, gamma, beta, folds, pen).cv


@dataclass(frozen=True)
class CVRow:
    gamma: float
    beta: float
    cv: float
    failed_folds: int


def optimize_tuning(sample: SpatialSample, grid: TuningGrid | None = None,
                    pen: PenaltyConfig | None = None):
    """Minimize the CV score over the grid.

    Returns ``(gamma_opt, beta_opt, table)`` where ``table`` lists a
    :class:`CVRow` per grid point in row-major order (gamma outer). Ties go to
    the first point in that order.
    """
    grid = grid or TuningGrid()
    pen = pen or PenaltyConfig()
    points = grid.points()
    sse, held, failed, _ = _cv_grid(sample, points, grid.folds, pen)
    with np.errstate(invalid="ignore", divide="ignore"):
        cv = np.where(held > 0, sse / np.maximum(held, 1), np.nan)
    table = [CVRow(g, b, float(c), int(f)) for (g, b), c, f in zip(points, cv, failed)]
    if np.all(np.isnan(cv)):
        raise AllFoldsFailed("every fold failed at every grid point")
    best = int(np.nanargmin(cv))
    return points[best][0], points[best][1], table


def write_cv_table(table, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gamma", "beta", "cv", "failed_folds"])
        for row in table:
            w.writerow([repr(row.gamma), repr(row.beta), repr(row.cv), row.failed_folds])


def read_cv_table(path):
    with open(path, newline="") as fh:
        return [CVRow(float(r["gamma"]), float(r["beta"]), float(r["cv"]), int(r["failed_folds"]))
                for r in csv.DictReader(fh)]
