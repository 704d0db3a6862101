"""CSV exchange format for spatial samples.

Header: ``site_1, ..., site_d, x1..xp, y1..yq``. For the 2-D grids produced by
the simulator the site columns are named ``site_i`` and ``site_j``. Rows
must be in lexicographic site order.
"""

from __future__ import annotations

import csv

import numpy as np

from .estimation import SpatialSample

_SITE_2D = ("site_i", "site_j")


def _site_names(d: int):
    return list(_SITE_2D) if d == 2 else [f"site_{k}" for k in range(1, d + 1)]


def write_dataset_csv(sample: SpatialSample, path):
    header = (_site_names(sample.grid_dim)
              + [f"x{k}" for k in range(1, sample.p + 1)]
              + [f"y{k}" for k in range(1, sample.q + 1)])
    sites = sample.sites()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for s, xs, ys in zip(sites, sample.x, sample.y):
            w.writerow([int(v) for v in s] + [repr(float(v)) for v in xs]
                       + [repr(float(v)) for v in ys])


def read_dataset_csv(path) -> SpatialSample:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    site_cols = [k for k, h in enumerate(header) if h.startswith("site_")]
    x_cols = [k for k, h in enumerate(header) if h.startswith("x")]
    y_cols = [k for k, h in enumerate(header) if h.startswith("y")]
    if not site_cols or not x_cols or not y_cols:
        raise ValueError(f"{path}: header needs site_*, x* and y* columns, got {header}")
    data = np.array(rows, dtype=float)
    sites = data[:, site_cols].astype(int)
    d = len(site_cols)
    n = int(sites.max())
    expected = SpatialSample(grid_side=n, grid_dim=d, x=np.zeros((n ** d, 2)),
                             y=np.zeros(n ** d)).sites()
    if sites.shape != expected.shape or np.any(sites != expected):
        raise ValueError(f"{path}: rows do not cover the {n}^{d} grid in lexicographic order")
    return SpatialSample(grid_side=n, grid_dim=d, x=data[:, x_cols], y=data[:, y_cols])
