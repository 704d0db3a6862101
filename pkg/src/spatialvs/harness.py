"""Monte Carlo experiment runner, metrics, and reports.

Every replication of every parameter cell draws an independent training and
test dataset from a seed derived from ``(master_seed, cell, replication)``.
Methods are fit on the training data and scored on the test data. Results are
keyed by ``(cell, replication)`` and written in key order, so output does not
depend on how many worker threads ran.
"""

from __future__ import annotations

import configparser
import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .baselines import baseline_select
from .exceptions import ConfigError, EmptyCell
from .selection import POSITION, PenaltyConfig, select_variables
from .simulator import DEFAULT_B, SimulationConfig, generate_dataset
from .tuning import TuningGrid, fit_restricted_ols, optimize_tuning, predict

METHODS = ("OM", "SCAD", "Hard", "LASSO")
_BASELINE_KIND = {"SCAD": "scad", "Hard": "hard", "LASSO": "lasso"}
THREADS_ENV = "SPATIALVS_THREADS"

RAW_HEADER = ["method", "n", "a", "kappa2", "rep", "seed", "mse", "nv_count",
              "exact_match", "selected_set", "failed"]
METRICS_HEADER = ["method", "n", "a", "kappa2", "mse", "pe", "nv", "n_reps", "n_failed"]


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameter grids and run settings.

    With ``tuning`` set, ``(gamma, beta)`` is chosen per replication by cross
    validation on the training data; otherwise the fixed ``gamma``/``beta``
    are used.
    """

    replications: int = 500
    n_list: tuple = (12,)
    a_list: tuple = (25.0,)
    kappa2_list: tuple = (1.0,)
    methods: tuple = METHODS
    tuning: TuningGrid | None = None
    gamma: float = 0.25
    beta: float = 0.25
    dim_penalty_arg: str = POSITION
    B: tuple = DEFAULT_B
    master_seed: int = 0
    output_path: str = "results.csv"
    workers: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        for name in ("n_list", "a_list", "kappa2_list", "methods"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be non-empty")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ConfigError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
        PenaltyConfig(self.gamma, self.beta, dim_penalty_arg=self.dim_penalty_arg)

    def cells(self):
        """Parameter cells ``(n, kappa2, a)`` in table order."""
        return list(product(self.n_list, self.kappa2_list, self.a_list))

    @property
    def true_set(self) -> tuple:
        return tuple(j + 1 for j, b in enumerate(self.B) if b != 0)


@dataclass(frozen=True)
class RawRow:
    method: str
    n: int
    a: float
    kappa2: float
    rep: int
    seed: int
    mse: float
    nv_count: int
    exact_match: int
    selected_set: tuple
    failed: int


@dataclass(frozen=True)
class MetricsRow:
    method: str
    n: int
    a: float
    kappa2: float
    mse: float
    pe: float
    nv: float
    n_reps: int
    n_failed: int


def replication_seed(master_seed: int, cell: int, rep: int) -> int:
    """64-bit seed for one replication, labelled by ``(cell, rep)``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(cell, rep))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(hi) << 32 | int(lo)


def _rngs(seed: int):
    train = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    test = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    return train, test


def _test_mse(train, test, selected) -> float:
    b0, coef = fit_restricted_ols(train.x, train.y, selected)
    resid = test.y - predict(b0, coef, test.x)
    return float(np.sum(resid ** 2) / test.n_sites)


def _select_om(train, cfg: ExperimentConfig):
    pen = PenaltyConfig(cfg.gamma, cfg.beta, dim_penalty_arg=cfg.dim_penalty_arg)
    if cfg.tuning is not None:
        gamma, beta, _ = optimize_tuning(train, cfg.tuning, pen)
        pen = pen.with_rates(gamma, beta)
    return select_variables(train, pen).i1_hat.members


def run_replication(cfg: ExperimentConfig, cell: int, rep: int) -> list:
    """All method rows for one replication of one cell."""
    n, kappa2, a = cfg.cells()[cell]
    seed = replication_seed(cfg.master_seed, cell, rep)
    sim = SimulationConfig(n=n, a=a, kappa2=kappa2, B=np.array([cfg.B]))
    train_rng, test_rng = _rngs(seed)
    train = generate_dataset(sim, train_rng)
    test = generate_dataset(sim, test_rng)
    truth = cfg.true_set
    rows = []
    for method in cfg.methods:
        try:
            if method == "OM":
                selected = _select_om(train, cfg)
            else:
                selected = baseline_select(train, _BASELINE_KIND[method]).members
            mse = _test_mse(train, test, selected)
            rows.append(RawRow(method, n, a, kappa2, rep, seed, mse, len(selected),
                               int(tuple(selected) == truth), tuple(selected), 0))
        except Exception:  # noqa: BLE001 - flag and continue
            rows.append(RawRow(method, n, a, kappa2, rep, seed, math.nan, 0, 0, (), 1))
    return rows


def resolve_workers(requested: int | None = None) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return max(1, int(requested or 1))


def run_replications(cfg: ExperimentConfig, workers: int | None = None) -> list:
    """Run every ``(cell, replication)`` and return rows sorted by key, then method order."""
    workers = resolve_workers(workers if workers is not None else cfg.workers)
    keys = [(c, r) for c in range(len(cfg.cells())) for r in range(cfg.replications)]
    if workers == 1:
        results = {k: run_replication(cfg, *k) for k in keys}
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {k: pool.submit(run_replication, cfg, *k) for k in keys}
            results = {k: f.result() for k, f in futures.items()}
    return [row for k in sorted(results) for row in results[k]]


def stream_labels(cfg: ExperimentConfig) -> list:
    return [(c, r) for c in range(len(cfg.cells())) for r in range(cfg.replications)]


def compute_metrics(raw, true_set) -> list:
    """Aggregate raw rows per ``(method, n, a, kappa2)`` in order of first appearance.

    ``pe`` counts exact recoveries over all replications of the cell, flagged
    ones included (a failure is never a recovery). ``mse`` and ``nv`` average
    the unflagged rows only.
    """
    if not raw:
        raise EmptyCell("no raw results to aggregate")
    truth = tuple(sorted(true_set))
    groups = {}
    for row in raw:
        groups.setdefault((row.method, row.n, row.a, row.kappa2), []).append(row)
    out = []
    for (method, n, a, kappa2), rows in groups.items():
        ok = [r for r in rows if not r.failed]
        exact = sum(1 for r in ok if tuple(sorted(r.selected_set)) == truth)
        out.append(MetricsRow(
            method=method, n=n, a=a, kappa2=kappa2,
            mse=float(np.mean([r.mse for r in ok])) if ok else math.nan,
            pe=exact / len(rows),
            nv=float(np.mean([r.nv_count for r in ok])) if ok else math.nan,
            n_reps=len(rows), n_failed=len(rows) - len(ok)))
    return out


def _fmt(v) -> str:
    return repr(float(v))


def write_raw_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_HEADER)
        for r in rows:
            w.writerow([r.method, r.n, _fmt(r.a), _fmt(r.kappa2), r.rep, r.seed, _fmt(r.mse),
                        r.nv_count, r.exact_match, "|".join(str(i) for i in r.selected_set),
                        r.failed])


def read_raw_csv(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RAW_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [RawRow(r["method"], int(r["n"]), float(r["a"]), float(r["kappa2"]),
                       int(r["rep"]), int(r["seed"]), float(r["mse"]), int(r["nv_count"]),
                       int(r["exact_match"]),
                       tuple(int(i) for i in r["selected_set"].split("|") if i),
                       int(r["failed"]))
                for r in reader]


def write_metrics_csv(metrics, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        for m in metrics:
            w.writerow([m.method, m.n, _fmt(m.a), _fmt(m.kappa2), _fmt(m.mse), _fmt(m.pe),
                        _fmt(m.nv), m.n_reps, m.n_failed])


def read_metrics_csv(path) -> list:
    with open(path, newline="") as fh:
        return [MetricsRow(r["method"], int(r["n"]), float(r["a"]), float(r["kappa2"]),
                           float(r["mse"]), float(r["pe"]), float(r["nv"]),
                           int(r["n_reps"]), int(r["n_failed"]))
                for r in csv.DictReader(fh)]


def format_tables(metrics) -> str:
    """Plain-text tables: one block per ``n``, rows by ``kappa2`` then method, columns per ``a``."""
    ns = list(dict.fromkeys(m.n for m in metrics))
    lines = []
    for n in ns:
        block = [m for m in metrics if m.n == n]
        a_vals = list(dict.fromkeys(m.a for m in block))
        lookup = {(m.method, m.kappa2, m.a): m for m in block}
        lines.append(f"n = {n} (n^2 = {n * n} sites)")
        head = f"{'':10s}" + "".join(f"| a = {a:<19g}" for a in a_vals)
        lines.append(head)
        lines.append(f"{'':10s}" + "| MSE     NV     PE      " * len(a_vals))
        for kappa2 in dict.fromkeys(m.kappa2 for m in block):
            lines.append(f"kappa2 = {kappa2:g}")
            for method in dict.fromkeys(m.method for m in block if m.kappa2 == kappa2):
                cells = []
                for a in a_vals:
                    m = lookup.get((method, kappa2, a))
                    cells.append("| " + (f"{m.mse:<7.3f} {m.nv:<6.3f} {m.pe:<7.3f} " if m
                                         else " " * 23))
                lines.append(f"  {method:8s}" + "".join(cells))
        failed = sum(m.n_failed for m in block)
        if failed:
            lines.append(f"  ({failed} flagged replications excluded from MSE/NV)")
        lines.append("")
    return "\n".join(lines)


def emit_report(metrics, out_prefix, formats=("csv", "text")) -> list:
    """Write ``<out_prefix>.csv`` and/or ``<out_prefix>.txt``; returns the paths written."""
    if not metrics:
        raise EmptyCell("no metrics to report")
    written = []
    for fmt in formats:
        path = f"{out_prefix}.csv" if fmt == "csv" else f"{out_prefix}.txt"
        try:
            if fmt == "csv":
                write_metrics_csv(metrics, path)
            elif fmt == "text":
                with open(path, "w") as fh:
                    fh.write(format_tables(metrics))
            else:
                raise ValueError(f"unknown report format {fmt!r}")
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
        written.append(path)
    return written


# -- configuration files ------------------------------------------------------

_SCHEMA = {
    "experiment": {"replications", "master_seed", "output_path", "methods", "workers"},
    "grid": {"n_list", "a_list", "kappa2_list"},
    "model": {"b"},
    "tuning": {"mode", "gamma", "beta", "gamma_values", "beta_values", "folds",
               "dim_penalty_arg"},
}


def _floats(text):
    return tuple(float(v) for v in text.replace(" ", "").split(",") if v)


def load_config(path) -> ExperimentConfig:
    """Read an INI-style experiment file. Unknown sections or keys are errors.

    Example::

        [experiment]
        replications = 500
        master_seed = 20240101
        methods = OM, SCAD, Hard, LASSO

        [grid]
        n_list = 12, 24
        a_list = 5, 10, 25
        kappa2_list = 1, 4, 9

        [tuning]
        mode = cv
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path}")
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        extra = set(parser[section]) - _SCHEMA[section]
        if extra:
            raise ConfigError(f"{path}: unknown keys in [{section}]: {sorted(extra)}")
    kw = {}
    ex = parser["experiment"] if parser.has_section("experiment") else {}
    if "replications" in ex:
        kw["replications"] = int(ex["replications"])
    if "master_seed" in ex:
        kw["master_seed"] = int(ex["master_seed"])
    if "output_path" in ex:
        kw["output_path"] = ex["output_path"]
    if "workers" in ex:
        kw["workers"] = int(ex["workers"])
    if "methods" in ex:
        kw["methods"] = tuple(m.strip() for m in ex["methods"].split(",") if m.strip())
    if parser.has_section("grid"):
        g = parser["grid"]
        if "n_list" in g:
            kw["n_list"] = tuple(int(v) for v in _floats(g["n_list"]))
        if "a_list" in g:
            kw["a_list"] = _floats(g["a_list"])
        if "kappa2_list" in g:
            kw["kappa2_list"] = _floats(g["kappa2_list"])
    if parser.has_section("model") and "b" in parser["model"]:
        kw["B"] = _floats(parser["model"]["b"])
    if parser.has_section("tuning"):
        t = parser["tuning"]
        mode = t.get("mode", "fixed")
        if mode not in ("fixed", "cv"):
            raise ConfigError(f"{path}: tuning mode must be 'fixed' or 'cv', got {mode!r}")
        if "gamma" in t:
            kw["gamma"] = float(t["gamma"])
        if "beta" in t:
            kw["beta"] = float(t["beta"])
        if "dim_penalty_arg" in t:
            kw["dim_penalty_arg"] = t["dim_penalty_arg"]
        if mode == "cv":
            grid = {}
            if "gamma_values" in t:
                grid["gamma_values"] = _floats(t["gamma_values"])
            if "beta_values" in t:
                grid["beta_values"] = _floats(t["beta_values"])
            if "folds" in t:
                grid["folds"] = "loo" if t["folds"] == "loo" else int(t["folds"])
            kw["tuning"] = TuningGrid(**grid)
    try:
        return ExperimentConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# -- paired recovery studies --------------------------------------------------

def om_recovery(n: int, a: float, kappa2: float, replications: int, seed: int = 0,
                pen: PenaltyConfig | None = None, B=DEFAULT_B) -> np.ndarray:
    """Exact-recovery indicator of the criterion-based selection per replication.

    Replication ``r`` uses a seed that depends only on ``(seed, r)``, so
    calls that differ in ``a`` or ``kappa2`` see the same random draws and
    can be compared pairwise.
    """
    pen = pen or PenaltyConfig()
    sim = SimulationConfig(n=n, a=a, kappa2=kappa2, B=np.array([B]))
    truth = sim.true_set
    hits = np.zeros(replications, dtype=bool)
    for r in range(replications):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r,)))
        sample = generate_dataset(sim, rng)
        hits[r] = select_variables(sample, pen).i1_hat.members == truth
    return hits
