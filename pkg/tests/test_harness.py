import math

import numpy as np
import pytest

from spatialvs import harness
from spatialvs.exceptions import ConfigError, EmptyCell
from spatialvs.harness import (RAW_HEADER, ExperimentConfig, RawRow, compute_metrics,
                               emit_report, load_config, read_metrics_csv, read_raw_csv,
                               replication_seed, run_replications, stream_labels,
                               write_raw_csv)

SMALL = dict(replications=2, n_list=(6,), a_list=(5.0, 25.0), kappa2_list=(1.0,),
             methods=("OM", "LASSO"))


def _row(method="OM", rep=0, mse=1.0, sel=(1, 2, 3, 4), failed=0, a=25.0):
    return RawRow(method, 12, a, 1.0, rep, rep, mse, len(sel), int(sel == (1, 2, 3, 4)),
                  sel, failed)


def test_row_count_and_order():
    cfg = ExperimentConfig(**SMALL)
    rows = run_replications(cfg)
    assert len(rows) == 2 * 2 * 2
    assert [r.method for r in rows[:2]] == ["OM", "LASSO"]
    assert [(r.a, r.rep) for r in rows[::2]] == [(5.0, 0), (5.0, 1), (25.0, 0), (25.0, 1)]


def test_rerun_byte_identical(tmp_path):
    cfg = ExperimentConfig(**SMALL)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_raw_csv(run_replications(cfg, workers=1), a)
    write_raw_csv(run_replications(cfg, workers=3), b)
    assert a.read_bytes() == b.read_bytes()


def test_thread_env_overrides(monkeypatch):
    monkeypatch.setenv(harness.THREADS_ENV, "4")
    assert harness.resolve_workers(1) == 4
    monkeypatch.delenv(harness.THREADS_ENV)
    assert harness.resolve_workers(None) == 1


def test_noiseless_om_exact():
    cfg = ExperimentConfig(replications=3, n_list=(12,), kappa2_list=(0.0,), methods=("OM",))
    (m,) = compute_metrics(run_replications(cfg), cfg.true_set)
    assert m.pe == 1.0 and m.nv == 4.0
    assert m.mse <= 1e-10


def test_metrics_example():
    raw = [_row(rep=0, mse=1.0), _row(rep=1, mse=3.0, sel=(1, 2, 3)),
           _row(rep=2, failed=1, mse=math.nan, sel=())]
    (m,) = compute_metrics(raw, (1, 2, 3, 4))
    assert m.pe == pytest.approx(1 / 3)
    assert m.mse == 2.0 and m.nv == 3.5
    assert (m.n_reps, m.n_failed) == (3, 1)


def test_metrics_accounting_invariant(rng):
    raw = []
    for rep in range(50):
        u = rng.uniform()
        if u < 0.2:
            raw.append(_row(rep=rep, failed=1, sel=(), mse=math.nan))
        elif u < 0.6:
            raw.append(_row(rep=rep, sel=(1, 2, 3, 4, 6)))
        else:
            raw.append(_row(rep=rep))
    (m,) = compute_metrics(raw, (1, 2, 3, 4))
    inexact = sum(1 for r in raw if not r.failed and r.selected_set != (1, 2, 3, 4))
    assert round(m.pe * m.n_reps) + inexact + m.n_failed == m.n_reps


def test_metrics_grouping_order():
    raw = [_row("OM", a=5.0), _row("LASSO", a=5.0), _row("OM", a=25.0)]
    keys = [(m.method, m.a) for m in compute_metrics(raw, (1, 2, 3, 4))]
    assert keys == [("OM", 5.0), ("LASSO", 5.0), ("OM", 25.0)]


def test_empty_inputs():
    with pytest.raises(EmptyCell):
        compute_metrics([], (1,))
    with pytest.raises(EmptyCell):
        emit_report([], "x")


def test_raw_csv_round_trip(tmp_path):
    rows = [_row(), _row(rep=1, sel=(), failed=1, mse=math.nan)]
    path = tmp_path / "raw.csv"
    write_raw_csv(rows, path)
    assert path.read_text().splitlines()[0] == ",".join(RAW_HEADER)
    back = read_raw_csv(path)
    assert back[0] == rows[0]
    assert back[1].selected_set == () and math.isnan(back[1].mse)


def test_report_files(tmp_path):
    metrics = compute_metrics([_row(), _row("LASSO")], (1, 2, 3, 4))
    paths = emit_report(metrics, tmp_path / "rep")
    assert [p[-4:] for p in paths] == [".csv", ".txt"]
    assert read_metrics_csv(paths[0]) == metrics
    assert "LASSO" in (tmp_path / "rep.txt").read_text()


def test_report_unwritable_path(tmp_path):
    metrics = compute_metrics([_row()], (1, 2, 3, 4))
    with pytest.raises(OSError, match="missing"):
        emit_report(metrics, tmp_path / "missing" / "rep")


def test_stream_labels_and_seeds_unique():
    cfg = ExperimentConfig(replications=50, n_list=(12, 24), a_list=(5.0, 10.0, 25.0),
                           kappa2_list=(1.0, 4.0, 9.0))
    labels = stream_labels(cfg)
    assert len(set(labels)) == len(labels) == 18 * 50
    seeds = {replication_seed(cfg.master_seed, c, r) for c, r in labels}
    assert len(seeds) == len(labels)
    assert replication_seed(1, 0, 0) != replication_seed(2, 0, 0)


def test_flag_and_continue(monkeypatch):
    def broken(sample, kind):
        raise np.linalg.LinAlgError("boom")

    monkeypatch.setattr(harness, "baseline_select", broken)
    rows = run_replications(ExperimentConfig(**SMALL))
    lasso = [r for r in rows if r.method == "LASSO"]
    assert all(r.failed and math.isnan(r.mse) for r in lasso)
    assert not any(r.failed for r in rows if r.method == "OM")
    for m in compute_metrics(rows, (1, 2, 3, 4)):
        if m.method == "LASSO":
            assert m.n_failed == m.n_reps == 2 and m.pe == 0.0 and math.isnan(m.mse)


def test_load_config(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("[experiment]\nreplications = 7\nmaster_seed = 99\nmethods = OM, Hard\n"
                    "[grid]\nn_list = 12, 24\na_list = 5, 25\nkappa2_list = 1\n"
                    "[model]\nb = 1, 0, 2\n"
                    "[tuning]\nmode = cv  # per replication\ngamma_values = 0.15, 0.25\nfolds = 4\n")
    cfg = load_config(path)
    assert cfg.replications == 7 and cfg.master_seed == 99
    assert cfg.methods == ("OM", "Hard")
    assert cfg.n_list == (12, 24) and cfg.a_list == (5.0, 25.0)
    assert cfg.B == (1.0, 0.0, 2.0) and cfg.true_set == (1, 3)
    assert cfg.tuning.gamma_values == (0.15, 0.25) and cfg.tuning.folds == 4
    assert len(cfg.cells()) == 4


@pytest.mark.parametrize("text", [
    "[experiment]\nreplicates = 3\n",
    "[extras]\nx = 1\n",
    "[tuning]\nmode = grid\n",
    "[experiment]\nmethods = OM, Ridge\n",
])
def test_load_config_errors(tmp_path, text):
    path = tmp_path / "bad.ini"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_config(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.ini")
