import numpy as np
import pytest

from spatialvs.estimation import SpatialSample
from spatialvs.exceptions import AllFoldsFailed, FoldTooSmall
from spatialvs.simulator import SimulationConfig, generate_dataset
from spatialvs.tuning import (TuningGrid, cross_validate, cv_score, fit_restricted_ols,
                              fold_indices, optimize_tuning, read_cv_table, write_cv_table)


@pytest.fixture(scope="module")
def noisy():
    return generate_dataset(SimulationConfig(n=8, kappa2=1.0, seed=21))


def test_grid_validation():
    with pytest.raises(ValueError):
        TuningGrid(gamma_values=(0.5,))
    with pytest.raises(ValueError):
        TuningGrid(beta_values=())
    with pytest.raises(ValueError):
        TuningGrid(folds=1)
    assert len(TuningGrid().points()) == 25
    assert TuningGrid((0.1, 0.2), (0.3,)).points() == [(0.1, 0.3), (0.2, 0.3)]


def test_fold_indices():
    assert len(fold_indices(144)) == 144  # leave-one-out default
    folds = fold_indices(576)
    assert len(folds) == 10
    assert sorted(np.concatenate(folds)) == list(range(576))
    assert list(fold_indices(7, 3)[1]) == [1, 4]
    with pytest.raises(ValueError):
        fold_indices(3, 5)


def test_restricted_ols_exact_fit(rng):
    x = rng.standard_normal((30, 4))
    y = 2.0 + x[:, [1, 3]] @ [1.5, -0.5]
    b0, coef = fit_restricted_ols(x, y, (2, 4))
    assert b0[0] == pytest.approx(2.0)
    np.testing.assert_allclose(coef[:, 0], [0, 1.5, 0, -0.5], atol=1e-12)


def test_cv_zero_for_correct_selection_on_noiseless_data():
    s = generate_dataset(SimulationConfig(n=8, kappa2=0.0, seed=4))
    res = cross_validate(s, 0.25, 0.25, selector=lambda x, y: (1, 2, 3, 4))
    assert res.cv <= 1e-10 * np.var(s.y)
    assert res.failed_folds == 0 and res.n_folds == 64


def test_cv_constant_response(rng):
    x = rng.standard_normal((36, 3))
    s = SpatialSample(6, 2, x, np.full(36, 3.0))
    assert cv_score(s, 0.25, 0.25) == pytest.approx(0.0, abs=1e-20)


def test_cv_non_negative(noisy):
    for g, b in [(0.05, 0.05), (0.25, 0.45), (0.45, 0.15)]:
        assert cv_score(noisy, g, b) >= 0.0


def test_cv_invariant_to_row_order(noisy, rng):
    perm = rng.permutation(noisy.n_sites)
    shuffled = SpatialSample(noisy.grid_side, noisy.grid_dim, noisy.x[perm], noisy.y[perm])
    assert cv_score(shuffled, 0.25, 0.25, folds="loo") == pytest.approx(
        cv_score(noisy, 0.25, 0.25, folds="loo"), rel=1e-9)


def test_optimize_single_point(noisy):
    g, b, table = optimize_tuning(noisy, TuningGrid((0.15,), (0.35,)))
    assert (g, b) == (0.15, 0.35) and len(table) == 1
    assert table[0].cv == pytest.approx(cv_score(noisy, 0.15, 0.35))


def test_optimize_full_table(noisy):
    grid = TuningGrid()
    g, b, table = optimize_tuning(noisy, grid)
    assert [(r.gamma, r.beta) for r in table] == grid.points()
    cvs = [r.cv for r in table]
    best = table[int(np.argmin(cvs))]
    assert (g, b) == (best.gamma, best.beta)
    assert min(cvs) == pytest.approx(cv_score(noisy, g, b))


def test_optimize_ties_go_to_first_point(rng):
    x = rng.standard_normal((25, 3))
    s = SpatialSample(5, 2, x, np.ones(25))  # every grid point scores 0
    g, b, table = optimize_tuning(s, TuningGrid((0.35, 0.15), (0.45, 0.05)))
    assert (g, b) == (0.35, 0.45)
    assert len({r.cv for r in table}) == 1


def test_fold_too_small(rng):
    s = SpatialSample(2, 2, rng.standard_normal((4, 6)), rng.standard_normal(4))
    with pytest.raises(FoldTooSmall):
        cv_score(s, 0.25, 0.25)


def test_all_folds_failed(rng):
    x = rng.standard_normal((25, 3))
    x[:, 1] = 0.0  # singular covariate block in every fold
    s = SpatialSample(5, 2, x, rng.standard_normal(25))
    with pytest.raises(AllFoldsFailed):
        cross_validate(s, 0.25, 0.25)
    with pytest.raises(AllFoldsFailed):
        optimize_tuning(s, TuningGrid((0.25,), (0.25,)))


def test_cv_table_round_trip(noisy, tmp_path):
    _, _, table = optimize_tuning(noisy, TuningGrid((0.05, 0.25), (0.15,), folds=4))
    path = tmp_path / "cv.csv"
    write_cv_table(table, path)
    assert path.read_text().splitlines()[0] == "gamma,beta,cv,failed_folds"
    assert read_cv_table(path) == table


@pytest.mark.slow
def test_cv_grows_with_noise():
    # paired draws: same seed, covariates identical across noise levels
    low, high = [], []
    for seed in range(20):
        cfg = SimulationConfig(n=12, seed=seed)
        low.append(cv_score(generate_dataset(cfg.replace(kappa2=0.5)), 0.25, 0.25))
        high.append(cv_score(generate_dataset(cfg.replace(kappa2=4.0)), 0.25, 0.25))
    assert np.mean(high) > np.mean(low)
