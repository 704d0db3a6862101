import math

import numpy as np
import pytest

from spatialvs.datafiles import read_dataset_csv, write_dataset_csv
from spatialvs.exceptions import GridTooLarge
from spatialvs.selection import select_variables
from spatialvs.simulator import (A_INFINITE, SimulationConfig, error_correlation, generate_dataset,
                                 generate_errors, grid_sites, spatial_weight,
                                 spatial_weight_grid, stationary_v1)


def _brute_weight(i, j, n, a):
    total = 0.0
    for m in range(1, n + 1):
        for l in range(1, n + 1):
            total += math.exp(-math.hypot(i - m, j - l) / a)
    return total / n ** 2


def test_weight_two_by_two():
    want = 0.25 * (1 + 2 * math.exp(-0.5) + math.exp(-math.sqrt(2) / 2))
    assert spatial_weight(1, 1, 2, 2.0) == pytest.approx(want, abs=1e-15)


def test_weight_infinite_range():
    assert spatial_weight(1, 5, 7, A_INFINITE) == 1.0
    assert np.all(spatial_weight_grid(9, 1e12) == 1.0)


@pytest.mark.parametrize("n, a", [(3, 1.0), (6, 5.0), (9, 25.0)])
def test_weight_matches_brute_force(n, a):
    D = spatial_weight_grid(n, a)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            assert D[i - 1, j - 1] == pytest.approx(_brute_weight(i, j, n, a), rel=1e-12)


@pytest.mark.parametrize("n", [2, 5, 12, 24])
def test_weight_symmetries_exact(n):
    D = spatial_weight_grid(n, 25.0)
    assert np.array_equal(D, D.T)
    assert np.array_equal(D, D[::-1, ::-1])
    assert np.array_equal(D, D[::-1, :])


@pytest.mark.parametrize("n", range(2, 31))
def test_weight_coordinatewise_monotone(n):
    D = spatial_weight_grid(n, 5.0)
    half = D[: (n + 1) // 2]
    # moving a row index towards the edge never increases D
    assert np.all(np.diff(half, axis=0) >= -1e-15)


def test_weight_rejects_bad_input():
    with pytest.raises(ValueError):
        spatial_weight(0, 1, 3, 1.0)
    with pytest.raises(ValueError):
        spatial_weight(1, 1, 3, 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SimulationConfig(kappa2=-1.0)
    with pytest.raises(ValueError):
        SimulationConfig(a=0.0)
    with pytest.raises(ValueError):
        SimulationConfig(n=1)
    cfg = SimulationConfig()
    assert cfg.p == 6 and cfg.q == 1 and cfg.true_set == (1, 2, 3, 4)
    assert cfg.t_offsets == (1.0, 2.5, 4.0, 5.5, 7.0, 8.5)


def test_grid_sites_order():
    np.testing.assert_array_equal(grid_sites(2), [[1, 1], [1, 2], [2, 1], [2, 2]])


def test_dataset_shape_and_determinism():
    cfg = SimulationConfig(n=8, seed=42)
    a = generate_dataset(cfg)
    b = generate_dataset(cfg)
    assert a.x.shape == (64, 6) and a.y.shape == (64, 1)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    c = generate_dataset(cfg.replace(seed=43))
    assert not np.array_equal(a.x, c.x)


def test_response_equals_linear_part_plus_error():
    cfg = SimulationConfig(n=6, seed=3, kappa2=2.0)
    s, eps = generate_dataset(cfg, return_errors=True)
    np.testing.assert_allclose(s.y - s.x @ cfg.B.T, eps, atol=1e-12)


def test_zero_noise_gives_zero_errors():
    cfg = SimulationConfig(n=6, seed=1, kappa2=0.0)
    s, eps = generate_dataset(cfg, return_errors=True)
    assert not np.any(eps)
    # paired with the noisy config: same covariates from the same seed
    noisy = generate_dataset(cfg.replace(kappa2=4.0))
    assert np.array_equal(s.x, noisy.x)


def test_grid_too_large():
    with pytest.raises(GridTooLarge):
        generate_errors(SimulationConfig(n=65), np.random.default_rng(0))


def test_covariate_mean_zero():
    cfg = SimulationConfig(n=6, a=A_INFINITE * 10)
    draws = np.array([generate_dataset(cfg, np.random.default_rng(s)).x[0] for s in range(400)])
    mean = draws.mean(axis=0)
    se = draws.std(axis=0, ddof=1) / math.sqrt(len(draws))
    assert np.all(np.abs(mean) <= 3 * se)


def test_covariate_variance_infinite_range():
    cfg = SimulationConfig(n=4, a=1e12)
    draws = np.array([generate_dataset(cfg, np.random.default_rng(s)).x[5] for s in range(1000)])
    var = draws.var(axis=0)
    assert stationary_v1(cfg)[0, 0] == pytest.approx(1.0)
    np.testing.assert_allclose(var, 1.0, rtol=0.1)


def test_adjacent_covariates_positively_correlated():
    cfg = SimulationConfig(n=6, a=1e12)
    draws = np.vstack([generate_dataset(cfg, np.random.default_rng(s)).x for s in range(200)])
    corr = np.corrcoef(draws[:, 0], draws[:, 1])[0, 1]
    assert 0.0 < corr < 1.0
    # analytic value exp(-0.25 * 1.5^2 / 2)
    assert corr == pytest.approx(math.exp(-0.28125), abs=0.05)


@pytest.mark.slow
def test_error_field_covariance():
    n, reps, kappa2 = 12, 500, 2.0
    cfg = SimulationConfig(n=n, kappa2=kappa2)
    eps = np.array([generate_errors(cfg, np.random.default_rng(s))[:, 0] for s in range(reps)])
    field = eps.reshape(reps, n, n)
    lag0 = np.mean(field ** 2)
    lag1 = np.mean(field[:, :, :-1] * field[:, :, 1:])
    diag = np.mean(field[:, :-1, :-1] * field[:, 1:, 1:])
    assert lag0 == pytest.approx(kappa2, rel=0.1)
    assert lag1 == pytest.approx(kappa2 * math.exp(-1 / 9), rel=0.1)
    assert diag == pytest.approx(kappa2 * math.exp(-2 / 9), rel=0.1)


def test_error_correlation_entries():
    R = error_correlation(3)
    assert R[0, 0] == 1.0
    assert R[0, 1] == pytest.approx(math.exp(-1 / 9))
    assert R[0, 8] == pytest.approx(math.exp(-8 / 9))


def test_noiseless_recovery():
    s = generate_dataset(SimulationConfig(n=24, kappa2=0.0, seed=7))
    assert select_variables(s).i1_hat.members == (1, 2, 3, 4)


def test_csv_round_trip(tmp_path):
    s = generate_dataset(SimulationConfig(n=4, seed=2))
    path = tmp_path / "d.csv"
    write_dataset_csv(s, path)
    assert path.read_text().splitlines()[0] == "site_i,site_j,x1,x2,x3,x4,x5,x6,y1"
    back = read_dataset_csv(path)
    assert np.array_equal(back.x, s.x) and np.array_equal(back.y, s.y)


def test_csv_rejects_shuffled_rows(tmp_path):
    s = generate_dataset(SimulationConfig(n=3, seed=2))
    path = tmp_path / "d.csv"
    write_dataset_csv(s, path)
    lines = path.read_text().splitlines()
    lines[1], lines[2] = lines[2], lines[1]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError):
        read_dataset_csv(path)
