import numpy as np
import pytest

ACCEPTANCE_LINES = []


def random_spd(rng, p, cond_floor=0.05):
    A = rng.standard_normal((p, p))
    return A @ A.T / p + cond_floor * np.eye(p)


def naive_criterion(K, v1, v12):
    """Direct transcription: ||v12 - v1 A^T (A v1 A^T)^-1 A v12|| with explicit A."""
    p = v1.shape[0]
    A = np.zeros((len(K), p))
    for row, k in enumerate(sorted(K)):
        A[row, k - 1] = 1.0
    Pi = A.T @ np.linalg.inv(A @ v1 @ A.T) @ A
    T = v12 - v1 @ Pi @ v12
    return float(np.sqrt(np.trace(T @ T.T)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
