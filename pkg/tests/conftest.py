import numpy as np
import pytest

from ephunt.verify import random_diagonalizable


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


@pytest.fixture
def random_set():
    """Three seeded 4x4 non-Hermitian matrices well away from any EP."""
    g = np.random.default_rng(11)
    return [random_diagonalizable(g) for _ in range(3)]


def complex_matrix(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
