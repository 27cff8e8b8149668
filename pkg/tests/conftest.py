import numpy as np
import pytest

from cogbeam.channel import SystemConfig, UncertaintyModel


def random_hermitian(rng, n, scale=1.0):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (X + X.conj().T) / 2


def random_pd(rng, n, floor=0.5):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return X @ X.conj().T + floor * np.eye(n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cfg55():
    return SystemConfig(nt=5, nr=5, p_su=100.0, p_pu=100.0, noise_power=1.0, i_limit=10 ** 0.5)


@pytest.fixture
def unc():
    return UncertaintyModel(e=1.0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section('acceptance criteria')
        for name in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[name].line())
