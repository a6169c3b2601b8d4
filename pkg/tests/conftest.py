import pytest

from iaoverhead import LinkBudget, NetworkConfig


@pytest.fixture
def bench_cfg():
    """The 3-user 2x2 single-stream network used throughout the experiments."""
    return NetworkConfig(K=3, Nt=2, Nr=2, d=1)


@pytest.fixture
def unit_budget():
    return LinkBudget.from_snr(10.0, d=1, gamma=1.0)
