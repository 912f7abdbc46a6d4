import os
import sys

import pytest

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from app.services.model import NoiseSpectrum, TwoAxisNoise, WorkingPoint  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo and T2-search acceptance runs")


@pytest.fixture
def quasi_static_noise():
    """Quasi-static noise on both axes, no 1/f part."""
    return TwoAxisNoise(sz=NoiseSpectrum(sigma_qs=0.004), sx=NoiseSpectrum(sigma_qs=0.003))


@pytest.fixture
def tilted_point():
    return WorkingPoint(bx=0.3, bz=0.4)


@pytest.fixture
def one_over_f():
    return NoiseSpectrum(amplitude=1e-3, alpha=1.0)
