import numpy as np
import pytest

from crod.signal_model import make_instance


@pytest.fixture(scope="session")
def small_instance():
    """64x128 partial Fourier instance with moderate noise."""
    return make_instance("partial-fourier", 64, 128, 0.1, 1.0, 0.02, seed=11)


@pytest.fixture(scope="session")
def noiseless_instance():
    """64x128 noiseless planted instance (solver oracle territory)."""
    return make_instance("partial-fourier", 64, 128, 0.05, 1.0, 0.0, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
