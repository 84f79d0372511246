import numpy as np
import pytest

from qbmlab import InitialState, paper_default_model, solve_normal_modes
from qbmlab.model import SpectralModel


def random_model(rng, n_osc, omega_in_band=True, beta=1.0, kappa=1.0):
    """Random well-conditioned model: separated frequencies, moderate couplings."""
    gaps = rng.uniform(0.01, 0.03, n_osc)
    freqs = 0.5 + np.cumsum(gaps)
    if omega_in_band:
        omega = float(rng.uniform(freqs[0], freqs[-1]))
    else:
        omega = float(freqs[-1] + rng.uniform(0.5, 1.0))
    signs = rng.choice([-1.0, 1.0], n_osc)
    coup = signs * rng.uniform(0.005, 0.03, n_osc)
    return SpectralModel(
        omega_sub=omega, beta=beta, kappa=kappa, bath_freqs=freqs, couplings=coup
    )


@pytest.fixture(scope="session")
def model_32():
    return paper_default_model(32)


@pytest.fixture(scope="session")
def modes_32(model_32):
    return solve_normal_modes(model_32)


@pytest.fixture(scope="session")
def init_32(model_32):
    return InitialState.thermal(model_32)


@pytest.fixture(scope="session")
def model_500():
    return paper_default_model(500)


@pytest.fixture(scope="session")
def modes_500(model_500):
    return solve_normal_modes(model_500)


@pytest.fixture(scope="session")
def init_500(model_500):
    return InitialState.thermal(model_500)
