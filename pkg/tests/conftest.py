import numpy as np
import pytest

from renormalens.channels import gaussian_convolution_channel
from renormalens.statespace import DensityMatrix, EffectiveHamiltonian1D, build_gibbs_1d


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def single_mode():
    """Standard normal on [-10, 10] (601 points) with sigma = 2 convolution."""
    rho = build_gibbs_1d(EffectiveHamiltonian1D({2: 0.5}), -10.0, 10.0, 601)
    return rho, gaussian_convolution_channel(-10.0, 10.0, 601, 2.0)


def random_state(rng, d, floor=0.05):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    r = m @ m.conj().T + floor * np.eye(d)
    return DensityMatrix(r / np.trace(r).real)


def random_hermitian(rng, d, traceless=False):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = m + m.conj().T
    if traceless:
        h -= np.trace(h) / d * np.eye(d)
    return h
