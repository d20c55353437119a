"""Relevance spectra of coarse-graining channels.

An observer who sees a system only through a channel E can distinguish
states along the principal features of E with strength given by their
relevances. This package computes those spectra for classical and quantum
states, gives closed forms for Gaussian states and channels, corrects them
perturbatively for quartic interactions, and follows renormalization
trajectories inside equivalence classes of effective theories.
"""
__version__ = "0.1.0"

from . import errors
from .channels import (
    GaussianChannelSpec,
    QuantumChannel,
    StochasticChannel,
    apply,
    gaussian_convolution_channel,
)
from .gaussian_exact import KleinGordonModel, classical_H, quantum_quadratic_sector
from .kernels import BACKEND
from .spectra import (
    RelevanceSpectrum,
    distinguishability,
    distinguishability_density,
    equivalence_test,
    principal_spectrum,
    relevance_of,
)
from .statespace import (
    ClassicalGaussianState,
    DensityMatrix,
    DiscreteDistribution,
    EffectiveHamiltonian1D,
    GridDistribution,
    QuantumGaussianState,
    build_gibbs_1d,
)

__all__ = [
    "BACKEND",
    "ClassicalGaussianState",
    "DensityMatrix",
    "DiscreteDistribution",
    "EffectiveHamiltonian1D",
    "GaussianChannelSpec",
    "GridDistribution",
    "KleinGordonModel",
    "QuantumChannel",
    "QuantumGaussianState",
    "RelevanceSpectrum",
    "StochasticChannel",
    "apply",
    "build_gibbs_1d",
    "classical_H",
    "distinguishability",
    "distinguishability_density",
    "equivalence_test",
    "errors",
    "gaussian_convolution_channel",
    "principal_spectrum",
    "quantum_quadratic_sector",
    "relevance_of",
]
