"""Independent brute-force computations used to validate the closed forms.

Each oracle reaches the same quantity by a different route: truncated Fock
matrices instead of covariance algebra, grid discretizations instead of
Gaussian identities, Monte Carlo instead of Wick contractions.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from .channels import StochasticChannel, gaussian_convolution_channel
from .errors import InvalidParameter
from .spectra import principal_spectrum
from .statespace import (
    DensityMatrix,
    DiscreteDistribution,
    EffectiveHamiltonian1D,
    build_gibbs_1d,
    observable_inner,
)


def worker_count(default=1):
    """Thread cap from RENORMALENS_THREADS."""
    try:
        return max(1, int(os.environ.get("RENORMALENS_THREADS", default)))
    except ValueError:
        return default


# ---------------------------------------------------------------------------
# truncated Fock space


def fock_quadratures(dim):
    """q = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2) truncated to ``dim`` levels."""
    a = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    q = (a + a.conj().T) / np.sqrt(2.0)
    p = 1j * (a.conj().T - a) / np.sqrt(2.0)
    return q, p


def thermal_fock_state(nbar, dim):
    """Thermal state with mean occupation ``nbar`` truncated and renormalized."""
    if not nbar > 0:
        raise InvalidParameter("nbar must be positive")
    r = nbar / (nbar + 1.0)
    w = r ** np.arange(dim)
    return DensityMatrix(np.diag(w / w.sum()).astype(complex))


def fock_linear_metric(rho: DensityMatrix):
    """2x2 BKM metric of the centered quadratures q, p at ``rho``."""
    q, p = fock_quadratures(rho.dim)
    ops = []
    for r in (q, p):
        mean = np.trace(rho.entries @ r).real
        ops.append(r - mean * np.eye(rho.dim))
    tol = 0.0
    return np.array([[observable_inner(rho, a, b, rank_tolerance=tol) for b in ops] for a in ops])


def fock_sector_relevances(nbar_in, nbar_out, dim=60):
    """Relevances of q, p for a channel mapping thermal nbar_in to thermal nbar_out (X = 1).

    Solves the generalized eigenproblem K v = eta K' v with both metrics
    computed from dense truncated-Fock BKM kernels.
    """
    k = fock_linear_metric(thermal_fock_state(nbar_in, dim))
    kp = fock_linear_metric(thermal_fock_state(nbar_out, dim))
    eta = scipy.linalg.eigh(k, kp, eigvals_only=True)
    return np.sort(eta)[::-1]


# ---------------------------------------------------------------------------
# two-dimensional grid discretization


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Uniform tensor grid; points are rows of ``points`` in C order."""

    axis0: np.ndarray
    axis1: np.ndarray

    @property
    def points(self):
        g0, g1 = np.meshgrid(self.axis0, self.axis1, indexing="ij")
        return np.column_stack([g0.ravel(), g1.ravel()])

    @property
    def cell(self):
        return float((self.axis0[1] - self.axis0[0]) * (self.axis1[1] - self.axis1[0]))


def _gaussian_pdf(points, cov):
    inv = np.linalg.inv(cov)
    quad = np.einsum("ni,ij,nj->n", points, inv, points)
    return np.exp(-0.5 * quad) / (2 * np.pi * np.sqrt(np.linalg.det(cov)))


def gaussian_grid_2d(A, n=61, width=6.0):
    """Grid discretization of N(0, A) on [-w s_i, w s_i] per axis, s_i = sqrt(A_ii)."""
    A = np.asarray(A, dtype=float)
    s = np.sqrt(np.diag(A))
    grid = Grid2D(np.linspace(-width * s[0], width * s[0], n), np.linspace(-width * s[1], width * s[1], n))
    return grid, DiscreteDistribution.from_weights(_gaussian_pdf(grid.points, A), grid.cell)


def gaussian_channel_2d(grid_in: Grid2D, X, Y, n_out=61, width=6.0, out_cov=None):
    """Stochastic kernel p(z | x) = N(z; X^T x, Y) between 2-d grids, columns normalized."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    s = np.sqrt(np.diag(out_cov)) if out_cov is not None else np.full(2, width)
    grid_out = Grid2D(np.linspace(-width * s[0], width * s[0], n_out),
                      np.linspace(-width * s[1], width * s[1], n_out))
    z = grid_out.points
    mean = grid_in.points @ X
    inv = np.linalg.inv(Y)
    r = z[:, None, :] - mean[None, :, :]
    k = np.exp(-0.5 * np.einsum("yxi,ij,yxj->yx", r, inv, r))
    k /= k.sum(axis=0, keepdims=True) * grid_out.cell
    return grid_out, StochasticChannel(k, grid_in.cell, grid_out.cell)


def generating_function(points, A, f):
    """G(f)(x) = exp(f.x - (f, A f)/2)."""
    f = np.asarray(f, dtype=float)
    return np.exp(points @ f - 0.5 * f @ A @ f)


# ---------------------------------------------------------------------------
# Monte Carlo and perturbed grids


def mc_quartic_metric(tau, coupling, max_degree, n_samples=10**7, seed=0, chunk=10**6, workers=None):
    """Monte Carlo <X1 psi_m psi_n> for one mode, X1 = -(g/24)(phi^4 - <phi^4>), phi = tau xi.

    Returns (mean, standard error) matrices over orthonormal Hermite functions.
    Chunks draw from independent streams spawned from ``seed``.
    """
    n_chunks = -(-int(n_samples) // chunk)
    seeds = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(chunk, n_samples - i * chunk) for i in range(n_chunks)]

    def run(args):
        ss, size = args
        xi = np.random.default_rng(ss).standard_normal(size)
        w = -coupling / 24.0 * tau**4 * (xi**4 - 3.0)
        return kernels.hermite_product_sums(xi, w, max_degree)

    n_workers = workers or worker_count()
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(run, zip(seeds, sizes)))
    else:
        parts = [run(a) for a in zip(seeds, sizes)]
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / n_samples
    var = np.clip(s2 / n_samples - mean**2, 0.0, None)
    return mean, np.sqrt(var / n_samples)


def quartic_grid_relevances(tau, sigma, lam, n_levels=4, half_width=14.0, n_points=901):
    """Top relevances of convolution by ``sigma`` at exp(-x^2/(2 tau^2) - lam x^4/24)."""
    h = EffectiveHamiltonian1D({2: 0.5 / tau**2, 4: lam / 24.0})
    rho = build_gibbs_1d(h, -half_width, half_width, n_points)
    e = gaussian_convolution_channel(-half_width, half_width, n_points, sigma)
    return principal_spectrum(e, rho, n_levels).eta
