"""Principal features, relevances and distinguishability.

The relevance operator ``R_rho E`` is self-adjoint in the information metric
at ``rho``. In metric-whitened coordinates it becomes ``W^T W`` where ``W``
maps whitened features at ``rho`` to whitened features at ``E(rho)``, so the
principal features follow from a dense symmetric eigenproblem. The
normalization direction (``sqrt(p)`` in whitened coordinates, always of
relevance 1) is removed before solving.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channels import Channel, QuantumChannel, StochasticChannel, apply, apply_linear
from .errors import DimensionMismatch, DimensionTooLarge, IncompleteSpan, InvalidParameter, ZeroFeature
from .statespace import (
    DEGENERACY_RTOL,
    DiscreteDistribution,
    _require_positive,
    center,
    expectation,
    metric_inner,
    observable_inner,
)

MAX_TANGENT_DIM = 4096
DEGENERATE_ETA_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RelevanceSpectrum:
    """Relevances in descending order with their features and observables.

    ``features[j]`` and ``observables[j]`` are arrays shaped like the state's
    density (classical) or matrix (quantum).
    """

    eta: np.ndarray
    features: np.ndarray
    observables: np.ndarray
    rho_ref: object = field(repr=False)

    def __len__(self):
        return len(self.eta)


# ---------------------------------------------------------------------------
# whitened representation


def _hermitian_basis(d):
    """Real orthonormal basis of d x d Hermitian matrices as (index pairs, kinds)."""
    pairs = [(i, i, 0) for i in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            pairs.append((i, j, 1))
            pairs.append((i, j, 2))
    return pairs


def _basis_matrices(d, pairs):
    out = np.zeros((len(pairs), d, d), dtype=complex)
    r = 1.0 / np.sqrt(2.0)
    for n, (i, j, kind) in enumerate(pairs):
        if kind == 0:
            out[n, i, i] = 1.0
        elif kind == 1:
            out[n, i, j] = out[n, j, i] = r
        else:
            out[n, i, j] = 1j * r
            out[n, j, i] = -1j * r
    return out


def _coordinates(m, pairs):
    """Coordinates of Hermitian matrices ``m[..., d, d]`` in the basis ``pairs``."""
    idx_i = np.array([p[0] for p in pairs])
    idx_j = np.array([p[1] for p in pairs])
    kind = np.array([p[2] for p in pairs])
    vals = m[..., idx_i, idx_j]
    s2 = np.sqrt(2.0)
    return np.where(kind == 0, vals.real, np.where(kind == 1, s2 * vals.real, s2 * vals.imag))


def _metric_weights(p, pairs):
    from . import kernels

    k = kernels.log_divided_difference(p, DEGENERACY_RTOL * p[-1])
    return np.array([k[i, j] for i, j, _ in pairs])


class _Whitened:
    """Whitened map W, trace direction, and the maps back to features/observables."""

    def __init__(self, e: Channel, rho):
        _require_positive(rho)
        erho = apply(e, rho)
        _require_positive(erho)
        self.rho = rho
        self.erho = erho
        if isinstance(rho, DiscreteDistribution):
            if not isinstance(e, StochasticChannel):
                raise DimensionMismatch("classical state needs a stochastic channel")
            p = rho.probabilities
            q = erho.probabilities
            t = e.kernel * e.dx_out
            self.W = t * np.sqrt(p)[None, :] / np.sqrt(q)[:, None]
            self.trace_dir = np.sqrt(p)
            self._sqrt_p = np.sqrt(p)
        else:
            if not isinstance(e, QuantumChannel):
                raise DimensionMismatch("quantum state needs a Kraus channel")
            d, d_out = rho.dim, erho.dim
            self.pairs_in = _hermitian_basis(d)
            pairs_out = _hermitian_basis(d_out)
            p = rho.eigenvalues
            self.k_in = _metric_weights(p, self.pairs_in)
            k_out = _metric_weights(erho.eigenvalues, pairs_out)
            u = rho.eigenvectors
            v = erho.eigenvectors
            self.lab_basis = np.einsum("ab,nbc,dc->nad", u, _basis_matrices(d, self.pairs_in), u.conj())
            imgs = np.array([apply_linear(e, b / np.sqrt(kb)) for b, kb in zip(self.lab_basis, self.k_in)])
            imgs = np.einsum("ba,nbc,cd->nad", v.conj(), imgs, v)
            self.W = (_coordinates(imgs, pairs_out) * np.sqrt(k_out)[None, :]).T
            td = np.zeros(len(self.pairs_in))
            td[:d] = np.sqrt(p)
            self.trace_dir = td

    @property
    def dim(self):
        return self.W.shape[1]

    def feature(self, u):
        if isinstance(self.rho, DiscreteDistribution):
            return self._sqrt_p * u / self.rho.dx
        return np.tensordot(u / np.sqrt(self.k_in), self.lab_basis, axes=1)

    def observable(self, u):
        if isinstance(self.rho, DiscreteDistribution):
            return u / self._sqrt_p
        return np.tensordot(u * np.sqrt(self.k_in), self.lab_basis, axes=1)


def _complement_basis(s):
    """Orthonormal basis (columns) of the orthogonal complement of unit vector ``s``."""
    n = s.size
    e0 = np.zeros(n)
    e0[0] = 1.0
    sign = 1.0 if s[0] >= 0 else -1.0
    v = s + sign * e0
    v /= np.linalg.norm(v)
    h = np.eye(n) - 2.0 * np.outer(v, v)
    return h[:, 1:]


def _canonicalize(eta, vecs, tol=DEGENERATE_ETA_TOL):
    """Deterministic basis inside degenerate eigenspaces and a sign convention.

    Degenerate blocks are rotated to lower-trapezoidal form (QR of the
    transposed block); each vector's first coordinate above 1e-8 of its
    largest entry is made positive.
    """
    vecs = vecs.copy()
    n = len(eta)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(eta[stop] - eta[start]) <= tol * max(1.0, abs(eta[start])):
            stop += 1
        if stop - start > 1:
            block = vecs[:, start:stop]
            q, _ = np.linalg.qr(block.T)
            vecs[:, start:stop] = block @ q
        start = stop
    for j in range(n):
        col = vecs[:, j]
        big = np.flatnonzero(np.abs(col) > 1e-8 * np.abs(col).max())
        if big.size and col[big[0]] < 0:
            vecs[:, j] = -col
    return vecs


def principal_spectrum(e: Channel, rho, n_requested: Optional[int] = None,
                       eta_threshold: Optional[float] = None,
                       max_dim: int = MAX_TANGENT_DIM) -> RelevanceSpectrum:
    """Top principal features of ``e`` at ``rho``, ordered by relevance.

    ``n_requested`` defaults to the full tangent space; ``eta_threshold``
    additionally drops relevances below the threshold.
    """
    wh = _Whitened(e, rho)
    tangent = wh.dim - 1
    if tangent > max_dim:
        raise DimensionTooLarge("tangent dimension %d exceeds cap %d" % (tangent, max_dim))
    if n_requested is None:
        n_requested = tangent
    if not 1 <= n_requested <= tangent:
        raise InvalidParameter("n_requested must lie in [1, %d]" % tangent)
    q = _complement_basis(wh.trace_dir)
    wq = wh.W @ q
    gram = wq.T @ wq
    eta, v = np.linalg.eigh(0.5 * (gram + gram.T))
    order = np.argsort(eta)[::-1]
    eta = eta[order]
    u = q @ v[:, order]
    u = _canonicalize(eta, u)
    keep = n_requested
    if eta_threshold is not None:
        keep = min(keep, int(np.sum(eta >= eta_threshold)))
    eta = eta[:keep]
    u = u[:, :keep]
    features = np.array([wh.feature(u[:, j]) for j in range(keep)])
    observables = np.array([wh.observable(u[:, j]) for j in range(keep)])
    return RelevanceSpectrum(eta, features, observables, rho)


def relevance_of(e: Channel, rho, x) -> float:
    """Squared contraction <E(x), E(x)>_{E(rho)} / <x, x>_rho."""
    norm = metric_inner(rho, x, x)
    if norm <= 0 or not np.any(np.asarray(x)):
        raise ZeroFeature("feature has zero norm")
    erho = apply(e, rho)
    ex = apply_linear(e, x)
    return metric_inner(erho, ex, ex) / norm


@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    gaps: np.ndarray
    tol: float

    def __bool__(self):
        return self.equivalent


def equivalence_test(rho_a, rho_b, spectrum: RelevanceSpectrum, n: int, tol: float) -> EquivalenceReport:
    """Compare expectation values of the first ``n`` principal observables."""
    if n > len(spectrum):
        raise InvalidParameter("n exceeds the spectrum length")
    if not rho_a.same_space(rho_b) or not rho_a.same_space(spectrum.rho_ref):
        raise DimensionMismatch("states and spectrum live on different spaces")
    gaps = np.array([
        abs(expectation(rho_a, a) - expectation(rho_b, a)) for a in spectrum.observables[:n]
    ])
    return EquivalenceReport(bool(np.all(gaps <= tol)), gaps, float(tol))


def distinguishability(e: Channel, rho, a, spectrum: RelevanceSpectrum,
                       span_tol: float = 1e-6) -> float:
    """D(a) = <a, E^dag R^dag a>_rho, expanded in the principal observables.

    Only the traceless (centered) part of ``a`` contributes. Raises
    :class:`IncompleteSpan` if that part is not captured by the spectrum to
    relative accuracy ``span_tol``.
    """
    a0 = center(rho, a)
    norm2 = observable_inner(rho, a0, a0)
    # constants center to round-off
    if norm2 <= 1e-24 * max(1.0, observable_inner(rho, a, a)):
        return 0.0
    c = np.array([observable_inner(rho, a0, aj) for aj in spectrum.observables])
    residual = (norm2 - np.sum(c * c)) / norm2
    if residual > span_tol:
        raise IncompleteSpan("observable lies %.3g outside the computed span" % residual)
    return float(np.sum(spectrum.eta * c * c))


@dataclass(frozen=True)
class DensityReport:
    """Finite-volume distinguishability densities and the change between the last two volumes."""

    pairs: tuple
    last_relative_change: float

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)


def distinguishability_density(model, sigma_power: float = 1.0, volumes=(8, 16, 32, 64),
                               coupling: float = 1.0) -> DensityReport:
    """sigma^p D(A_S) / |S| for A_S = coupling * sum_{x in S} :phi(x)^2: on blocks S.

    The Euclidean field of ``model`` lives on a periodic lattice of
    ``len(model.k_grid)`` sites; S is the block of the first |S| sites.
    With phi(x) = sum_k alpha_xk xi_k in the principal modes xi_k (unit
    variance, relevance eta_k) and S_kl = sum_{x in S} alpha_xk alpha_xl,
    D = 2 coupling^2 tr(S diag(eta) S diag(eta)).
    """
    from .gaussian_exact import classical_H, euclidean_lattice

    volumes = [int(v) for v in volumes]
    n = model.k_grid.size
    if not volumes or any(b <= a for a, b in zip(volumes, volumes[1:])):
        raise InvalidParameter("volumes must be a nonempty ascending list")
    if volumes[0] < 1 or volumes[-1] > n:
        raise InvalidParameter("volumes must lie in [1, %d]" % n)
    state, chan = euclidean_lattice(model)
    h = classical_H(state, chan)
    alpha = state.A @ h.modes
    out = []
    for v in volumes:
        a = alpha[:v]
        s = a.T @ a
        se = s * h.eta[None, :]
        d = 2.0 * coupling**2 * float(np.sum(se * se.T))
        out.append((v, model.sigma**sigma_power * d / v))
    if len(out) > 1 and out[-2][1] != 0.0:
        change = abs(out[-1][1] - out[-2][1]) / abs(out[-2][1])
    else:
        change = float("nan") if len(out) == 1 else 0.0
    return DensityReport(tuple(out), float(change))
