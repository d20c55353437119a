"""Closed-form relevance spectra for Gaussian states and channels.

Classical single mode: convolving N(0, tau^2) with noise of variance sigma^2
has principal observables He_n(x / tau) with relevance eta^n,
eta = tau^2 / (tau^2 + sigma^2).

Classical multimode: for covariance A and channel (X, Y) the generating
functions G(f) = exp(phi(f) - (f, A f)/2) satisfy E^dag R^dag G(f) = G(H f)
with H = (1 + A^-1 X^-T Y X^-1)^-1. The A-orthonormal eigenvectors f_k of H
give one-particle observables phi(f_k); higher principal observables are
products of Hermite polynomials with product relevances.

Quantum: the span of the canonical coordinates of decoupled modes is
invariant under E^dag R^dag, whose matrix there is X K'^-1 X^T K with K, K'
the BKM metric on linear observables at rho and E(rho).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import factorial
from typing import Dict, List, Sequence, Tuple

import numpy as np
import scipy.linalg
from numpy.polynomial import hermite_e

from .channels import GaussianChannelSpec
from .errors import InvalidParameter, ModeCouplingDetected, SingularX, ValidationError
from .statespace import ClassicalGaussianState, QuantumGaussianState

COND_GUARD = 1e12
COUPLING_TOL = 1e-8


# ---------------------------------------------------------------------------
# one classical mode


def single_mode_eta(tau, sigma):
    if not (tau > 0 and sigma > 0):
        raise InvalidParameter("tau and sigma must be positive")
    return tau**2 / (tau**2 + sigma**2)


def single_mode_relevances(tau, sigma, n_max):
    """[(n, eta^n, He_n monomial coefficients)] for n = 1..n_max.

    Coefficients are in increasing powers of u = x / tau.
    """
    if n_max < 1:
        raise InvalidParameter("n_max must be at least 1")
    eta = single_mode_eta(tau, sigma)
    out = []
    for n in range(1, n_max + 1):
        coeffs = hermite_e.herme2poly([0] * n + [1])
        out.append((n, eta**n, np.asarray(coeffs, dtype=float)))
    return out


# ---------------------------------------------------------------------------
# multimode classical


@dataclass(frozen=True, eq=False)
class HMatrix:
    """H together with its A-orthonormal eigenvectors (columns of ``modes``)."""

    H: np.ndarray
    A: np.ndarray
    eta: np.ndarray
    modes: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.H.shape[0]

    def symmetry_defect(self) -> float:
        """max |A H - H^T A|."""
        return float(np.abs(self.A @ self.H - self.H.T @ self.A).max())


def _spd_solve(m, b, what):
    try:
        c = scipy.linalg.cho_factor(m)
    except np.linalg.LinAlgError as exc:
        raise ValidationError("%s is not positive definite" % what) from exc
    if np.linalg.cond(m) > COND_GUARD:
        raise ValidationError("%s is ill-conditioned" % what)
    return scipy.linalg.cho_solve(c, b)


def classical_H(state: ClassicalGaussianState, chan: GaussianChannelSpec) -> HMatrix:
    """H = (1 + A^-1 X^-T Y X^-1)^-1 and its eigen-decomposition."""
    if chan.quantum:
        raise InvalidParameter("classical_H needs a classical channel")
    A = state.A
    X = chan.X
    if X.shape != A.shape:
        raise InvalidParameter("X must be square and match A")
    s = np.linalg.svd(X, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise SingularX("X is not invertible")
    xinv = np.linalg.inv(X)
    noise = xinv.T @ chan.Y @ xinv
    noise = 0.5 * (noise + noise.T)
    H = _spd_solve(A + noise, A, "A + X^-T Y X^-1")
    sym = A @ H
    sym = 0.5 * (sym + sym.T)
    eta, f = scipy.linalg.eigh(sym, A)
    order = np.argsort(eta)[::-1]
    return HMatrix(H, A.copy(), eta[order], f[:, order])


@dataclass(frozen=True, eq=False)
class PrincipalPolynomial:
    """prod_k He_{m_k}(xi_k) with xi_k = phi(f_k); the derivative of G in those directions.

    ``occupation[k]`` is m_k. ``norm2`` is its squared metric norm prod m_k!.
    """

    occupation: Tuple[int, ...]
    relevance: float
    directions: np.ndarray = field(repr=False)

    @property
    def degree(self) -> int:
        return sum(self.occupation)

    @property
    def modes(self) -> Tuple[int, ...]:
        return tuple(k for k, m in enumerate(self.occupation) for _ in range(m))

    @property
    def norm2(self) -> float:
        return float(np.prod([factorial(m) for m in self.occupation]))

    def coefficients(self) -> Dict[Tuple[int, ...], float]:
        """Monomial coefficients in the variables xi_k."""
        per_mode = [hermite_e.herme2poly([0] * m + [1]) for m in self.occupation]
        out = {}
        for powers in itertools.product(*[range(len(c)) for c in per_mode]):
            c = float(np.prod([per_mode[k][p] for k, p in enumerate(powers)]))
            if c != 0.0:
                out[tuple(powers)] = c
        return out

    def __call__(self, phi):
        """Evaluate at field configurations ``phi[..., n_modes]``."""
        xi = np.asarray(phi, dtype=float) @ self.directions
        val = np.ones(xi.shape[:-1])
        for k, m in enumerate(self.occupation):
            if m:
                val = val * hermite_e.hermeval(xi[..., k], [0] * m + [1])
        return val


def occupations(n_modes, max_degree, min_degree=1):
    """Occupation tuples ordered by degree, then lexicographically by mode multiset."""
    out = []
    for deg in range(min_degree, max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(n_modes), deg):
            occ = [0] * n_modes
            for k in combo:
                occ[k] += 1
            out.append(tuple(occ))
    return out


def principal_polynomials(h: HMatrix, degree: int) -> List[PrincipalPolynomial]:
    """All principal polynomial observables up to ``degree`` with product relevances."""
    if degree < 1:
        raise InvalidParameter("degree must be at least 1")
    return [
        PrincipalPolynomial(occ, float(np.prod(h.eta ** np.array(occ))), h.modes)
        for occ in occupations(h.n_modes, degree)
    ]


# ---------------------------------------------------------------------------
# quantum Gaussian states


def _log_ratio(nu):
    # beta * omega of a thermal mode with symplectic eigenvalue nu
    return np.log1p(2.0 / (2.0 * nu - 1.0))


def linear_metric(A, Delta, method="bkm"):
    """Metric on linear observables Phi(f): (f, K g) = <Phi(f), Phi(g)>_rho.

    ``"bkm"`` is exact: K = A^(1/2) h(C^T C) A^(1/2) with C = A^(1/2) Delta^-1
    A^(1/2) and h(nu^2) = 1 / (nu log((2 nu + 1)/(2 nu - 1))), which for a
    thermal mode gives 1 / (beta omega) per quadrature. ``"asymptotic"`` is
    the high-temperature approximation Omega_rho(a) ~ a rho, i.e. K = A.
    """
    A = np.asarray(A, dtype=float)
    if method == "asymptotic":
        return A.copy()
    if method != "bkm":
        raise InvalidParameter("unknown metric method %r" % method)
    w, v = np.linalg.eigh(A)
    root = (v * np.sqrt(w)) @ v.T
    c = root @ np.linalg.inv(Delta) @ root
    s, u = np.linalg.eigh(c.T @ c)
    nu = np.sqrt(np.clip(s, 0.0, None))
    if np.any(nu <= 0.5 + 1e-12):
        raise ValidationError("state is pure in some mode; the BKM metric diverges")
    h = 1.0 / (nu * _log_ratio(nu))
    k = root @ (u * h) @ u.T @ root
    return 0.5 * (k + k.T)


@dataclass(frozen=True, eq=False)
class QuadraticSector:
    """Sector matrices and relevances on the span of selected canonical coordinates."""

    E: np.ndarray
    K: np.ndarray
    K_prime: np.ndarray
    eta: np.ndarray
    vectors: np.ndarray
    coordinates: Tuple[int, ...]

    def matrix(self):
        """E K'^-1 E^T K, the sector components of E^dag R^dag."""
        return self.E @ np.linalg.solve(self.K_prime, self.E.T @ self.K)

    def rayleigh(self, f):
        """Relevance of the linear observable with coefficient vector ``f``."""
        f = np.asarray(f, dtype=float)
        kf = self.K @ f
        num = kf @ self.E @ np.linalg.solve(self.K_prime, self.E.T @ kf)
        return float(num / (f @ kf))


def _block_coupling(m, idx, rest):
    if not rest:
        return 0.0
    return float(max(np.abs(m[np.ix_(idx, rest)]).max(), np.abs(m[np.ix_(rest, idx)]).max()))


def quantum_quadratic_sector(state: QuantumGaussianState, chan: GaussianChannelSpec,
                             modes: Sequence[int], metric="bkm") -> QuadraticSector:
    """Relevances of linear observables of ``modes`` (E^dag R^dag restricted there)."""
    if not chan.quantum:
        raise InvalidParameter("quantum channel required")
    if chan.X.shape != state.A.shape:
        raise InvalidParameter("channel and state dimensions differ")
    idx = sorted({c for m in modes for c in (2 * m, 2 * m + 1)})
    if not idx or idx[-1] >= state.A.shape[0]:
        raise InvalidParameter("mode index out of range")
    rest = [i for i in range(state.A.shape[0]) if i not in idx]
    B = chan.output_covariance(state.A)
    for name, m in (("A", state.A), ("X^T A X + Y", B), ("Delta", state.Delta), ("X", chan.X)):
        scale = max(1.0, np.abs(m).max())
        if _block_coupling(m, idx, rest) > COUPLING_TOL * scale:
            raise ModeCouplingDetected("%s couples the selected modes to the rest" % name)
    sel = np.ix_(idx, idx)
    delta = state.Delta[sel]
    K = linear_metric(state.A[sel], delta, metric)
    Kp = linear_metric(B[sel], delta, metric)
    E = chan.X[sel]
    lhs = K @ E @ np.linalg.solve(Kp, E.T @ K)
    eta, vec = scipy.linalg.eigh(0.5 * (lhs + lhs.T), K)
    order = np.argsort(eta)[::-1]
    return QuadraticSector(E, K, Kp, eta[order], vec[:, order], tuple(idx))


# ---------------------------------------------------------------------------
# Klein-Gordon field


@dataclass(frozen=True, eq=False)
class KleinGordonModel:
    """Thermal Klein-Gordon field in d = 1 on a finite set of momenta.

    Field resolutions ``y_phi``, ``y_pi`` enter the channel as additive noise
    variances y_phi^2, y_pi^2 on each real mode; ``sigma`` is the spatial
    resolution, attenuating mode k by exp(-k^2 sigma^2 / 2).
    """

    m: float
    beta: float
    y_phi: float
    y_pi: float
    sigma: float
    k_grid: np.ndarray

    def __post_init__(self):
        for name in ("m", "beta", "y_phi", "y_pi", "sigma"):
            if not getattr(self, name) > 0:
                raise InvalidParameter("%s must be positive" % name)
        if self.y_phi * self.y_pi < 1.0:
            raise InvalidParameter(
                "uncertainty relation violated: y_phi * y_pi = %g < 1" % (self.y_phi * self.y_pi))
        k = np.atleast_1d(np.array(self.k_grid, dtype=float))
        if k.ndim != 1 or k.size == 0:
            raise InvalidParameter("k_grid must be a nonempty 1-d array")
        k.setflags(write=False)
        object.__setattr__(self, "k_grid", k)

    @classmethod
    def lattice(cls, n_sites, m, beta, y_phi, y_pi, sigma, spacing=1.0):
        """Periodic lattice momenta 2 pi j / (n_sites spacing), j in [-n/2, n/2)."""
        j = np.arange(n_sites) - n_sites // 2
        return cls(m, beta, y_phi, y_pi, sigma, 2 * np.pi * j / (n_sites * spacing))

    def omega(self, k):
        return np.sqrt(np.asarray(k, dtype=float) ** 2 + self.m**2)

    def validity_note(self):
        """The relevance formulas are leading order in 1 / (y_phi y_pi)."""
        return {"y_squared": self.y_phi * self.y_pi, "asymptotic_in": "y_phi*y_pi >> 1"}

    def mode_state(self, k) -> QuantumGaussianState:
        """Thermal state of the real mode k for H = (pi^2 + omega^2 phi^2) / 2."""
        w = float(self.omega(k))
        c = 0.5 / np.tanh(0.5 * self.beta * w)
        return QuantumGaussianState(np.diag([c / w, c * w]))

    def mode_channel(self, k) -> GaussianChannelSpec:
        x = np.exp(-0.5 * (float(k) * self.sigma) ** 2)
        return GaussianChannelSpec(x * np.eye(2), np.diag([self.y_phi**2, self.y_pi**2]), quantum=True)

    def sector(self, k, metric="bkm") -> QuadraticSector:
        return quantum_quadratic_sector(self.mode_state(k), self.mode_channel(k), [0], metric)

    def sector_relevances(self, k, metric="bkm"):
        """(eta_phi, eta_pi) from the exact sector computation."""
        sec = self.sector(k, metric)
        return sec.rayleigh([1.0, 0.0]), sec.rayleigh([0.0, 1.0])


def _thermal_term(model, k):
    bw = model.beta * model.omega(k)
    return 0.5 * bw / np.tanh(0.5 * bw)


def eta_kg_phi(model: KleinGordonModel, k):
    """1 / (beta w/2 coth(beta w/2) + beta w^2 y_phi^2 e^{k^2 sigma^2}), valid for y_phi y_pi >> 1."""
    k = np.asarray(k, dtype=float)
    w2 = model.omega(k) ** 2
    return 1.0 / (_thermal_term(model, k) + model.beta * w2 * model.y_phi**2 * np.exp((k * model.sigma) ** 2))


def eta_kg_pi(model: KleinGordonModel, k):
    """1 / (beta w/2 coth(beta w/2) + beta y_pi^2 e^{k^2 sigma^2}), valid for y_phi y_pi >> 1."""
    k = np.asarray(k, dtype=float)
    return 1.0 / (_thermal_term(model, k) + model.beta * model.y_pi**2 * np.exp((k * model.sigma) ** 2))


def kg_field_norm(model: KleinGordonModel, k):
    """<phi_k, phi_k>_rho = 1 / (beta omega_k^2)."""
    return 1.0 / (model.beta * model.omega(k) ** 2)


def kg_distinguishability_phi(model: KleinGordonModel, k):
    """D(phi_k) = eta_k^phi <phi_k, phi_k>_rho."""
    return eta_kg_phi(model, k) * kg_field_norm(model, k)


def euclidean_eta(m, sigma, y, k, beta=1.0):
    """H eigenvalue of the Euclidean free field, 1 / (1 + beta y^2 w_k^2 e^{sigma^2 k^2})."""
    if not (m > 0 and y > 0 and sigma > 0 and beta > 0):
        raise InvalidParameter("m, beta, sigma and y must be positive")
    k = np.asarray(k, dtype=float)
    return 1.0 / (1.0 + beta * y**2 * (k**2 + m**2) * np.exp((sigma * k) ** 2))


def euclidean_lattice(model: KleinGordonModel):
    """Real-space classical state and channel of the Euclidean field on a periodic lattice.

    Sites are 0..N-1 with N = len(k_grid); mode k has variance 1 / (beta w_k^2),
    is attenuated by exp(-k^2 sigma^2 / 2) and receives noise y_phi^2.
    """
    k = model.k_grid
    n = k.size
    sites = np.arange(n)
    f = np.exp(1j * np.outer(sites, k)) / np.sqrt(n)

    def real_space(diag):
        m = (f * diag) @ f.conj().T
        if np.abs(m.imag).max() > 1e-10 * np.abs(m).max():
            raise InvalidParameter("k_grid is not closed under k -> -k")
        m = m.real
        return 0.5 * (m + m.T)

    cov = real_space(1.0 / (model.beta * model.omega(k) ** 2))
    x = real_space(np.exp(-0.5 * (k * model.sigma) ** 2))
    chan = GaussianChannelSpec(x, model.y_phi**2 * np.eye(n))
    return ClassicalGaussianState(cov), chan
