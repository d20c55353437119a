"""First-order relevance corrections for a quartic perturbation of a Gaussian state.

Basis: orthonormal Fock states |m> = prod_k He_{m_k}(xi_k) / sqrt(m_k!) with
xi_k = phi(f_k) the principal one-particle observables of the unperturbed
problem (an :class:`~renormalens.gaussian_exact.HMatrix`). In this basis the
unperturbed metric K is the identity and E is diagonal with entries
prod_k eta_k^(m_k / 2).

The perturbed state is rho_lam ~ exp(-H0 - lam H_I) with
H_I = (g / 4!) sum_x phi(u_x)^4, so to first order rho_lam = rho (1 + lam X1)
with X1 = -(H_I - <H_I>). Writing f = sum_k s_k f_k, g = sum_k t_k f_k,

    K1(f, g) = <X1 G(f) G(g)>_rho
             = -(g/24) sum_x [b_x^4 + 6 a_x b_x^2] exp(s.t),

with b_x = sum_k u_xk (s_k + t_k), u_xk = (u_x, A f_k) and a_x = (u_x, A u_x).
The output metric L1 has the same form with u_xk replaced by
sqrt(eta_k) u_xk. Matrix elements are sqrt(m! m'!) times the coefficient of
s^m t^m'. The relevance operator in this basis is E L^-1 E K, whose first
order part is V1 = E^2 K1 - E L1 E.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import factorial
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import (
    BasisTooLarge,
    DegeneracyUnresolved,
    InvalidParameter,
    TruncationMismatch,
    UnsupportedInteraction,
)
from .gaussian_exact import HMatrix, occupations

MAX_BASIS = 2000
DEGENERATE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Occupations up to ``max_degree``, degree-major then lexicographic; index 0 is the vacuum."""

    n_modes: int
    max_degree: int
    states: Tuple[Tuple[int, ...], ...]
    index: Dict[Tuple[int, ...], int] = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def degrees(self) -> np.ndarray:
        return np.array([sum(m) for m in self.states])

    def creation(self, k) -> np.ndarray:
        """Matrix of a_k^dag; states pushed past ``max_degree`` are dropped."""
        a = np.zeros((self.dim, self.dim))
        for j, m in enumerate(self.states):
            up = list(m)
            up[k] += 1
            i = self.index.get(tuple(up))
            if i is not None:
                a[i, j] = np.sqrt(m[k] + 1)
        return a

    def annihilation(self, k) -> np.ndarray:
        return self.creation(k).T

    def conforms(self, other: "FockBasis") -> bool:
        return self.n_modes == other.n_modes and self.max_degree == other.max_degree


def fock_basis(h: HMatrix, max_degree: int) -> FockBasis:
    """Truncated Fock basis over the modes of ``h``."""
    if max_degree < 1:
        raise InvalidParameter("max_degree must be at least 1")
    n = h.n_modes
    size = factorial(n + max_degree) // (factorial(n) * factorial(max_degree))
    if size > MAX_BASIS:
        raise BasisTooLarge("basis dimension %d exceeds %d" % (size, MAX_BASIS))
    states = tuple(occupations(n, max_degree, min_degree=0))
    return FockBasis(n, max_degree, states, {m: i for i, m in enumerate(states)})


@dataclass(frozen=True, eq=False)
class FockOperator:
    matrix: np.ndarray
    basis: FockBasis = field(repr=False)

    def __getitem__(self, item):
        return self.matrix[item]

    def element(self, m, mp) -> float:
        return float(self.matrix[self.basis.index[tuple(m)], self.basis.index[tuple(mp)]])


@dataclass(frozen=True, eq=False)
class QuarticInteraction:
    """H_I = (coupling / 4!) sum_x phi(u_x)^4 with site functions ``sites[x]``."""

    sites: np.ndarray
    coupling: float = 1.0
    kind: str = "quartic"

    def __post_init__(self):
        if self.kind != "quartic":
            raise UnsupportedInteraction("only quartic interactions are supported, got %r" % self.kind)
        s = np.atleast_2d(np.array(self.sites, dtype=float))
        if not np.all(np.isfinite(s)):
            raise InvalidParameter("site functions must be finite")
        object.__setattr__(self, "sites", s)
        object.__setattr__(self, "coupling", float(self.coupling))

    @classmethod
    def local(cls, n_sites, coupling=1.0, sites=None):
        """Point interactions phi(x)^4 on the given lattice sites (default all)."""
        eye = np.eye(n_sites)
        idx = range(n_sites) if sites is None else sites
        return cls(eye[list(idx)], coupling)


def _mode_amplitudes(interaction: QuarticInteraction, h: HMatrix):
    if interaction.sites.shape[1] != h.A.shape[0]:
        raise InvalidParameter("site functions do not match the field dimension")
    u = interaction.sites @ h.A @ h.modes
    a = np.einsum("xi,ij,xj->x", interaction.sites, h.A, interaction.sites)
    return u, a


def _quartic_kernel(basis: FockBasis, u, a, coupling, exp_weights) -> np.ndarray:
    """Fock matrix of -(g/24) sum_x [b^4 + 6 a b^2] exp(sum_k w_k s_k t_k)."""
    n = basis.n_modes
    dim = basis.dim
    out = np.zeros((dim, dim))
    if coupling == 0.0 or u.size == 0:
        return out
    sums: Dict[Tuple[int, ...], float] = {}

    def site_sum(gamma):
        if gamma not in sums:
            mono = np.prod(u ** np.array(gamma), axis=1)
            weight = 24.0 if sum(gamma) == 4 else 12.0 * a
            sums[gamma] = float(np.sum(weight * mono))
        return sums[gamma]

    occ = np.array(basis.states)
    fact = np.array([[factorial(v) for v in m] for m in basis.states], dtype=float)
    norms = np.sqrt(np.prod(fact, axis=1))
    shifts = {r: [e for e in itertools.product(range(r + 1), repeat=n) if sum(e) == r] for r in range(3)}
    for i in range(dim):
        diff = occ[i] - occ
        l1 = np.abs(diff).sum(axis=1)
        for j in np.flatnonzero((l1 <= 4) & (l1 % 2 == 0)):
            if j < i:
                continue
            d = diff[j]
            lo = np.minimum(occ[i], occ[j])
            base_a = np.maximum(d, 0)
            base_b = np.maximum(-d, 0)
            total = 0.0
            for deg in (2, 4):
                r = (deg - int(l1[j])) // 2
                if r < 0:
                    continue
                for e in shifts[r]:
                    e = np.array(e)
                    if np.any(e > lo):
                        continue
                    alpha = base_a + e
                    beta = base_b + e
                    nn = lo - e
                    c = site_sum(tuple(alpha + beta))
                    c /= np.prod([factorial(v) for v in alpha]) * np.prod([factorial(v) for v in beta])
                    c *= np.prod([exp_weights[k] ** nn[k] / factorial(nn[k]) for k in range(n)])
                    total += c
            val = -coupling / 24.0 * norms[i] * norms[j] * total
            out[i, j] = out[j, i] = val
    return out


def kernel_K1(interaction: QuarticInteraction, h: HMatrix, max_degree: int) -> FockOperator:
    """First-order metric correction K1 in the Fock basis of ``h``."""
    basis = fock_basis(h, max_degree)
    u, a = _mode_amplitudes(interaction, h)
    return FockOperator(_quartic_kernel(basis, u, a, interaction.coupling, np.ones(h.n_modes)), basis)


def kernel_L1(interaction: QuarticInteraction, h: HMatrix, max_degree: int,
              X=None, h2: Optional[float] = None, route: str = "direct") -> FockOperator:
    """First-order output-metric correction L1.

    ``route="direct"`` uses the Gaussian identity L(f, g) = K(H^1/2 f, H^1/2 g)
    exp((f, A(1 - H) g)). ``route="printed"`` replaces the last factor by
    exp(h2 (H^1/2 f, X^-2 H^1/2 g)); it needs ``X`` and a scalar ``h2`` and
    agrees with the direct route when h2 equals the channel noise variance
    (scalar X and Y). The printed route requires the exponent to be diagonal
    in the modes.
    """
    basis = fock_basis(h, max_degree)
    u, a = _mode_amplitudes(interaction, h)
    root = np.sqrt(np.clip(h.eta, 0.0, None))
    if route == "direct":
        weights = np.ones(h.n_modes)
    elif route == "printed":
        if X is None or h2 is None:
            raise InvalidParameter("the printed route needs X and h2")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        xinv = np.linalg.inv(X)
        q = (h.modes * root).T @ (xinv.T @ xinv) @ (h.modes * root)
        off = q - np.diag(np.diag(q))
        if np.abs(off).max(initial=0.0) > 1e-10 * max(1.0, np.abs(q).max()):
            raise InvalidParameter("printed L relation is not diagonal in the modes")
        weights = h.eta + h2 * np.diag(q)
    else:
        raise InvalidParameter("unknown route %r" % route)
    return FockOperator(_quartic_kernel(basis, u * root, a, interaction.coupling, weights), basis)


def e_diagonal(h: HMatrix, basis: FockBasis) -> FockOperator:
    """E in the Fock basis: diag(prod_k eta_k^(m_k / 2))."""
    root = np.sqrt(np.clip(h.eta, 0.0, None))
    diag = np.array([np.prod(root ** np.array(m)) for m in basis.states])
    return FockOperator(np.diag(diag), basis)


def build_V1(k1: FockOperator, l1: FockOperator, e_diag: FockOperator) -> FockOperator:
    """V1 = E^2 K1 - E L1 E."""
    if not (k1.basis.conforms(l1.basis) and k1.basis.conforms(e_diag.basis)):
        raise TruncationMismatch("K1, L1 and E use different truncations")
    e = np.diag(e_diag.matrix)
    if np.abs(e_diag.matrix - np.diag(e)).max() > 0:
        raise InvalidParameter("E must be diagonal")
    v = (e * e)[:, None] * k1.matrix - e[:, None] * l1.matrix * e[None, :]
    return FockOperator(v, k1.basis)


def perturbation_operator(h: HMatrix, interaction: QuarticInteraction, max_degree: int) -> FockOperator:
    """V1 assembled from the direct K1 and L1 routes."""
    k1 = kernel_K1(interaction, h, max_degree)
    l1 = kernel_L1(interaction, h, max_degree)
    return build_V1(k1, l1, e_diagonal(h, k1.basis))


@dataclass(frozen=True, eq=False)
class PerturbedLevel:
    """A perturbed relevance with its unperturbed label and first-order eigenvector."""

    occupation: Tuple[int, ...]
    eta0: float
    eta: float
    vector: np.ndarray = field(repr=False)


def first_order_spectrum(unperturbed: HMatrix, v1: FockOperator, lam: float,
                         max_level_degree: Optional[int] = None) -> List[PerturbedLevel]:
    """Rayleigh-Schrodinger corrections to the relevances prod_k eta_k^m_k.

    Degenerate unperturbed levels (within 1e-10) are resolved by diagonalizing
    V1 inside the block. The vacuum (normalization) is excluded. Only levels
    up to ``max_level_degree`` are returned (default: the whole basis).
    """
    basis = v1.basis
    if basis.n_modes != unperturbed.n_modes:
        raise TruncationMismatch("V1 basis does not match the unperturbed modes")
    v = v1.matrix
    eta0 = np.diag(e_diagonal(unperturbed, basis).matrix) ** 2
    deg = basis.degrees()
    top = basis.max_degree if max_level_degree is None else int(max_level_degree)
    chosen = [i for i in range(basis.dim) if 1 <= deg[i] <= top]
    chosen.sort(key=lambda i: (-eta0[i], i))
    levels: List[PerturbedLevel] = []
    done = set()
    for i in chosen:
        if i in done:
            continue
        block = [j for j in chosen if abs(eta0[j] - eta0[i]) <= DEGENERATE_TOL * max(1.0, eta0[i])]
        done.update(block)
        sub = v[np.ix_(block, block)]
        if np.abs(sub - sub.T).max(initial=0.0) > 1e-10 * max(1.0, np.abs(sub).max(initial=0.0)):
            raise DegeneracyUnresolved("V1 is not symmetric on a degenerate block")
        try:
            shifts, rot = np.linalg.eigh(0.5 * (sub + sub.T))
        except np.linalg.LinAlgError as exc:
            raise DegeneracyUnresolved("block diagonalization failed") from exc
        if not np.all(np.isfinite(shifts)):
            raise DegeneracyUnresolved("block diagonalization produced non-finite values")
        outside = np.array([j for j in range(basis.dim)
                            if abs(eta0[j] - eta0[i]) > DEGENERATE_TOL * max(1.0, eta0[i])])
        for c in range(len(block)):
            vec = np.zeros(basis.dim)
            vec[block] = rot[:, c]
            if outside.size:
                coupling = v[np.ix_(outside, block)] @ rot[:, c]
                vec[outside] = lam * coupling / (eta0[i] - eta0[outside])
            label = basis.states[block[int(np.argmax(np.abs(rot[:, c])))]]
            levels.append(PerturbedLevel(label, float(eta0[i]), float(eta0[i] + lam * shifts[c]), vec))
    levels.sort(key=lambda lv: -lv.eta)
    return levels
