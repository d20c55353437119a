"""States and the information geometry on them.

Classical states live on finite sample spaces: :class:`GridDistribution` for
uniform 1-d grids and :class:`DiscreteDistribution` for anything else
(flattened multi-dimensional grids, plain probability vectors). Both store a
*density* together with the cell weight ``dx``; all sums carry that weight
explicitly. Quantum states are :class:`DensityMatrix` objects.

Features (tangent vectors) and observables are plain numpy arrays: 1-d real
arrays of densities for classical states and Hermitian matrices for quantum
states.

The relative entropy uses the convention

    S(rho' || rho) = Tr rho (log rho - log rho'),

i.e. the *second* argument sits under the trace. Its Hessian at rho' = rho is
the Bogoliubov-Kubo-Mori (BKM) metric; classically the Fisher metric.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Union

import numpy as np

from . import kernels
from .errors import (
    DimensionMismatch,
    GridTooNarrow,
    InvalidParameter,
    NonNormalizable,
    NonPositiveState,
    ValidationError,
)

NORMALIZATION_TOL = 1e-12
HERMITIAN_TOL = 1e-12
FEATURE_TOL = 1e-10
DEGENERACY_RTOL = 1e-12
RANK_RTOL = 1e-12


# ---------------------------------------------------------------------------
# classical states


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Density on a finite sample space with uniform cell weight ``dx``.

    Probabilities are ``values * dx``.
    """

    values: np.ndarray
    dx: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "dx", float(self.dx))
        if v.ndim != 1:
            raise ValidationError("values must be a 1-d array")
        if not self.dx > 0:
            raise InvalidParameter("dx must be positive")
        if not np.all(np.isfinite(v)):
            raise ValidationError("values must be finite")
        if np.any(v <= 0):
            raise NonPositiveState(
                "density must be strictly positive (smallest value %r)" % v.min()
            )
        total = v.sum() * self.dx
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValidationError("density integrates to %r, expected 1" % total)

    @classmethod
    def from_weights(cls, weights, dx=1.0):
        """Normalize arbitrary positive weights into a density."""
        w = np.asarray(weights, dtype=float)
        return cls(w / (w.sum() * dx), dx)

    @property
    def dim(self) -> int:
        return self.values.size

    @property
    def probabilities(self) -> np.ndarray:
        return self.values * self.dx

    def with_values(self, values):
        return DiscreteDistribution(values, self.dx)

    def same_space(self, other) -> bool:
        return (
            isinstance(other, DiscreteDistribution)
            and type(other) is type(self)
            and other.dim == self.dim
            and np.isclose(other.dx, self.dx, rtol=1e-12, atol=0)
        )


@dataclass(frozen=True, eq=False)
class GridDistribution(DiscreteDistribution):
    """Density sampled on ``n_points`` uniformly spaced points of [min, max]."""

    values: np.ndarray
    grid_min: float
    grid_max: float
    dx: float = field(init=False, default=1.0)

    def __post_init__(self):
        n = np.size(self.values)
        if n < 3:
            raise InvalidParameter("a grid needs at least 3 points")
        if not self.grid_max > self.grid_min:
            raise InvalidParameter("grid_max must exceed grid_min")
        object.__setattr__(self, "grid_min", float(self.grid_min))
        object.__setattr__(self, "grid_max", float(self.grid_max))
        object.__setattr__(self, "dx", (self.grid_max - self.grid_min) / (n - 1))
        super().__post_init__()

    @classmethod
    def from_weights(cls, weights, grid_min, grid_max):
        w = np.asarray(weights, dtype=float)
        dx = (grid_max - grid_min) / (w.size - 1)
        return cls(w / (w.sum() * dx), grid_min, grid_max)

    @property
    def n_points(self) -> int:
        return self.values.size

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(self.grid_min, self.grid_max, self.n_points)

    def with_values(self, values):
        return GridDistribution(values, self.grid_min, self.grid_max)

    def same_space(self, other) -> bool:
        return (
            isinstance(other, GridDistribution)
            and other.n_points == self.n_points
            and np.isclose(other.grid_min, self.grid_min, rtol=0, atol=1e-12)
            and np.isclose(other.grid_max, self.grid_max, rtol=0, atol=1e-12)
        )


def grid_points(grid_min, grid_max, n_points):
    return np.linspace(float(grid_min), float(grid_max), int(n_points))


# ---------------------------------------------------------------------------
# quantum states


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Finite-dimensional density matrix."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("density matrix must be square")
        scale = max(1.0, np.abs(m).max())
        if np.abs(m - m.conj().T).max() > HERMITIAN_TOL * scale:
            raise ValidationError("density matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        if abs(np.trace(m).real - 1.0) > NORMALIZATION_TOL:
            raise ValidationError("density matrix trace is %r" % np.trace(m).real)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if self.eigenvalues[0] < -1e-12:
            raise NonPositiveState("density matrix is not positive semidefinite")

    @classmethod
    def from_matrix(cls, m):
        """Hermitize and trace-normalize ``m``."""
        m = np.asarray(m, dtype=complex)
        m = 0.5 * (m + m.conj().T)
        return cls(m / np.trace(m).real)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def _eigh(self):
        w, u = np.linalg.eigh(self.entries)
        return w, u

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._eigh[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._eigh[1]

    def rank_tolerance(self) -> float:
        return RANK_RTOL * self.dim * max(self.eigenvalues[-1], 0.0)

    def same_space(self, other) -> bool:
        return isinstance(other, DensityMatrix) and other.dim == self.dim


State = Union[DiscreteDistribution, DensityMatrix]


# ---------------------------------------------------------------------------
# Gaussian states


@dataclass(frozen=True, eq=False)
class ClassicalGaussianState:
    """Centered Gaussian measure with covariance ``A``: <e^{phi(f)}> = e^{(f,Af)/2}."""

    A: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.array(self.A, dtype=float))
        if a.shape[0] != a.shape[1]:
            raise ValidationError("covariance must be square")
        if np.abs(a - a.T).max() > HERMITIAN_TOL * max(1.0, np.abs(a).max()):
            raise ValidationError("covariance must be symmetric")
        a = 0.5 * (a + a.T)
        if np.linalg.eigvalsh(a)[0] <= 0:
            raise ValidationError("covariance must be positive definite")
        a.setflags(write=False)
        object.__setattr__(self, "A", a)

    @property
    def n_modes(self) -> int:
        return self.A.shape[0]


def standard_symplectic(n_modes):
    """Block-diagonal symplectic form with blocks [[0, 1], [-1, 0]]."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True, eq=False)
class QuantumGaussianState:
    """Centered bosonic Gaussian state.

    ``A`` is the symmetrized covariance of the canonical coordinates,
    <exp(i Phi(f))> = exp(-(f, A f)/2), and ``Delta`` the symplectic form,
    [Phi(f), Phi(g)] = i (f, Delta g). Coordinates are ordered
    (q_1, p_1, q_2, p_2, ...).
    """

    A: np.ndarray
    Delta: np.ndarray = None

    def __post_init__(self):
        a = np.atleast_2d(np.array(self.A, dtype=float))
        n2 = a.shape[0]
        if a.shape != (n2, n2) or n2 % 2:
            raise ValidationError("covariance must be 2n x 2n")
        delta = (
            standard_symplectic(n2 // 2)
            if self.Delta is None
            else np.array(self.Delta, dtype=float)
        )
        if delta.shape != a.shape:
            raise DimensionMismatch("Delta and A shapes differ")
        if np.abs(a - a.T).max() > HERMITIAN_TOL * max(1.0, np.abs(a).max()):
            raise ValidationError("covariance must be symmetric")
        if np.abs(delta + delta.T).max() > HERMITIAN_TOL:
            raise ValidationError("Delta must be antisymmetric")
        if abs(np.linalg.det(delta)) < 1e-12:
            raise ValidationError("Delta must be nondegenerate")
        a = 0.5 * (a + a.T)
        if np.linalg.eigvalsh(a + 0.5j * delta)[0] < -1e-10:
            raise ValidationError("A + (i/2) Delta is not positive semidefinite")
        a.setflags(write=False)
        delta.setflags(write=False)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "Delta", delta)

    @property
    def n_modes(self) -> int:
        return self.A.shape[0] // 2

    @classmethod
    def thermal(cls, nbar):
        """Single-mode thermal state with mean occupation ``nbar``."""
        return cls(np.eye(2) * (float(nbar) + 0.5))


# ---------------------------------------------------------------------------
# effective Hamiltonians and Gibbs states


@dataclass(frozen=True)
class EffectiveHamiltonian1D:
    """Even polynomial H(x) = c2 x^2 + c4 x^4 + c6 x^6.

    ``perturbative=True`` admits a non-normalizable H (e.g. c4 < 0 without a
    stabilizing x^6 term) that is only used through its expansion around the
    Gaussian part, which then needs c2 > 0.
    """

    coefficients: Mapping[int, float]
    perturbative: bool = False

    def __post_init__(self):
        coeffs = {int(k): float(v) for k, v in dict(self.coefficients).items()}
        bad = set(coeffs) - {2, 4, 6}
        if bad:
            raise InvalidParameter("unsupported degrees %s" % sorted(bad))
        if not all(np.isfinite(v) for v in coeffs.values()):
            raise InvalidParameter("coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)
        if self.perturbative:
            if coeffs.get(2, 0.0) <= 0:
                raise NonNormalizable("perturbative H needs a positive x^2 coefficient")
        elif not self.normalizable:
            raise NonNormalizable("leading coefficient of H must be positive")

    @property
    def normalizable(self) -> bool:
        nonzero = [d for d in sorted(self.coefficients) if self.coefficients[d] != 0.0]
        return bool(nonzero) and self.coefficients[nonzero[-1]] > 0

    @classmethod
    def from_physical(cls, tau, lam=0.0, Lambda=None, perturbative=False):
        """H = x^2 / (2 tau^2) + lam x^4 (+ x^6 / Lambda)."""
        if not tau > 0:
            raise InvalidParameter("tau must be positive")
        coeffs = {2: 0.5 / tau**2, 4: float(lam)}
        if Lambda is not None:
            if not Lambda > 0:
                raise InvalidParameter("Lambda must be positive")
            coeffs[6] = 1.0 / Lambda
        return cls(coeffs, perturbative)

    def c(self, degree) -> float:
        return self.coefficients.get(degree, 0.0)

    @property
    def tau(self) -> float:
        return float(np.sqrt(0.5 / self.c(2))) if self.c(2) > 0 else float("nan")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        x2 = x * x
        return x2 * (self.c(2) + x2 * (self.c(4) + x2 * self.c(6)))


def build_gibbs_1d(h: EffectiveHamiltonian1D, grid_min, grid_max, n_points):
    """Density proportional to exp(-H) on a uniform grid."""
    if not h.normalizable:
        raise NonNormalizable("exp(-H) is not normalizable")
    if int(n_points) < 3:
        raise InvalidParameter("n_points must be at least 3")
    x = grid_points(grid_min, grid_max, n_points)
    energy = h(x)
    w = np.exp(-(energy - energy.min()))
    if max(w[0], w[-1]) >= 1e-12 * w.max():
        raise GridTooNarrow(
            "density at the grid boundary is %.3g of its peak" % (max(w[0], w[-1]) / w.max())
        )
    if w.min() <= 0:
        raise NonPositiveState("density underflows on the grid; use a narrower grid")
    return GridDistribution.from_weights(w, grid_min, grid_max)


def moment(p: GridDistribution, k: int) -> float:
    """Riemann-sum moment sum_i x_i^k p_i dx."""
    if k < 0:
        raise InvalidParameter("moment order must be nonnegative")
    return float(np.sum(p.x**k * p.values) * p.dx)


# ---------------------------------------------------------------------------
# geometry


def _check_same(a, b):
    if not a.same_space(b):
        raise DimensionMismatch("states live on different spaces")


def _require_positive(rho, rank_tolerance=None):
    if isinstance(rho, DiscreteDistribution):
        if np.any(rho.values <= 0):
            raise NonPositiveState("classical state has a zero entry")
        return
    tol = rho.rank_tolerance() if rank_tolerance is None else rank_tolerance
    if rho.eigenvalues[0] <= tol:
        raise NonPositiveState(
            "density matrix is not faithful: smallest eigenvalue %.3g <= %.3g"
            % (rho.eigenvalues[0], tol)
        )


def _logm_h(w, u):
    return (u * np.log(w)) @ u.conj().T


def relative_entropy(rho_prime: State, rho: State) -> float:
    """S(rho' || rho) = Tr rho (log rho - log rho').

    Note the argument order: the second state weights the trace.
    """
    _check_same(rho_prime, rho)
    _require_positive(rho)
    _require_positive(rho_prime)
    if isinstance(rho, DiscreteDistribution):
        v, vp = rho.values, rho_prime.values
        return float(np.sum(v * (np.log(v) - np.log(vp))) * rho.dx)
    log_rho = _logm_h(rho.eigenvalues, rho.eigenvectors)
    log_rhop = _logm_h(rho_prime.eigenvalues, rho_prime.eigenvectors)
    return float(np.trace(rho.entries @ (log_rho - log_rhop)).real)


def _kernel(rho: DensityMatrix, inverse: bool):
    p = rho.eigenvalues
    tol = DEGENERACY_RTOL * p[-1]
    if inverse:
        return kernels.log_divided_difference(p, tol)
    return kernels.logarithmic_mean(p, tol)


def _apply_kernel(rho: DensityMatrix, y, inverse: bool):
    y = np.asarray(y, dtype=complex)
    if y.shape != rho.entries.shape:
        raise DimensionMismatch("operator shape %s != state shape %s" % (y.shape, rho.entries.shape))
    u = rho.eigenvectors
    yt = u.conj().T @ y @ u
    return u @ (yt * _kernel(rho, inverse)) @ u.conj().T


def _check_vector(rho, y):
    y = np.asarray(y)
    if y.shape != rho.values.shape:
        raise DimensionMismatch("array shape %s != state shape %s" % (y.shape, rho.values.shape))
    return y


def omega_inv(rho: State, y, rank_tolerance=None):
    """Inverse BKM kernel: d/dt log(rho + t y) at t = 0 (classically y / rho)."""
    _require_positive(rho, rank_tolerance)
    if isinstance(rho, DiscreteDistribution):
        return _check_vector(rho, y) / rho.values
    return _apply_kernel(rho, y, inverse=True)


def omega(rho: State, b, rank_tolerance=None):
    """BKM kernel: integral over s in [0, 1] of rho^s b rho^(1-s) (classically rho b)."""
    _require_positive(rho, rank_tolerance)
    if isinstance(rho, DiscreteDistribution):
        return _check_vector(rho, b) * rho.values
    return _apply_kernel(rho, b, inverse=False)


def metric_inner(rho: State, x, y, rank_tolerance=None) -> float:
    """<x, y>_rho = Tr(x omega_inv(rho, y)) for features x, y."""
    if isinstance(rho, DiscreteDistribution):
        x = _check_vector(rho, x)
        y = _check_vector(rho, y)
        _require_positive(rho)
        return float(np.sum(x * y / rho.values) * rho.dx)
    x = np.asarray(x)
    if x.shape != rho.entries.shape:
        raise DimensionMismatch("feature shape mismatch")
    return float(np.trace(x @ omega_inv(rho, y, rank_tolerance)).real)


def observable_inner(rho: State, a, b, rank_tolerance=None) -> float:
    """Heisenberg-picture metric <a, b>_rho = Tr(omega(rho, a) b)."""
    if isinstance(rho, DiscreteDistribution):
        a = _check_vector(rho, a)
        b = _check_vector(rho, b)
        return float(np.sum(rho.values * a * b) * rho.dx)
    return float(np.trace(omega(rho, a, rank_tolerance) @ np.asarray(b)).real)


def expectation(rho: State, a) -> float:
    """Tr(rho a), or sum rho a dx classically."""
    if isinstance(rho, DiscreteDistribution):
        return float(np.sum(rho.values * _check_vector(rho, a)) * rho.dx)
    a = np.asarray(a)
    if a.shape != rho.entries.shape:
        raise DimensionMismatch("observable shape mismatch")
    return float(np.trace(rho.entries @ a).real)


def center(rho: State, a):
    """Subtract the expectation value: the traceless part of an observable."""
    mean = expectation(rho, a)
    if isinstance(rho, DiscreteDistribution):
        return np.asarray(a, dtype=float) - mean
    return np.asarray(a) - mean * np.eye(rho.dim)


def validate_feature(rho: State, x, tol=FEATURE_TOL):
    """Raise unless ``x`` is a feature (traceless, Hermitian) at ``rho``."""
    if isinstance(rho, DiscreteDistribution):
        x = _check_vector(rho, x)
        scale = max(1.0, np.abs(x).max() * rho.dim * rho.dx)
        if abs(np.sum(x) * rho.dx) > tol * scale:
            raise ValidationError("grid feature does not integrate to zero")
        return x
    x = np.asarray(x)
    if x.shape != rho.entries.shape:
        raise DimensionMismatch("feature shape mismatch")
    if np.abs(x - x.conj().T).max() > tol or abs(np.trace(x)) > tol:
        raise ValidationError("matrix feature must be Hermitian and traceless")
    return x
