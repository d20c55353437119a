"""Coarse-graining channels, their adjoints and transpose channels.

Three channel families are supported:

* :class:`StochasticChannel`: a column-stochastic kernel ``p(y|x)`` acting
  on classical densities, ``E(rho)(y) = sum_x p(y|x) rho(x) dx_in``;
* :class:`QuantumChannel`: a Kraus set, ``E(rho) = sum_k K rho K^dag``;
* :class:`GaussianChannelSpec`: the (X, Y) pair of a Gaussian map, defined
  through ``E^dag(e^{phi(f)}) = e^{phi(X f) + (f, Y f)/2}`` classically and
  ``E^dag(W(f)) = W(X f) e^{-(f, Y f)/2}`` on Weyl operators.

The transpose channel ``R_rho = Omega_rho E^dag Omega_{E(rho)}^{-1}`` is the
adjoint of ``E`` with respect to the information metric. For stochastic
channels it is the Bayes posterior ``p(x|y)`` with prior ``rho``; both that
formula and the generic composition are available so each can check the
other.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from . import kernels
from .errors import (
    DimensionMismatch,
    InvalidChannel,
    InvalidParameter,
    InvalidSigma,
    NonPositiveState,
)
from .statespace import (
    DensityMatrix,
    DiscreteDistribution,
    GridDistribution,
    grid_points,
    omega,
    omega_inv,
    standard_symplectic,
    _require_positive,
)

STOCHASTIC_TOL = 1e-10
KRAUS_TOL = 1e-10
GAUSSIAN_PSD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class StochasticChannel:
    """Kernel ``kernel[y, x] = p(y|x)`` with density weights on both sides.

    Every column satisfies ``sum_y p(y|x) dx_out = 1``. ``out_grid`` optionally
    records (grid_min, grid_max) of a uniform output grid.
    """

    kernel: np.ndarray
    dx_in: float = 1.0
    dx_out: float = 1.0
    out_grid: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        k = np.array(self.kernel, dtype=float)
        if k.ndim != 2:
            raise InvalidChannel("kernel must be a matrix")
        if np.any(k < 0):
            raise InvalidChannel("kernel entries must be nonnegative")
        cols = k.sum(axis=0) * self.dx_out
        if np.abs(cols - 1.0).max() > STOCHASTIC_TOL:
            raise InvalidChannel("kernel columns are not normalized (max defect %.3g)"
                                 % np.abs(cols - 1.0).max())
        k.setflags(write=False)
        object.__setattr__(self, "kernel", k)

    @property
    def n_out(self) -> int:
        return self.kernel.shape[0]

    @property
    def n_in(self) -> int:
        return self.kernel.shape[1]

    @classmethod
    def from_conditionals(cls, probabilities):
        """Discrete channel from a column-stochastic matrix of probabilities."""
        p = np.asarray(probabilities, dtype=float)
        return cls(p / p.sum(axis=0, keepdims=True))


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """Trace-preserving channel given by Kraus operators."""

    kraus: Tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.kraus)
        if not ops:
            raise InvalidChannel("at least one Kraus operator is required")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise InvalidChannel("Kraus operators must share a shape")
        s = sum(k.conj().T @ k for k in ops)
        if np.abs(s - np.eye(shape[1])).max() > KRAUS_TOL:
            raise InvalidChannel("Kraus operators are not trace preserving")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]


@dataclass(frozen=True, eq=False)
class GaussianChannelSpec:
    """Gaussian map given by the real matrices X and Y.

    For ``quantum=True`` the complete-positivity condition
    ``Y - (i/2) X^T Delta X + (i/2) Delta >= 0`` is enforced; classically Y
    must be positive semidefinite.
    """

    X: np.ndarray
    Y: np.ndarray
    quantum: bool = False
    Delta: Optional[np.ndarray] = None

    def __post_init__(self):
        x = np.atleast_2d(np.array(self.X, dtype=float))
        y = np.atleast_2d(np.array(self.Y, dtype=float))
        if y.shape[0] != y.shape[1] or x.shape[1] != y.shape[0]:
            raise DimensionMismatch("X must be m x n and Y n x n")
        if np.abs(y - y.T).max() > 1e-12 * max(1.0, np.abs(y).max()):
            raise InvalidChannel("Y must be symmetric")
        y = 0.5 * (y + y.T)
        delta = None
        if self.quantum:
            if x.shape[0] != x.shape[1] or x.shape[0] % 2:
                raise DimensionMismatch("quantum X must be 2n x 2n")
            delta = (standard_symplectic(x.shape[0] // 2) if self.Delta is None
                     else np.array(self.Delta, dtype=float))
            m = y - 0.5j * x.T @ delta @ x + 0.5j * delta
            if np.linalg.eigvalsh(m)[0] < -GAUSSIAN_PSD_TOL:
                raise InvalidChannel(
                    "Y - (i/2) X^T Delta X + (i/2) Delta is not positive semidefinite")
            delta.setflags(write=False)
        elif np.linalg.eigvalsh(y)[0] < -GAUSSIAN_PSD_TOL:
            raise InvalidChannel("Y must be positive semidefinite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "Y", y)
        object.__setattr__(self, "Delta", delta)

    def output_covariance(self, A):
        """Covariance X^T A X + Y of the image of a centered Gaussian state."""
        A = np.asarray(A, dtype=float)
        return self.X.T @ A @ self.X + self.Y


Channel = Union[StochasticChannel, QuantumChannel]


# ---------------------------------------------------------------------------
# constructors


def gaussian_convolution_channel(grid_min, grid_max, n_points, sigma, scale=1.0, pad="auto"):
    """Convolution with a normal density of standard deviation ``sigma``.

    ``kernel[y, x] ~ exp(-(y - scale x)^2 / 2 sigma^2)``, each column
    renormalized on the truncated output grid. The output grid has the input
    spacing and extends ``pad`` beyond the input range on both sides;
    ``"auto"`` pads by 8 sigma (plus the growth from ``scale``), which makes
    the renormalization a ~1e-15 correction. ``pad=0`` gives a square kernel
    on the input grid.
    """
    if not sigma > 0:
        raise InvalidSigma("sigma must be positive, got %r" % sigma)
    if int(n_points) < 3:
        raise InvalidParameter("n_points must be at least 3")
    x = grid_points(grid_min, grid_max, n_points)
    dx = x[1] - x[0]
    if pad == "auto":
        reach = max(abs(grid_min), abs(grid_max)) * max(abs(scale) - 1.0, 0.0)
        pad = 8.0 * sigma + reach
    n_pad = int(np.ceil(float(pad) / dx - 0.5)) if pad > 0 else 0
    y_min = x[0] - n_pad * dx
    y_max = x[-1] + n_pad * dx
    y = np.linspace(y_min, y_max, x.size + 2 * n_pad)
    k = kernels.gaussian_kernel(y, x, float(scale), float(sigma) ** 2, dx)
    return StochasticChannel(k, dx, dx, (float(y_min), float(y_max)))


def identity_channel(rho):
    """Identity map on the space of ``rho``."""
    if isinstance(rho, DiscreteDistribution):
        out_grid = (rho.grid_min, rho.grid_max) if isinstance(rho, GridDistribution) else None
        return StochasticChannel(np.eye(rho.dim) / rho.dx, rho.dx, rho.dx, out_grid)
    return QuantumChannel((np.eye(rho.dim),))


def replacement_channel(rho0):
    """The constant channel rho -> rho0."""
    if isinstance(rho0, DiscreteDistribution):
        k = np.repeat(rho0.values[:, None], rho0.dim, axis=1)
        out_grid = (rho0.grid_min, rho0.grid_max) if isinstance(rho0, GridDistribution) else None
        return StochasticChannel(k, rho0.dx, rho0.dx, out_grid)
    w, u = rho0.eigenvalues, rho0.eigenvectors
    d = rho0.dim
    ops = []
    for i in range(d):
        if w[i] <= 0:
            continue
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[:, j] = np.sqrt(w[i]) * u[:, i]
            ops.append(e)
    return QuantumChannel(tuple(ops))


def depolarizing_channel(dim, p=1.0):
    """rho -> (1 - p) rho + p I/dim, via the Weyl (clock and shift) Kraus set."""
    if not 0 <= p <= 1:
        raise InvalidParameter("p must lie in [0, 1]")
    omega_d = np.exp(2j * np.pi / dim)
    shift = np.roll(np.eye(dim), 1, axis=0)
    clock = np.diag(omega_d ** np.arange(dim))
    ops = []
    for a in range(dim):
        for b in range(dim):
            w = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            weight = p / dim**2 + (1 - p if a == b == 0 else 0.0)
            if weight > 0:
                ops.append(np.sqrt(weight) * w)
    return QuantumChannel(tuple(ops))


def binary_symmetric_channel(flip):
    """Two-letter channel flipping the input with probability ``flip``."""
    return StochasticChannel(np.array([[1 - flip, flip], [flip, 1 - flip]]))


# ---------------------------------------------------------------------------
# actions


def _output_state(e: StochasticChannel, rho, values):
    if e.out_grid is not None:
        return GridDistribution(values, *e.out_grid)
    if isinstance(rho, GridDistribution) and e.n_out == e.n_in and np.isclose(e.dx_out, rho.dx):
        return GridDistribution(values, rho.grid_min, rho.grid_max)
    return DiscreteDistribution(values, e.dx_out)


def _check_classical(e, rho):
    if not isinstance(e, StochasticChannel) or not isinstance(rho, DiscreteDistribution):
        raise DimensionMismatch("classical channel and state required")
    if e.n_in != rho.dim or not np.isclose(e.dx_in, rho.dx, rtol=1e-12, atol=0):
        raise DimensionMismatch("channel input space does not match the state")


def _check_quantum(e, dim, side="in"):
    if not isinstance(e, QuantumChannel):
        raise DimensionMismatch("quantum channel required")
    expected = e.dim_in if side == "in" else e.dim_out
    if dim != expected:
        raise DimensionMismatch("channel %s-dimension %d != %d" % (side, expected, dim))


def apply(e: Channel, rho):
    """Image E(rho) of a state, renormalized against round-off drift."""
    if isinstance(rho, DiscreteDistribution):
        _check_classical(e, rho)
        out = e.kernel @ (rho.values * rho.dx)
        return _output_state(e, rho, out / (out.sum() * e.dx_out))
    _check_quantum(e, rho.dim)
    out = sum(k @ rho.entries @ k.conj().T for k in e.kraus)
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out / np.trace(out).real)


def apply_linear(e: Channel, x):
    """Linear action of E on a feature or arbitrary operator (no renormalization)."""
    x = np.asarray(x)
    if isinstance(e, StochasticChannel):
        if x.shape[0] != e.n_in:
            raise DimensionMismatch("feature length %d != channel input %d" % (x.shape[0], e.n_in))
        return e.kernel @ x * e.dx_in
    if x.shape != (e.dim_in, e.dim_in):
        raise DimensionMismatch("operator shape mismatch")
    return sum(k @ x @ k.conj().T for k in e.kraus)


def apply_adjoint(e: Channel, a):
    """Heisenberg-picture map E^dag, with Tr(rho E^dag(A)) = Tr(E(rho) A)."""
    a = np.asarray(a)
    if isinstance(e, StochasticChannel):
        if a.shape[0] != e.n_out:
            raise DimensionMismatch("observable length %d != channel output %d" % (a.shape[0], e.n_out))
        return e.kernel.T @ a * e.dx_out
    if a.shape != (e.dim_out, e.dim_out):
        raise DimensionMismatch("observable shape mismatch")
    return sum(k.conj().T @ a @ k for k in e.kraus)


def posterior_kernel(e: StochasticChannel, rho):
    """Bayes inverse ``post[x, y] = p(y|x) rho(x) / E(rho)(y)`` (a density in x)."""
    _check_classical(e, rho)
    erho = e.kernel @ rho.probabilities
    if np.any(erho <= 0):
        raise NonPositiveState("E(rho) vanishes on part of the output space")
    return (e.kernel * rho.values[None, :]).T / erho[None, :]


def _image_state(e, rho):
    erho = apply(e, rho)
    _require_positive(erho)
    return erho


def transpose_channel_apply(e: Channel, rho, y, method="auto"):
    """R_rho(y) = Omega_rho E^dag Omega_{E(rho)}^{-1} (y) for a feature y at E(rho).

    ``method`` is ``"bayes"`` (stochastic channels only), ``"composition"``
    or ``"auto"`` (Bayes when available).
    """
    _require_positive(rho)
    if method == "auto":
        method = "bayes" if isinstance(e, StochasticChannel) else "composition"
    if method == "bayes":
        post = posterior_kernel(e, rho)
        return post @ (np.asarray(y) * e.dx_out)
    if method != "composition":
        raise InvalidParameter("unknown method %r" % method)
    erho = _image_state(e, rho)
    return omega(rho, apply_adjoint(e, omega_inv(erho, y)))


def heisenberg_transpose_apply(e: Channel, rho, f, method="auto"):
    """R_rho^dag(f) = Omega_{E(rho)}^{-1} E Omega_rho (f) for an observable f on the input.

    Classically this is the posterior average of ``f`` given the output.
    """
    _require_positive(rho)
    if method == "auto":
        method = "bayes" if isinstance(e, StochasticChannel) else "composition"
    if method == "bayes":
        post = posterior_kernel(e, rho)
        return post.T @ (np.asarray(f) * rho.dx)
    if method != "composition":
        raise InvalidParameter("unknown method %r" % method)
    erho = _image_state(e, rho)
    return omega_inv(erho, apply_linear(e, omega(rho, f)))


def relevance_operator_heisenberg(e: Channel, rho, a, method="auto"):
    """E^dag R_rho^dag (a): the operator whose eigenvectors are the principal observables."""
    return apply_adjoint(e, heisenberg_transpose_apply(e, rho, a, method))


def relevance_operator(e: Channel, rho, x, method="auto"):
    """R_rho E (x): the operator whose eigenvectors are the principal features."""
    return transpose_channel_apply(e, rho, apply_linear(e, x), method)
