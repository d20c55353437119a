"""Pure numpy implementations of the hot kernels.

These are the reference versions; ``_kernels.pyx`` mirrors every function
here with the same signature and semantics.
"""
import numpy as np


def _log_ratio_over_diff(p):
    pi = p[:, None]
    pj = p[None, :]
    d = pi - pj
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log1p(d / pj) / d, d


def log_divided_difference(p, tol):
    """Matrix of (log p_i - log p_j)/(p_i - p_j), with 1/p_i on near-ties."""
    p = np.asarray(p, dtype=float)
    k, d = _log_ratio_over_diff(p)
    tie = np.abs(d) < tol
    return np.where(tie, 1.0 / np.broadcast_to(p[:, None], k.shape), k)


def logarithmic_mean(p, tol):
    """Matrix of (p_i - p_j)/(log p_i - log p_j), with p_i on near-ties."""
    p = np.asarray(p, dtype=float)
    k, d = _log_ratio_over_diff(p)
    tie = np.abs(d) < tol
    return np.where(tie, np.broadcast_to(p[:, None], k.shape), 1.0 / k)


def gaussian_kernel(x_out, x_in, scale, variance, dx_out):
    """Column-normalized kernel exp(-(y - scale*x)^2 / 2 variance).

    Columns satisfy sum_y K[y, x] * dx_out = 1.
    """
    x_out = np.asarray(x_out, dtype=float)
    x_in = np.asarray(x_in, dtype=float)
    r = x_out[:, None] - scale * x_in[None, :]
    k = np.exp(-0.5 * r * r / variance)
    return k / (k.sum(axis=0, keepdims=True) * dx_out)


def hermite_product_sums(xi, weight, max_degree):
    """Sums of weight * psi_n(xi) * psi_m(xi) and of its square.

    psi_n = He_n / sqrt(n!) are the orthonormal probabilists' Hermite
    functions. Returns two (D+1, D+1) arrays.
    """
    xi = np.asarray(xi, dtype=float)
    weight = np.asarray(weight, dtype=float)
    psi = np.empty((max_degree + 1, xi.size))
    psi[0] = 1.0
    if max_degree >= 1:
        psi[1] = xi
    for n in range(1, max_degree):
        psi[n + 1] = (xi * psi[n] - np.sqrt(n) * psi[n - 1]) / np.sqrt(n + 1)
    wp = psi * weight
    s1 = wp @ psi.T
    s2 = (wp * wp) @ (psi * psi).T
    return s1, s2
