# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p, sqrt, fabs

cnp.import_array()


def log_divided_difference(p, double tol):
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef Py_ssize_t n = pv.shape[0], i, j
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double d
    for i in range(n):
        for j in range(n):
            d = pv[i] - pv[j]
            if fabs(d) < tol:
                o[i, j] = 1.0 / pv[i]
            else:
                o[i, j] = log1p(d / pv[j]) / d
    return out


def logarithmic_mean(p, double tol):
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef Py_ssize_t n = pv.shape[0], i, j
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double d
    for i in range(n):
        for j in range(n):
            d = pv[i] - pv[j]
            if fabs(d) < tol:
                o[i, j] = pv[i]
            else:
                o[i, j] = d / log1p(d / pv[j])
    return out


def gaussian_kernel(x_out, x_in, double scale, double variance, double dx_out):
    cdef const double[::1] y = np.ascontiguousarray(x_out, dtype=np.float64)
    cdef const double[::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t ny = y.shape[0], nx = x.shape[0], a, b
    out = np.empty((ny, nx), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double r, s, c = -0.5 / variance
    for b in range(nx):
        s = 0.0
        for a in range(ny):
            r = y[a] - scale * x[b]
            o[a, b] = exp(c * r * r)
            s += o[a, b]
        s *= dx_out
        for a in range(ny):
            o[a, b] /= s
    return out


def hermite_product_sums(xi, weight, int max_degree):
    cdef const double[::1] xv = np.ascontiguousarray(xi, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(weight, dtype=np.float64)
    cdef Py_ssize_t ns = xv.shape[0], s, n, m
    cdef int D = max_degree
    s1 = np.zeros((D + 1, D + 1), dtype=np.float64)
    s2 = np.zeros((D + 1, D + 1), dtype=np.float64)
    cdef double[:, ::1] a1 = s1
    cdef double[:, ::1] a2 = s2
    psi_arr = np.empty(D + 1, dtype=np.float64)
    cdef double[::1] psi = psi_arr
    cdef double t, w, xs
    for s in range(ns):
        xs = xv[s]
        w = wv[s]
        psi[0] = 1.0
        if D >= 1:
            psi[1] = xs
        for n in range(1, D):
            psi[n + 1] = (xs * psi[n] - sqrt(<double>n) * psi[n - 1]) / sqrt(<double>(n + 1))
        for n in range(D + 1):
            for m in range(D + 1):
                t = w * psi[n] * psi[m]
                a1[n, m] += t
                a2[n, m] += t * t
    return s1, s2
