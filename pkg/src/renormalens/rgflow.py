"""Moment matching and regulator trajectories for one-dimensional Gibbs densities.

Two effective Hamiltonians are equivalent for an observer who resolves the
first n principal observables of a Gaussian base exactly when their moments
up to order n agree. A x^6 / Lambda regulator can be traded against changes
of (tau, lambda) while keeping moments 2 and 4 fixed; the resulting curve
in parameter space is a renormalization trajectory.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .errors import InvalidParameter, NoConvergence, NonNormalizable
from .spectra import RelevanceSpectrum
from .statespace import EffectiveHamiltonian1D

MATCH_TOL = 1e-10
MAX_ITER = 200


def gibbs_moments(h: EffectiveHamiltonian1D, orders: Sequence[int]) -> Dict[int, float]:
    """<x^k> under exp(-H) by adaptive quadrature on the half line (H is even)."""
    if not h.normalizable:
        raise NonNormalizable("exp(-H) is not normalizable")
    e0 = _energy_floor(h)

    def integral(k):
        val, _ = integrate.quad(lambda x: x**k * np.exp(-(h(x) - e0)), 0.0, np.inf,
                                epsabs=0.0, epsrel=1e-13, limit=400)
        return val

    z = integral(0)
    if not np.isfinite(z) or z <= 0:
        raise NonNormalizable("partition function is not finite")
    out = {}
    for k in orders:
        out[k] = 0.0 if k % 2 else integral(k) / z
    return out


def _energy_floor(h):
    # exact minimum over x >= 0: stationary points solve 2 c2 + 4 c4 r + 6 c6 r^2 = 0, r = x^2
    roots = np.roots([6.0 * h.c(6), 4.0 * h.c(4), 2.0 * h.c(2)]) if h.c(6) or h.c(4) else []
    cands = [0.0] + [float(np.sqrt(r.real)) for r in np.atleast_1d(roots)
                     if abs(r.imag) < 1e-12 and r.real > 0]
    return float(min(h(np.array(cands))))


def perturbative_moments(tau: float, lam: float) -> Tuple[float, float]:
    """(<x^2>, <x^4>) of exp(-x^2/(2 tau^2) - lam x^4) to first order in lam."""
    s = tau**2
    return s - 12.0 * lam * s**3, 3.0 * s**2 - 96.0 * lam * s**4


def match_second_moment(h0: EffectiveHamiltonian1D) -> EffectiveHamiltonian1D:
    """Gaussian H1 = x^2 / (2 tau1^2) with tau1^2 = <x^2>_{H0}."""
    if set(h0.coefficients) <= {2} or all(h0.c(d) == 0 for d in (4, 6)):
        return EffectiveHamiltonian1D({2: h0.c(2)})
    m2 = gibbs_moments(h0, [2])[2]
    return EffectiveHamiltonian1D({2: 0.5 / m2})


@dataclass(frozen=True, eq=False)
class FlowPoint:
    parameters: Dict[int, float]
    matched_moments: Tuple[Tuple[int, float], ...]
    regulator: Optional[float] = None
    residuals: Tuple[float, float] = (0.0, 0.0)
    iterations: int = 0

    @property
    def hamiltonian(self) -> EffectiveHamiltonian1D:
        return EffectiveHamiltonian1D(self.parameters)

    @property
    def tau(self) -> float:
        return float(np.sqrt(0.5 / self.parameters[2]))

    @property
    def lam(self) -> float:
        return float(self.parameters.get(4, 0.0))


def _residual(c2, c4, c6, target):
    h = EffectiveHamiltonian1D({2: c2, 4: c4, 6: c6})
    m = gibbs_moments(h, [2, 4, 6, 8])
    r = np.array([m[2] - target[0], m[4] - target[1]])
    # d<x^k>/dc_j = -<x^(k+j)> + <x^k><x^j>
    jac = np.array([
        [-(m[4] - m[2] ** 2), -(m[6] - m[2] * m[4])],
        [-(m[6] - m[4] * m[2]), -(m[8] - m[4] ** 2)],
    ])
    return r, jac


def _solve_point(target, c6, start, tol, max_iter):
    c = np.array(start, dtype=float)
    scale = np.abs(np.asarray(target))
    r, jac = _residual(c[0], c[1], c6, target)
    for it in range(1, max_iter + 1):
        if np.all(np.abs(r) <= tol * scale):
            return c, r, it - 1
        step = np.linalg.solve(jac, -r)
        t = 1.0
        norm = np.linalg.norm(r / scale)
        while t > 1e-6:
            trial = c + t * step
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("error")
                    r_new, jac_new = _residual(trial[0], trial[1], c6, target)
            except (NonNormalizable, ValueError, ZeroDivisionError, ArithmeticError, Warning):
                r_new = None
            if r_new is not None and np.all(np.isfinite(r_new)) and np.linalg.norm(r_new / scale) < norm:
                break
            t *= 0.5
        else:
            break
        c, r, jac = trial, r_new, jac_new
    if np.all(np.abs(r) <= tol * scale):
        return c, r, max_iter
    return None, r, max_iter


def _bisection_fallback(target, c6, start, tol, max_iter):
    """Continuation in c6 from the Gaussian-like start: solve along c6 * t, t -> 1."""
    c = np.array(start, dtype=float)
    ts = np.linspace(0.0, 1.0, 9)[1:]
    prev = 0.0
    for t in ts:
        cur = t
        while True:
            sol, r, _ = _solve_point(target, c6 * cur, c, tol, max_iter)
            if sol is not None:
                c = sol
                prev = cur
                break
            cur = 0.5 * (prev + cur)
            if cur - prev < 1e-4:
                raise NoConvergence("no solution at x^6 coefficient %.6g; residuals %s" % (c6, r))
    return _solve_point(target, c6, c, tol, max_iter)


def regulator_trajectory(reference: EffectiveHamiltonian1D, lambda_grid: Sequence[float],
                         tol: float = MATCH_TOL, max_iter: int = MAX_ITER,
                         workers: Optional[int] = None) -> List[FlowPoint]:
    """Solve <x^2>, <x^4> = reference values along c6 = 1 / Lambda.

    The reference (c2, c4 with no x^6 term) is evaluated by quadrature when
    normalizable and at first order in c4 otherwise (c4 < 0).
    """
    if reference.c(6) != 0:
        raise InvalidParameter("the reference must not carry an x^6 term")
    grid = [float(v) for v in lambda_grid]
    if not grid or any(v <= 0 for v in grid):
        raise InvalidParameter("regulator values must be positive")
    tau, lam = reference.tau, reference.c(4)
    if not reference.normalizable:
        target = perturbative_moments(tau, lam)
    else:
        m = gibbs_moments(reference, [2, 4])
        target = (m[2], m[4])
    start = (0.5 / target[0], 0.0)

    def solve(Lambda):
        c6 = 1.0 / Lambda
        sol, r, it = _solve_point(target, c6, start, tol, max_iter)
        if sol is None:
            sol, r, it = _bisection_fallback(target, c6, start, tol, max_iter)
            if sol is None:
                raise NoConvergence("Lambda=%g: residuals %s" % (Lambda, r))
        params = {2: float(sol[0]), 4: float(sol[1]), 6: c6}
        return FlowPoint(params, ((2, target[0]), (4, target[1])), Lambda,
                         (float(r[0]), float(r[1])), it)

    n_workers = workers or int(os.environ.get("RENORMALENS_THREADS", "1") or 1)
    if n_workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            points = list(pool.map(solve, grid))
    else:
        points = [solve(v) for v in grid]
    return sorted(points, key=lambda p: p.regulator)


@dataclass(frozen=True)
class FlowReport:
    """Expectations of the first n principal observables at each flow point."""

    regulators: Tuple[Optional[float], ...]
    expectations: np.ndarray
    max_deviation: float
    tol: float

    @property
    def invariant(self) -> bool:
        return self.max_deviation <= self.tol


def flow_invariance_report(trajectory: Sequence[FlowPoint], spectrum: RelevanceSpectrum, n: int,
                           tol: float = 1e-6) -> FlowReport:
    """Tabulate <A_j>_{rho_Lambda}, j < n, on the spectrum's grid and report the spread."""
    if not trajectory:
        raise InvalidParameter("trajectory is empty")
    if n > len(spectrum):
        raise InvalidParameter("n exceeds the spectrum length")
    ref = spectrum.rho_ref
    x = ref.x
    rows = []
    for p in trajectory:
        # unnormalized Gibbs weights; tails may underflow on the shared grid
        energy = p.hamiltonian(x)
        w = np.exp(-(energy - energy.min()))
        w /= w.sum()
        rows.append([float(np.sum(w * a)) for a in spectrum.observables[:n]])
    table = np.array(rows)
    dev = float(np.max(table.max(axis=0) - table.min(axis=0))) if len(rows) > 1 else 0.0
    return FlowReport(tuple(p.regulator for p in trajectory), table, dev, float(tol))
