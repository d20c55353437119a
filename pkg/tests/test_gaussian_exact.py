"""Tests for closed-form Gaussian relevances."""
import numpy as np
import pytest
from numpy.polynomial import hermite_e

from renormalens import gaussian_exact as gx
from renormalens import oracles
from renormalens.channels import GaussianChannelSpec, gaussian_convolution_channel
from renormalens.errors import InvalidParameter, ModeCouplingDetected, SingularX
from renormalens.spectra import principal_spectrum
from renormalens.statespace import (
    ClassicalGaussianState,
    EffectiveHamiltonian1D,
    QuantumGaussianState,
    build_gibbs_1d,
)


class TestSingleMode:
    def test_eta(self):
        assert gx.single_mode_eta(1.0, 2.0) == pytest.approx(0.2)

    def test_relevances_are_powers(self):
        rel = gx.single_mode_relevances(1.0, 2.0, 4)
        assert [n for n, _, _ in rel] == [1, 2, 3, 4]
        assert np.allclose([e for _, e, _ in rel], [0.2, 0.04, 0.008, 0.0016])
        assert np.allclose(rel[2][2], [0, -3, 0, 1])

    def test_matches_grid(self):
        for tau, sigma in [(1.0, 0.5), (1.5, 1.0)]:
            rho = build_gibbs_1d(EffectiveHamiltonian1D.from_physical(tau), -12 * tau, 12 * tau, 801)
            e = gaussian_convolution_channel(-12 * tau, 12 * tau, 801, sigma)
            eta = principal_spectrum(e, rho, 3).eta
            assert np.allclose(eta, gx.single_mode_eta(tau, sigma) ** np.arange(1, 4), rtol=1e-6)

    def test_invalid(self):
        with pytest.raises(InvalidParameter):
            gx.single_mode_eta(-1.0, 1.0)


class TestClassicalH:
    def test_scalar(self):
        h = gx.classical_H(ClassicalGaussianState(np.array([[1.0]])),
                           GaussianChannelSpec(np.eye(1), np.array([[4.0]])))
        assert h.eta[0] == pytest.approx(0.2)

    def test_a_self_adjoint(self):
        from renormalens.checks import random_2mode_instance

        A, X, Y, _ = random_2mode_instance(7)
        h = gx.classical_H(ClassicalGaussianState(A), GaussianChannelSpec(X, Y))
        assert h.symmetry_defect() < 1e-12
        assert np.allclose(h.modes.T @ A @ h.modes, np.eye(2), atol=1e-12)
        assert np.all((h.eta > 0) & (h.eta < 1))

    def test_generating_function_grid(self):
        """E^dag R^dag G(f) = G(H f) on a 2-d grid discretization."""
        from renormalens.checks import generating_identity_errors, random_2mode_instance

        A, X, Y, _ = random_2mode_instance(3)
        _, errs = generating_identity_errors(A, X, Y, [np.array([0.3, -0.2])])
        assert max(errs) < 1e-2

    def test_singular_x(self):
        with pytest.raises(SingularX):
            gx.classical_H(ClassicalGaussianState(np.eye(2)),
                           GaussianChannelSpec(np.diag([1.0, 0.0]), np.eye(2)))


class TestPolynomials:
    def test_occupations(self):
        occ = gx.occupations(2, 2)
        assert set(occ) == {(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}

    def test_relevance_product(self):
        h = gx.HMatrix(np.diag([0.5, 0.2]), np.eye(2), np.array([0.5, 0.2]), np.eye(2))
        polys = gx.principal_polynomials(h, 2)
        etas = {p.occupation: p.relevance for p in polys}
        assert etas[(1, 1)] == pytest.approx(0.1)
        assert etas[(2, 0)] == pytest.approx(0.25)

    def test_degree_two(self):
        """phi(f_k)^2 - (f_k, A f_k) with relevance eta_k^2."""
        A = np.array([[2.0, 0.3], [0.3, 1.0]])
        h = gx.classical_H(ClassicalGaussianState(A), GaussianChannelSpec(np.eye(2), 0.5 * np.eye(2)))
        p = [q for q in gx.principal_polynomials(h, 2) if q.occupation == (2, 0)][0]
        f = h.modes[:, 0]
        phi = np.random.default_rng(1).normal(size=(5, 2))
        assert np.allclose(p(phi), (phi @ f) ** 2 - f @ A @ f)
        assert p.relevance == pytest.approx(h.eta[0] ** 2)

    def test_grid_orthogonality(self):
        """Degree-1 and degree-2 polynomials are orthogonal under the Gaussian on a grid."""
        from renormalens.checks import random_2mode_instance

        A, X, Y, _ = random_2mode_instance(3)
        h = gx.classical_H(ClassicalGaussianState(A), GaussianChannelSpec(X, Y))
        grid, rho = oracles.gaussian_grid_2d(A, 81, 7.0)
        polys = gx.principal_polynomials(h, 2)
        vals = np.array([q(grid.points) for q in polys])
        gram = (vals * rho.probabilities) @ vals.T
        deg = np.array([q.degree for q in polys])
        assert np.abs(gram[np.ix_(deg == 1, deg == 2)]).max() < 1e-3

    def test_hermite_evaluation(self):
        h = gx.HMatrix(np.diag([0.5]), np.eye(1), np.array([0.5]), np.eye(1))
        p = [q for q in gx.principal_polynomials(h, 3) if q.occupation == (3,)][0]
        x = np.linspace(-2, 2, 7)
        assert np.allclose(p(x[:, None]), hermite_e.hermeval(x, [0, 0, 0, 1]))


class TestQuadraticSector:
    def test_thermal_metric(self):
        """BKM metric of thermal quadratures is 1 / log(1 + 1/nbar) per quadrature."""
        nbar = 1.0
        K = gx.linear_metric(QuantumGaussianState.thermal(nbar).A, np.array([[0, 1], [-1, 0]]))
        assert np.allclose(K, np.eye(2) / np.log1p(1 / nbar), rtol=1e-12)

    def test_fock_oracle(self):
        """Noise 0.5 on a thermal mode against a dense truncated-Fock BKM eigenproblem."""
        state = QuantumGaussianState.thermal(1.0)
        chan = GaussianChannelSpec(np.eye(2), 0.5 * np.eye(2), quantum=True)
        sec = gx.quantum_quadratic_sector(state, chan, [0])
        assert np.allclose(chan.output_covariance(state.A), 2.0 * np.eye(2))
        assert np.allclose(sec.eta, oracles.fock_sector_relevances(1.0, 1.5, dim=80), rtol=2e-3)

    def test_fock_oracle_converges(self):
        """Classical noise y^2 = 9 on a thermal mode: the Fock oracle converges onto the sector."""
        state = QuantumGaussianState.thermal(1.0)
        sec = gx.quantum_quadratic_sector(state, GaussianChannelSpec(np.eye(2), 9.0 * np.eye(2), quantum=True), [0])
        fock = oracles.fock_sector_relevances(1.0, 10.0, dim=150)
        assert np.allclose(sec.eta, fock, rtol=1e-4)

    def test_identity_channel(self):
        state = QuantumGaussianState.thermal(0.7)
        sec = gx.quantum_quadratic_sector(state, GaussianChannelSpec(np.eye(2), np.zeros((2, 2)), quantum=True), [0])
        assert np.allclose(sec.eta, 1.0)

    def test_mode_coupling(self):
        A = np.eye(4) * 1.5
        A[0, 2] = A[2, 0] = 0.3
        state = QuantumGaussianState(A)
        chan = GaussianChannelSpec(np.eye(4), np.eye(4), quantum=True)
        with pytest.raises(ModeCouplingDetected):
            gx.quantum_quadratic_sector(state, chan, [0])

    def test_asymptotic_metric(self):
        A = np.diag([2.0, 3.0])
        assert np.array_equal(gx.linear_metric(A, np.array([[0, 1], [-1, 0]]), "asymptotic"), A)


class TestKleinGordon:
    def test_uncertainty(self):
        with pytest.raises(InvalidParameter):
            gx.KleinGordonModel(1.0, 1.0, 0.5, 1.0, 0.7, [0.0])

    def test_formulas_match_sector_large_y(self):
        model = gx.KleinGordonModel(1.0, 1.0, 30.0, 30.0, 0.7, [0.5])
        phi, pi = model.sector_relevances(0.5)
        assert phi == pytest.approx(float(gx.eta_kg_phi(model, 0.5)), rel=5e-3)
        assert pi == pytest.approx(float(gx.eta_kg_pi(model, 0.5)), rel=5e-3)

    def test_monotone(self):
        k = np.linspace(0, 4, 41)
        model = gx.KleinGordonModel(1.0, 1.0, 3.0, 3.0, 0.7, k)
        assert np.all(np.diff(gx.eta_kg_phi(model, k)) < 0)
        assert np.all(np.diff(gx.eta_kg_pi(model, k)) < 0)

    def test_reference_values(self):
        """m = 1, beta = 1, k = 0.5, y = 3, sigma = 0.7, evaluated independently with math."""
        model = gx.KleinGordonModel(1.0, 1.0, 3.0, 3.0, 0.7, [0.5])
        assert float(gx.eta_kg_phi(model, 0.5)) == pytest.approx(0.07236859156910921, rel=1e-13)
        assert float(gx.eta_kg_pi(model, 0.5)) == pytest.approx(0.08869233689989701, rel=1e-13)
        phi, pi = model.sector_relevances(0.5)
        assert phi == pytest.approx(0.07236859156910921, rel=0.05)
        assert pi == pytest.approx(0.08869233689989701, rel=0.05)

    def test_large_k(self):
        model = gx.KleinGordonModel(1.0, 1.0, 3.0, 3.0, 0.7, [0.0])
        assert gx.eta_kg_phi(model, 20.0) < 1e-50 and gx.eta_kg_pi(model, 20.0) < 1e-50

    def test_field_norm(self):
        assert gx.kg_field_norm(gx.KleinGordonModel(1.0, 1.0, 3.0, 3.0, 0.7, [0.0]), 0.0) == 1.0
        assert gx.kg_field_norm(gx.KleinGordonModel(1.0, 2.0, 3.0, 3.0, 0.7, [0.0]), 0.0) == 0.5

    def test_lattice_momenta(self):
        model = gx.KleinGordonModel.lattice(8, 1.0, 1.0, 3.0, 3.0, 0.7)
        assert np.allclose(np.sort(model.k_grid), 2 * np.pi * np.arange(-4, 4) / 8)

    def test_euclidean_eta(self):
        assert gx.euclidean_eta(1.0, 0.5, 2.0, 0.0) == pytest.approx(0.2)

    def test_euclidean_lattice_spectrum(self):
        model = gx.KleinGordonModel.lattice(16, 1.0, 1.0, 3.0, 3.0, 0.7)
        state, chan = gx.euclidean_lattice(model)
        h = gx.classical_H(state, chan)
        expected = np.sort(gx.euclidean_eta(1.0, 0.7, 3.0, model.k_grid))
        assert np.allclose(np.sort(h.eta), expected, rtol=1e-10)

    def test_euclidean_lattice_needs_symmetric_grid(self):
        model = gx.KleinGordonModel(1.0, 1.0, 3.0, 3.0, 0.7, [0.5, 1.0])
        with pytest.raises(InvalidParameter):
            gx.euclidean_lattice(model)
