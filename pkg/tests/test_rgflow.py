"""Tests for moment matching and regulator trajectories."""
import numpy as np
import pytest
from scipy import integrate

from renormalens.channels import gaussian_convolution_channel
from renormalens.errors import InvalidParameter, NonNormalizable
from renormalens.rgflow import (
    flow_invariance_report,
    gibbs_moments,
    match_second_moment,
    perturbative_moments,
    regulator_trajectory,
)
from renormalens.spectra import principal_spectrum
from renormalens.statespace import EffectiveHamiltonian1D, build_gibbs_1d


def grid_moment(h, k):
    x = np.linspace(-15, 15, 30001)
    w = np.exp(-h(x))
    return integrate.simpson(x**k * w, x=x) / integrate.simpson(w, x=x)


def flow_spectrum(m2):
    base = build_gibbs_1d(EffectiveHamiltonian1D({2: 0.5 / m2}), -12.0, 12.0, 801)
    return principal_spectrum(gaussian_convolution_channel(-12.0, 12.0, 801, 1.0), base, 4)


class TestMoments:
    def test_gaussian(self):
        m = gibbs_moments(EffectiveHamiltonian1D.from_physical(1.7), [1, 2, 4])
        assert m[1] == 0.0
        assert m[2] == pytest.approx(1.7**2, rel=1e-12)
        assert m[4] == pytest.approx(3 * 1.7**4, rel=1e-12)

    def test_sextic_against_simpson(self):
        h = EffectiveHamiltonian1D.from_physical(1.0, 0.3, Lambda=5.0)
        m = gibbs_moments(h, [2, 4])
        assert m[2] == pytest.approx(grid_moment(h, 2), rel=1e-9)
        assert m[4] == pytest.approx(grid_moment(h, 4), rel=1e-9)

    def test_double_well(self):
        """Negative quartic term stabilized by x^6: the floor sits away from the origin."""
        h = EffectiveHamiltonian1D({2: 0.5, 4: -2.0, 6: 0.5})
        assert gibbs_moments(h, [2])[2] == pytest.approx(grid_moment(h, 2), rel=1e-9)

    def test_perturbative_expansion(self):
        """The remainder is second order: the lam^2 coefficient of <x^2> tends to 384."""
        coef = []
        for lam in (1e-4, 5e-5):
            m = gibbs_moments(EffectiveHamiltonian1D.from_physical(1.0, lam), [2, 4])
            p2, p4 = perturbative_moments(1.0, lam)
            coef.append((m[2] - p2) / lam**2)
            assert abs(m[4] - p4) < 5000 * lam**2
        assert coef[1] == pytest.approx(384.0, rel=0.02)

    def test_non_normalizable(self):
        h = EffectiveHamiltonian1D.from_physical(1.0, -0.1, perturbative=True)
        with pytest.raises(NonNormalizable):
            gibbs_moments(h, [2])


class TestMatchSecondMoment:
    def test_gaussian_unchanged(self):
        h = EffectiveHamiltonian1D.from_physical(1.2)
        assert match_second_moment(h).c(2) == pytest.approx(h.c(2))

    def test_quartic(self):
        h0 = EffectiveHamiltonian1D.from_physical(1.0, 0.05)
        h1 = match_second_moment(h0)
        assert set(h1.coefficients) == {2}
        assert 0.5 / h1.c(2) == pytest.approx(gibbs_moments(h0, [2])[2], rel=1e-12)


class TestTrajectory:
    ref = EffectiveHamiltonian1D.from_physical(1.0, -0.02, perturbative=True)

    def test_residuals(self):
        traj = regulator_trajectory(self.ref, [10.0, 20.0, 40.0])
        assert [p.regulator for p in traj] == [10.0, 20.0, 40.0]
        assert max(np.abs(p.residuals).max() for p in traj) <= 1e-8

    def test_matches_target(self):
        traj = regulator_trajectory(self.ref, [20.0])
        m = gibbs_moments(traj[0].hamiltonian, [2, 4])
        target = perturbative_moments(1.0, -0.02)
        assert m[2] == pytest.approx(target[0], rel=1e-9)
        assert m[4] == pytest.approx(target[1], rel=1e-9)

    def test_normalizable_reference(self):
        ref = EffectiveHamiltonian1D.from_physical(1.0, 0.05)
        traj = regulator_trajectory(ref, [50.0])
        m = gibbs_moments(ref, [2, 4])
        assert gibbs_moments(traj[0].hamiltonian, [4])[4] == pytest.approx(m[4], rel=1e-9)

    def test_continuity_under_refinement(self):
        """Adjacent jumps shrink with grid spacing and are small on a fine grid."""
        coarse = regulator_trajectory(self.ref, [10.0, 20.0, 40.0])
        fine = regulator_trajectory(self.ref, 10.0 * 2.0 ** (np.arange(17) / 8))

        def jumps(traj):
            p = np.array([[q.tau, q.lam] for q in traj])
            return np.abs(np.diff(p, axis=0)).max()

        assert jumps(fine) < 0.1
        assert jumps(fine) < jumps(coarse) / 4

    def test_threads_agree(self):
        grid = [10.0, 15.0, 20.0]
        a = regulator_trajectory(self.ref, grid, workers=1)
        b = regulator_trajectory(self.ref, grid, workers=3)
        assert [p.parameters for p in a] == [p.parameters for p in b]

    def test_invalid(self):
        with pytest.raises(InvalidParameter):
            regulator_trajectory(self.ref, [-1.0])
        with pytest.raises(InvalidParameter):
            regulator_trajectory(EffectiveHamiltonian1D.from_physical(1.0, 0.1, Lambda=3.0), [10.0])


class TestFlowInvariance:
    ref = EffectiveHamiltonian1D.from_physical(1.0, -0.02, perturbative=True)

    def test_invariant(self):
        traj = regulator_trajectory(self.ref, [10.0, 20.0, 40.0])
        report = flow_invariance_report(traj, flow_spectrum(perturbative_moments(1.0, -0.02)[0]), 4)
        assert report.invariant
        assert report.expectations.shape == (3, 4)

    def test_negative_control(self):
        """Holding (tau, lambda) fixed while the regulator changes breaks invariance."""
        traj = regulator_trajectory(self.ref, [10.0, 20.0])
        from renormalens.rgflow import FlowPoint

        frozen = [traj[0], FlowPoint({**traj[0].parameters, 6: 1 / 20.0}, traj[0].matched_moments, 20.0)]
        report = flow_invariance_report(frozen, flow_spectrum(perturbative_moments(1.0, -0.02)[0]), 4)
        assert not report.invariant
        assert report.max_deviation > 1e-3
