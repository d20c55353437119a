"""Tests for principal spectra, equivalence and distinguishability."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian, random_state
from renormalens.channels import (
    StochasticChannel,
    apply,
    apply_linear,
    depolarizing_channel,
    gaussian_convolution_channel,
    identity_channel,
)
from renormalens.checks import random_classical_pair, random_kraus_channel
from renormalens.errors import IncompleteSpan, InvalidParameter, ZeroFeature
from renormalens.gaussian_exact import KleinGordonModel
from renormalens.spectra import (
    distinguishability,
    distinguishability_density,
    equivalence_test,
    principal_spectrum,
    relevance_of,
)
from renormalens.statespace import (
    DiscreteDistribution,
    EffectiveHamiltonian1D,
    build_gibbs_1d,
    center,
    metric_inner,
    observable_inner,
)


class TestPrincipalSpectrum:
    def test_identity_channel(self, rng):
        rho = random_state(rng, 3)
        spec = principal_spectrum(identity_channel(rho), rho)
        assert len(spec) == 8
        assert np.allclose(spec.eta, 1.0, atol=1e-10)

    def test_constant_channel(self):
        rho = DiscreteDistribution.from_weights(np.array([1.0, 2.0, 3.0, 4.0]))
        e = StochasticChannel(np.full((2, 4), 0.5))
        assert np.allclose(principal_spectrum(e, rho).eta, 0.0, atol=1e-12)

    def test_full_depolarizing(self, rng):
        rho = random_state(rng, 2)
        assert np.allclose(principal_spectrum(depolarizing_channel(2, 1.0), rho).eta, 0.0, atol=1e-12)

    def test_hermite_spectrum(self, single_mode):
        rho, e = single_mode
        spec = principal_spectrum(e, rho, 5)
        assert np.allclose(spec.eta, 0.2 ** np.arange(1, 6), rtol=1e-6)

    def test_bounds_and_order(self, rng):
        for _ in range(10):
            rho, e = random_classical_pair(rng, 8, 5)
            eta = principal_spectrum(e, rho).eta
            assert np.all(eta >= -1e-12) and np.all(eta <= 1 + 1e-12)
            assert np.all(np.diff(eta) <= 1e-14)

    def test_features_orthonormal(self, rng):
        rho = random_state(rng, 3)
        spec = principal_spectrum(random_kraus_channel(rng, 3, 2), rho)
        gram = np.array([[metric_inner(rho, a, b) for b in spec.features] for a in spec.features])
        assert np.allclose(gram, np.eye(len(spec)), atol=1e-9)

    def test_features_traceless(self, rng):
        rho, e = random_classical_pair(rng, 7, 4)
        spec = principal_spectrum(e, rho)
        assert np.allclose(spec.features.sum(axis=1), 0.0, atol=1e-10)

    def test_relevance_of_feature(self, rng):
        rho = random_state(rng, 3)
        e = random_kraus_channel(rng, 3, 3)
        spec = principal_spectrum(e, rho)
        for eta, x in zip(spec.eta[:3], spec.features[:3]):
            assert relevance_of(e, rho, x) == pytest.approx(eta, abs=1e-9)

    def test_observables_dual(self, rng):
        rho, e = random_classical_pair(rng, 6, 4)
        spec = principal_spectrum(e, rho)
        gram = np.array([[observable_inner(rho, a, b) for b in spec.observables] for a in spec.observables])
        assert np.allclose(gram, np.eye(len(spec)), atol=1e-9)

    def test_threshold(self, single_mode):
        rho, e = single_mode
        spec = principal_spectrum(e, rho, 6, eta_threshold=1e-3)
        assert len(spec) == 4

    def test_bad_request(self, rng):
        rho = random_state(rng, 2)
        with pytest.raises(InvalidParameter):
            principal_spectrum(identity_channel(rho), rho, 4)

    def test_zero_feature(self, rng):
        rho = random_state(rng, 2)
        with pytest.raises(ZeroFeature):
            relevance_of(identity_channel(rho), rho, np.zeros((2, 2)))

    def test_deterministic(self, rng):
        rho, e = random_classical_pair(rng, 6, 4)
        a = principal_spectrum(e, rho)
        b = principal_spectrum(e, rho)
        assert np.array_equal(a.eta, b.eta) and np.array_equal(a.features, b.features)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_data_processing(seed):
    """Composing with a second channel cannot raise relevances."""
    rng = np.random.default_rng(seed)
    rho, e1 = random_classical_pair(rng, 6, 5)
    k2 = rng.uniform(0.1, 1.0, size=(4, 5))
    e2 = StochasticChannel(k2 / k2.sum(axis=0))
    both = StochasticChannel(e2.kernel @ e1.kernel)
    eta1 = principal_spectrum(e1, rho).eta
    eta12 = principal_spectrum(both, rho).eta
    assert np.all(eta12[:4] <= eta1[:4] + 1e-10)


class TestEquivalence:
    def test_matched_gaussian(self):
        grid = (-10.0, 10.0, 801)
        h0 = EffectiveHamiltonian1D.from_physical(1.0, 0.05)
        from renormalens.rgflow import match_second_moment

        ra = build_gibbs_1d(h0, *grid)
        rb = build_gibbs_1d(match_second_moment(h0), *grid)
        spec = principal_spectrum(gaussian_convolution_channel(*grid, 1.0), rb, 4)
        assert equivalence_test(ra, rb, spec, 2, 1e-6)
        assert not equivalence_test(ra, rb, spec, 4, 1e-6)

    def test_self(self, single_mode):
        rho, e = single_mode
        report = equivalence_test(rho, rho, principal_spectrum(e, rho, 3), 3, 1e-12)
        assert report.equivalent and np.all(report.gaps == 0)


class TestDistinguishability:
    def test_he1(self, single_mode):
        rho, e = single_mode
        assert distinguishability(e, rho, rho.x, principal_spectrum(e, rho)) == pytest.approx(0.2, abs=1e-3)

    def test_bounded_by_norm(self, rng):
        rho = random_state(rng, 3)
        e = random_kraus_channel(rng, 3, 2)
        a = random_hermitian(rng, 3)
        a0 = center(rho, a)
        assert distinguishability(e, rho, a, principal_spectrum(e, rho)) <= observable_inner(rho, a0, a0) + 1e-10

    def test_constant_is_zero(self, single_mode):
        rho, e = single_mode
        assert distinguishability(e, rho, np.ones(rho.dim), principal_spectrum(e, rho, 3)) == 0.0

    def test_incomplete_span(self, single_mode):
        rho, e = single_mode
        with pytest.raises(IncompleteSpan):
            distinguishability(e, rho, rho.x ** 3, principal_spectrum(e, rho, 2))

    def test_matches_direct_contraction(self, rng):
        """D(a) = <E(Omega a), E(Omega a)>_{E rho} for centered a."""
        from renormalens.statespace import omega

        rho, e = random_classical_pair(rng, 6, 4)
        a = center(rho, rng.normal(size=6))
        x = apply_linear(e, omega(rho, a))
        direct = metric_inner(apply(e, rho), x, x)
        assert distinguishability(e, rho, a, principal_spectrum(e, rho)) == pytest.approx(direct, rel=1e-9)


class TestDensity:
    def test_converges(self):
        model = KleinGordonModel.lattice(64, 1.0, 1.0, 3.0, 3.0, 0.7)
        report = distinguishability_density(model)
        assert [v for v, _ in report] == [8, 16, 32, 64]
        assert report.last_relative_change < 0.05

    def test_zero_observable(self):
        model = KleinGordonModel.lattice(16, 1.0, 1.0, 3.0, 3.0, 0.7)
        assert all(d == 0.0 for _, d in distinguishability_density(model, volumes=(4, 16), coupling=0.0))

    def test_full_volume_momentum_space(self):
        """At full volume sum_x :phi_x^2: = sum_k :|phi_k|^2:, so D = 2 sum_k eta_k^2 v_k^2, v_k = 1/(beta w_k^2)."""
        from renormalens.gaussian_exact import euclidean_eta

        model = KleinGordonModel.lattice(8, 1.0, 1.0, 3.0, 3.0, 0.7)
        eta = euclidean_eta(1.0, 0.7, 3.0, model.k_grid)
        v = 1.0 / model.omega(model.k_grid) ** 2
        expected = 0.7**2 * 2.0 * np.sum(eta**2 * v**2) / 8
        report = distinguishability_density(model, sigma_power=2.0, volumes=(8,))
        assert report.pairs[0][1] == pytest.approx(expected, rel=1e-10)

    def test_coupling_scaling(self):
        model = KleinGordonModel.lattice(16, 1.0, 1.0, 3.0, 3.0, 0.7)
        one = distinguishability_density(model, volumes=(8,))
        two = distinguishability_density(model, volumes=(8,), coupling=2.0)
        assert two.pairs[0][1] == pytest.approx(4 * one.pairs[0][1], rel=1e-12)

    def test_volume_validation(self):
        model = KleinGordonModel.lattice(16, 1.0, 1.0, 3.0, 3.0, 0.7)
        with pytest.raises(InvalidParameter):
            distinguishability_density(model, volumes=(8, 32))
