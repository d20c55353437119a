"""Round trips and determinism of the interchange formats."""
import json

import numpy as np
import pytest

from conftest import random_state
from renormalens import serialization as ser
from renormalens.channels import GaussianChannelSpec, depolarizing_channel, gaussian_convolution_channel
from renormalens.errors import InvalidParameter, UnsupportedInteraction
from renormalens.gaussian_exact import KleinGordonModel
from renormalens.perturbation import QuarticInteraction
from renormalens.spectra import principal_spectrum
from renormalens.statespace import (
    ClassicalGaussianState,
    DiscreteDistribution,
    EffectiveHamiltonian1D,
    QuantumGaussianState,
    build_gibbs_1d,
)


class TestCanonicalJson:
    def test_sorted_and_exact(self):
        text = ser.dumps({"b": 0.1, "a": [1, 2.5]})
        assert text == '{"a":[1,2.5],"b":0.10000000000000001}'
        assert json.loads(text)["b"] == 0.1

    def test_signed_zero(self):
        assert ser.dumps([-0.0]) == "[0]"

    def test_nan_is_null(self):
        assert ser.dumps([float("nan")]) == "[null]"

    def test_digest_stable(self):
        assert ser.digest({"x": 1.0, "y": 2}) == ser.digest({"y": 2, "x": 1.0})


class TestStates:
    def test_grid(self):
        rho = build_gibbs_1d(EffectiveHamiltonian1D({2: 0.5}), -8, 8, 81)
        back = ser.state_from_dict(json.loads(ser.dumps(ser.state_to_dict(rho))))
        assert np.array_equal(back.values, rho.values)
        assert ser.state_digest(back) == ser.state_digest(rho)

    def test_density(self, rng):
        rho = random_state(rng, 3)
        back = ser.state_from_dict(json.loads(ser.dumps(ser.state_to_dict(rho))))
        assert np.array_equal(back.entries, rho.entries)

    @pytest.mark.parametrize("rho", [
        DiscreteDistribution.from_weights(np.array([1.0, 2.0, 3.0]), 0.5),
        ClassicalGaussianState(np.diag([1.0, 2.0])),
        QuantumGaussianState.thermal(0.5),
    ])
    def test_others(self, rho):
        back = ser.state_from_dict(json.loads(ser.dumps(ser.state_to_dict(rho))))
        assert ser.state_digest(back) == ser.state_digest(rho)

    def test_unknown_kind(self):
        with pytest.raises(InvalidParameter):
            ser.state_from_dict({"kind": "spinor"})


class TestChannels:
    @pytest.mark.parametrize("e", [
        gaussian_convolution_channel(-3, 3, 31, 0.5),
        depolarizing_channel(2, 0.3),
        GaussianChannelSpec(0.5 * np.eye(2), np.eye(2), quantum=True),
    ])
    def test_round_trip(self, e):
        d = ser.channel_to_dict(e)
        back = ser.channel_from_dict(json.loads(ser.dumps(d)))
        assert ser.dumps(ser.channel_to_dict(back)) == ser.dumps(d)


class TestOther:
    def test_spectrum(self):
        rho = build_gibbs_1d(EffectiveHamiltonian1D({2: 0.5}), -8, 8, 161)
        spec = principal_spectrum(gaussian_convolution_channel(-8, 8, 161, 1.0), rho, 3)
        d = ser.spectrum_to_dict(spec, ["He1", "He2", "He3"])
        assert d["base_state_digest"] == ser.state_digest(rho)
        csv = ser.spectrum_csv(spec, ["He1", "He2", "He3"])
        assert csv.splitlines()[0] == "index,eta,label"
        assert float(csv.splitlines()[1].split(",")[1]) == spec.eta[0]

    def test_kg_model(self):
        m = KleinGordonModel(1.0, 2.0, 3.0, 4.0, 0.5, [0.0, 1.0])
        back = ser.kg_model_from_dict(ser.kg_model_to_dict(m))
        assert ser.dumps(ser.kg_model_to_dict(back)) == ser.dumps(ser.kg_model_to_dict(m))

    def test_interaction(self):
        inter = ser.interaction_from_dict({"type": "quartic", "sites": [0, 2], "coupling": 0.5}, n_field=3)
        assert np.array_equal(inter.sites, np.eye(3)[[0, 2]])
        back = ser.interaction_from_dict(json.loads(ser.dumps(ser.interaction_to_dict(inter))))
        assert np.array_equal(back.sites, inter.sites) and back.coupling == 0.5

    def test_interaction_errors(self):
        with pytest.raises(UnsupportedInteraction):
            ser.interaction_from_dict({"type": "cubic", "sites": [0]}, n_field=1)
        with pytest.raises(InvalidParameter):
            ser.interaction_from_dict({"type": "quartic", "sites": [0]})
        assert isinstance(QuarticInteraction.local(2), QuarticInteraction)
