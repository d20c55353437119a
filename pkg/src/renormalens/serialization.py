"""JSON and CSV interchange for states, channels, spectra and models.

Output is deterministic: keys are sorted and floats carry 17 significant
digits, so identical inputs give byte-identical files. Complex numbers are
stored as ``[re, im]`` pairs.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .channels import GaussianChannelSpec, QuantumChannel, StochasticChannel
from .errors import InvalidParameter, UnsupportedInteraction
from .gaussian_exact import KleinGordonModel
from .perturbation import QuarticInteraction
from .spectra import RelevanceSpectrum
from .statespace import (
    ClassicalGaussianState,
    DensityMatrix,
    DiscreteDistribution,
    GridDistribution,
    QuantumGaussianState,
)

FLOAT_FORMAT = "%.17g"


# ---------------------------------------------------------------------------
# canonical JSON


def _encode(obj: Any, out: list):
    if obj is None or obj is True or obj is False:
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        v = float(obj) + 0.0  # folds -0.0 into 0.0
        out.append(FLOAT_FORMAT % v if math.isfinite(v) else "null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(obj.tolist() if isinstance(obj, np.ndarray) else obj):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    elif isinstance(obj, (complex, np.complexfloating)):
        _encode([obj.real, obj.imag], out)
    else:
        raise TypeError("cannot serialize %s" % type(obj).__name__)


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, 17 significant digits, no whitespace."""
    out: list = []
    _encode(obj, out)
    return "".join(out)


def digest(obj: Any) -> str:
    """SHA-256 of the canonical JSON of ``obj``."""
    return hashlib.sha256(dumps(obj).encode()).hexdigest()


def _complex_array(a):
    a = np.asarray(a)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _from_complex(data):
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise InvalidParameter("complex arrays are stored as [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _require(data, *keys):
    missing = [k for k in keys if k not in data]
    if missing:
        raise InvalidParameter("missing keys: %s" % ", ".join(missing))


# ---------------------------------------------------------------------------
# states


def state_to_dict(rho) -> dict:
    if isinstance(rho, GridDistribution):
        return {"kind": "grid", "values": rho.values, "grid_min": rho.grid_min, "grid_max": rho.grid_max}
    if isinstance(rho, DiscreteDistribution):
        return {"kind": "discrete", "values": rho.values, "dx": rho.dx}
    if isinstance(rho, DensityMatrix):
        return {"kind": "density", "entries": _complex_array(rho.entries)}
    if isinstance(rho, ClassicalGaussianState):
        return {"kind": "cgauss", "A": rho.A}
    if isinstance(rho, QuantumGaussianState):
        return {"kind": "qgauss", "A": rho.A, "Delta": rho.Delta}
    raise TypeError("unknown state type %s" % type(rho).__name__)


def state_from_dict(data: dict):
    _require(data, "kind")
    kind = data["kind"]
    if kind == "grid":
        _require(data, "values", "grid_min", "grid_max")
        return GridDistribution(np.asarray(data["values"], dtype=float), data["grid_min"], data["grid_max"])
    if kind == "discrete":
        _require(data, "values")
        return DiscreteDistribution(np.asarray(data["values"], dtype=float), data.get("dx", 1.0))
    if kind == "density":
        _require(data, "entries")
        return DensityMatrix(_from_complex(data["entries"]))
    if kind == "cgauss":
        _require(data, "A")
        return ClassicalGaussianState(np.asarray(data["A"], dtype=float))
    if kind == "qgauss":
        _require(data, "A")
        delta = data.get("Delta")
        return QuantumGaussianState(np.asarray(data["A"], dtype=float),
                                    None if delta is None else np.asarray(delta, dtype=float))
    raise InvalidParameter("unknown state kind %r" % kind)


def state_digest(rho) -> str:
    return digest(state_to_dict(rho))


# ---------------------------------------------------------------------------
# channels


def channel_to_dict(e) -> dict:
    if isinstance(e, StochasticChannel):
        return {"kind": "stochastic", "kernel": e.kernel, "dx_in": e.dx_in, "dx_out": e.dx_out,
                "out_grid": None if e.out_grid is None else list(e.out_grid)}
    if isinstance(e, QuantumChannel):
        return {"kind": "kraus", "kraus": [_complex_array(k) for k in e.kraus]}
    if isinstance(e, GaussianChannelSpec):
        return {"kind": "gaussian", "X": e.X, "Y": e.Y, "quantum": e.quantum,
                "Delta": None if e.Delta is None else e.Delta}
    raise TypeError("unknown channel type %s" % type(e).__name__)


def channel_from_dict(data: dict):
    _require(data, "kind")
    kind = data["kind"]
    if kind == "stochastic":
        _require(data, "kernel")
        grid = data.get("out_grid")
        return StochasticChannel(np.asarray(data["kernel"], dtype=float), data.get("dx_in", 1.0),
                                 data.get("dx_out", 1.0), None if grid is None else tuple(grid))
    if kind == "kraus":
        _require(data, "kraus")
        return QuantumChannel(tuple(_from_complex(k) for k in data["kraus"]))
    if kind == "gaussian":
        _require(data, "X", "Y")
        delta = data.get("Delta")
        return GaussianChannelSpec(np.asarray(data["X"], dtype=float), np.asarray(data["Y"], dtype=float),
                                   bool(data.get("quantum", False)),
                                   None if delta is None else np.asarray(delta, dtype=float))
    raise InvalidParameter("unknown channel kind %r" % kind)


# ---------------------------------------------------------------------------
# spectra, models, interactions


def spectrum_to_dict(spectrum: RelevanceSpectrum, labels: Optional[Sequence[str]] = None) -> dict:
    obs = spectrum.observables
    observables = _complex_array(obs) if np.iscomplexobj(obs) else np.asarray(obs)
    out = {"eta": spectrum.eta, "observables": observables,
           "base_state_digest": state_digest(spectrum.rho_ref)}
    if labels is not None:
        out["labels"] = list(labels)
    return out


def spectrum_csv(spectrum: RelevanceSpectrum, labels: Optional[Sequence[str]] = None) -> str:
    labels = list(labels) if labels is not None else ["" for _ in spectrum.eta]
    return rows_to_csv(["index", "eta", "label"],
                       [(j, float(e), lab) for j, (e, lab) in enumerate(zip(spectrum.eta, labels))])


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write("# %s\n" % c)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([FLOAT_FORMAT % v if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def kg_model_to_dict(model: KleinGordonModel) -> dict:
    return {"m": model.m, "beta": model.beta, "y_phi": model.y_phi, "y_pi": model.y_pi,
            "sigma": model.sigma, "k_grid": model.k_grid}


def kg_model_from_dict(data: dict) -> KleinGordonModel:
    _require(data, "m", "beta", "y_phi", "y_pi", "sigma", "k_grid")
    return KleinGordonModel(float(data["m"]), float(data["beta"]), float(data["y_phi"]),
                            float(data["y_pi"]), float(data["sigma"]), np.asarray(data["k_grid"], dtype=float))


def interaction_to_dict(inter: QuarticInteraction) -> dict:
    return {"type": inter.kind, "sites": inter.sites, "coupling": inter.coupling}


def interaction_from_dict(data: dict, n_field: Optional[int] = None) -> QuarticInteraction:
    """Quartic interaction; ``sites`` holds site functions or, with ``n_field``, lattice indices."""
    _require(data, "type", "sites")
    if data["type"] != "quartic":
        raise UnsupportedInteraction("only quartic interactions are supported, got %r" % data["type"])
    sites = data["sites"]
    coupling = float(data.get("coupling", 1.0))
    if sites and all(isinstance(s, int) for s in sites):
        n = n_field if n_field is not None else data.get("n_field")
        if n is None:
            raise InvalidParameter("integer sites need the field dimension n_field")
        return QuarticInteraction.local(int(n), coupling, sites)
    return QuarticInteraction(np.asarray(sites, dtype=float), coupling)
