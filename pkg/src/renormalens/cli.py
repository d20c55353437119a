"""Command-line scenario runner.

Subcommands: spectrum | kg | flow | perturb | check. Parameters come from
flags or a JSON config file (``--config``); flags win. Every output embeds the
config digest and library version. Exit codes: 0 ok, 1 failed checks,
2 invalid configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import nullcontext
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from . import __version__
from . import gaussian_exact as gx
from .errors import NumericalError, ValidationError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

# (name, type, default, help) per subcommand
PARAMS: Dict[str, List[tuple]] = {
    "spectrum": [
        ("scenario", str, "single-mode", "single-mode | quartic"),
        ("channel", str, "convolution", "convolution | identity"),
        ("tau", float, 1.0, "width of the Gaussian part"),
        ("lam", float, 0.0, "x^4 coefficient (quartic scenario)"),
        ("sigma", float, 2.0, "convolution width"),
        ("grid_n", int, 601, "grid points"),
        ("domain", float, 10.0, "grid half-width"),
        ("top", int, 6, "number of principal features"),
        ("eta_threshold", float, None, "drop relevances below this value"),
    ],
    "kg": [
        ("m", float, 1.0, "mass"),
        ("beta", float, 1.0, "inverse temperature"),
        ("y_phi", float, 3.0, "field resolution"),
        ("y_pi", float, 3.0, "momentum resolution"),
        ("sigma", float, 0.7, "spatial resolution"),
        ("k_min", float, 0.0, "smallest momentum"),
        ("k_max", float, 4.0, "largest momentum"),
        ("n_k", int, 41, "number of momenta"),
        ("sector", bool, False, "add exact quadratic-sector relevances"),
    ],
    "flow": [
        ("tau", float, 1.0, "reference width"),
        ("lam", float, -0.02, "reference x^4 coefficient (first order when negative)"),
        ("lambdas", str, "10,20,40", "comma-separated regulator values"),
        ("sigma", float, 1.0, "convolution width of the invariance spectrum"),
        ("n_relevant", int, 4, "number of principal observables checked"),
        ("grid_n", int, 801, "grid points of the invariance spectrum"),
        ("domain", float, 12.0, "grid half-width of the invariance spectrum"),
    ],
    "perturb": [
        ("tau", float, 1.0, "width of the Gaussian state"),
        ("sigma", float, 1.0, "convolution width"),
        ("coupling", float, 1.0, "quartic coupling g in (g/4!) phi^4"),
        ("lam", float, 0.01, "perturbation parameter"),
        ("max_degree", int, 8, "Fock truncation"),
        ("levels", int, 4, "highest level degree reported"),
    ],
    "check": [
        ("only", str, None, "comma-separated subset, e.g. A1,A3"),
    ],
}


class ConfigError(ValidationError):
    pass


def _bool(v):
    if isinstance(v, bool):
        return v
    if str(v).lower() in ("1", "true", "yes", "on"):
        return True
    if str(v).lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError("not a boolean: %r" % v)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="renormalens", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version="renormalens %s" % __version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, params in PARAMS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with parameters (flags win)")
        p.add_argument("--format", choices=["json", "csv"], default=None)
        p.add_argument("--output", "-o", help="output path (default: stdout)")
        p.add_argument("--seed", type=int, default=None)
        for pname, ptype, _, phelp in params:
            flag = "--" + pname.replace("_", "-")
            if ptype is bool:
                p.add_argument(flag, dest=pname, action="store_const", const=True, default=None, help=phelp)
            else:
                p.add_argument(flag, dest=pname, type=ptype, default=None, help=phelp)
    return parser


def resolve_config(command: str, args: argparse.Namespace) -> Dict[str, Any]:
    """Merge defaults < config file < flags and coerce types."""
    file_cfg: Dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("cannot read config %s: %s" % (args.config, exc)) from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    known = {p[0] for p in PARAMS[command]} | {"seed", "format"}
    unknown = set(file_cfg) - known
    if unknown:
        raise ConfigError("unknown config keys: %s" % ", ".join(sorted(unknown)))
    cfg: Dict[str, Any] = {}
    for pname, ptype, default, _ in PARAMS[command] + [("seed", int, None, ""), ("format", str, "json", "")]:
        val = getattr(args, pname, None)
        if val is None:
            val = file_cfg.get(pname, default)
        if val is not None:
            try:
                val = _bool(val) if ptype is bool else ptype(val)
            except (TypeError, ValueError) as exc:
                raise ConfigError("invalid value for %s: %r" % (pname, val)) from exc
        cfg[pname] = val
    if cfg["format"] not in ("json", "csv"):
        raise ConfigError("format must be json or csv")
    return cfg


def _positive(cfg, *names):
    for n in names:
        if not cfg[n] > 0:
            raise ConfigError("%s must be positive, got %r" % (n, cfg[n]))


# ---------------------------------------------------------------------------
# runners return (json payload, csv header, csv rows)


def run_spectrum(cfg):
    from .channels import gaussian_convolution_channel, identity_channel
    from .spectra import principal_spectrum
    from .statespace import EffectiveHamiltonian1D, build_gibbs_1d

    _positive(cfg, "tau", "sigma", "domain", "grid_n", "top")
    if cfg["scenario"] not in ("single-mode", "quartic"):
        raise ConfigError("unknown scenario %r" % cfg["scenario"])
    lam = cfg["lam"] if cfg["scenario"] == "quartic" else 0.0
    L, n = cfg["domain"], cfg["grid_n"]
    rho = build_gibbs_1d(EffectiveHamiltonian1D.from_physical(cfg["tau"], lam), -L, L, n)
    if cfg["channel"] == "convolution":
        e = gaussian_convolution_channel(-L, L, n, cfg["sigma"])
    elif cfg["channel"] == "identity":
        e = identity_channel(rho)
    else:
        raise ConfigError("unknown channel %r" % cfg["channel"])
    spec = principal_spectrum(e, rho, min(cfg["top"], n - 1), cfg["eta_threshold"])
    from .serialization import spectrum_to_dict

    payload = spectrum_to_dict(spec)
    payload["x"] = rho.x
    if cfg["channel"] == "convolution" and lam == 0.0:
        payload["closed_form_eta"] = gx.single_mode_eta(cfg["tau"], cfg["sigma"]) ** np.arange(1, len(spec) + 1)
    rows = [(j, float(v), "") for j, v in enumerate(spec.eta)]
    return payload, ["index", "eta", "label"], rows


def run_kg(cfg):
    _positive(cfg, "n_k")
    k = np.linspace(cfg["k_min"], cfg["k_max"], cfg["n_k"])
    model = gx.KleinGordonModel(cfg["m"], cfg["beta"], cfg["y_phi"], cfg["y_pi"], cfg["sigma"], k)
    phi = gx.eta_kg_phi(model, k)
    pi = gx.eta_kg_pi(model, k)
    d_phi = phi * gx.kg_field_norm(model, k)
    header = ["k", "eta_phi", "eta_pi", "D_phi"]
    rows = [(float(a), float(b), float(c), float(d)) for a, b, c, d in zip(k, phi, pi, d_phi)]
    payload = {"k": k, "eta_phi": phi, "eta_pi": pi, "D_phi": d_phi, "validity": model.validity_note()}
    if cfg["sector"]:
        sec = np.array([model.sector_relevances(kk) for kk in k])
        payload["sector_eta_phi"] = sec[:, 0]
        payload["sector_eta_pi"] = sec[:, 1]
        header += ["sector_eta_phi", "sector_eta_pi"]
        rows = [r + (float(s[0]), float(s[1])) for r, s in zip(rows, sec)]
    return payload, header, rows


def run_flow(cfg):
    from .channels import gaussian_convolution_channel
    from .rgflow import flow_invariance_report, regulator_trajectory
    from .spectra import principal_spectrum
    from .statespace import EffectiveHamiltonian1D, build_gibbs_1d

    _positive(cfg, "tau", "sigma", "n_relevant", "grid_n", "domain")
    try:
        lambdas = [float(v) for v in cfg["lambdas"].split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError("lambdas must be comma-separated numbers") from exc
    ref = EffectiveHamiltonian1D.from_physical(cfg["tau"], cfg["lam"], perturbative=cfg["lam"] < 0)
    traj = regulator_trajectory(ref, lambdas)
    m2 = traj[0].matched_moments[0][1]
    L, n = cfg["domain"], cfg["grid_n"]
    base = build_gibbs_1d(EffectiveHamiltonian1D({2: 0.5 / m2}), -L, L, n)
    spec = principal_spectrum(gaussian_convolution_channel(-L, L, n, cfg["sigma"]), base, cfg["n_relevant"])
    report = flow_invariance_report(traj, spec, cfg["n_relevant"])
    dev = np.max(np.abs(report.expectations - report.expectations[0]), axis=1)
    header = ["Lambda", "tau", "lambda", "residual2", "residual4", "max_relevant_deviation"]
    rows = [(p.regulator, p.tau, p.lam, p.residuals[0], p.residuals[1], float(d)) for p, d in zip(traj, dev)]
    payload = {"trajectory": [dict(zip(header, r)) for r in rows], "matched_moments": dict(traj[0].matched_moments),
               "max_deviation": report.max_deviation, "relevant_expectations": report.expectations}
    return payload, header, rows


def run_perturb(cfg):
    from .perturbation import QuarticInteraction, first_order_spectrum, perturbation_operator
    from .channels import GaussianChannelSpec
    from .serialization import interaction_to_dict
    from .statespace import ClassicalGaussianState

    _positive(cfg, "tau", "sigma", "max_degree", "levels")
    h = gx.classical_H(ClassicalGaussianState(np.array([[cfg["tau"] ** 2]])),
                       GaussianChannelSpec(np.eye(1), np.array([[cfg["sigma"] ** 2]])))
    inter = QuarticInteraction.local(1, cfg["coupling"])
    v1 = perturbation_operator(h, inter, cfg["max_degree"])
    levels = first_order_spectrum(h, v1, cfg["lam"], min(cfg["levels"], cfg["max_degree"]))
    header = ["level", "eta0", "eta", "shift"]
    rows = [(int(sum(lv.occupation)), lv.eta0, lv.eta, lv.eta - lv.eta0) for lv in levels]
    payload = {"levels": [dict(zip(header, r)) for r in rows], "V1": v1.matrix,
               "basis": [list(s) for s in v1.basis.states], "interaction": interaction_to_dict(inter)}
    return payload, header, rows


def run_check(cfg):
    from . import checks

    names = None
    if cfg["only"]:
        names = [s.strip().upper() for s in cfg["only"].split(",") if s.strip()]
        bad = [s for s in names if s not in checks.CHECKS]
        if bad:
            raise ConfigError("unknown checks: %s" % ", ".join(bad))
    results = checks.run_all(names, seed=cfg["seed"])
    for r in results:
        print(r.line(), file=sys.stderr)
    # runtimes go to the diagnostic stream only so reports stay reproducible
    header = ["criterion", "passed"]
    rows = [(r.name, int(r.passed)) for r in results]
    payload = {"results": [r.to_dict(with_timing=False) for r in results],
               "all_passed": all(r.passed for r in results)}
    return payload, header, rows


RUNNERS: Dict[str, Callable] = {
    "spectrum": run_spectrum, "kg": run_kg, "flow": run_flow, "perturb": run_perturb, "check": run_check,
}


def _thread_limit():
    n = os.environ.get("RENORMALENS_THREADS")
    if not n:
        return nullcontext()
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return nullcontext()
    return threadpool_limits(limits=max(1, int(n)))


def render(command, cfg, payload, header, rows) -> str:
    from .serialization import digest, dumps, rows_to_csv

    public = {k: v for k, v in cfg.items() if k != "format"}
    cfg_digest = digest({"command": command, "config": public})
    if cfg["format"] == "csv":
        comments = ["renormalens %s" % __version__, "command %s" % command, "config_digest %s" % cfg_digest]
        return rows_to_csv(header, rows, comments)
    envelope = {"command": command, "config": public, "config_digest": cfg_digest,
                "version": __version__, "result": payload}
    return dumps(envelope) + "\n"


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        with _thread_limit():
            payload, header, rows = RUNNERS[args.command](cfg)
        text = render(args.command, cfg, payload, header, rows)
    except ValidationError as exc:
        print("renormalens: invalid configuration: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print("renormalens: numerical failure: %s" % exc, file=sys.stderr)
        return EXIT_NUMERICAL
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "check" and not payload["all_passed"]:
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
