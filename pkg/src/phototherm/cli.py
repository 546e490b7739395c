"""Command-line front end: flat config + flag overrides, subcommand
routing, stable CSV/JSON output schemas.

Exit codes: 0 success, 2 invalid config, 3 solver non-convergence,
4 reference-fixture failure. Failures also emit a machine-readable error
JSON on stderr. Log verbosity comes from the PHOTOTHERM_LOG environment
variable (debug / info / warning / error).
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, fields, neutral, oracle, repro
from . import taxis as taxis_map
from ._output import fmt, write_csv, write_json
from .basic_state import solve_basic_state, sublayer_location
from .errors import (ConvergenceError, InvalidParameterError, NoRootError,
                     PhototermError)
from .params import Params
from .stability import (ModeProblem, boundary_determinant, solve_growth_rate)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_FIXTURE = 4

log = logging.getLogger(__name__)

# one flat namespace: key -> (type tag, default, help)
SCHEMA = {
    "R_T": ("float", 0.0, "thermal Rayleigh number"),
    "Le": ("float", 4.0, "Lewis number"),
    "Pr": ("float", 5.0, "Prandtl number"),
    "U_s": ("float", 15.0, "scaled swimming speed"),
    "hbar": ("float", 0.5, "optical depth of the layer"),
    "chi": ("float", None, "taxis steepness (alternative to G_c)"),
    "G_c": ("float", None, "critical total intensity (alternative to chi)"),
    "I0": ("float", 0.8, "incident light intensity"),
    "n_steps": ("int", 2000, "shooting integration steps"),
    "M": ("int", 2000, "equilibrium grid intervals"),
    "reorth_every": ("int", 50, "steps between re-orthonormalizations"),
    "ncheb": ("int", 64, "collocation nodes for spectral checks"),
    "n_pts": ("int", 60, "samples per neutral branch"),
    "a_lo": ("float", 0.1, "wavenumber window lower edge"),
    "a_hi": ("float", 10.0, "wavenumber window upper edge"),
    "nx": ("int", 128, "frame grid width"),
    "nz": ("int", 65, "frame grid height"),
    "workers": ("int", 1, "worker pool size for sweeps"),
    "a": ("float", None, "wavenumber for point evaluations"),
    "Ra": ("float", None, "Rayleigh number for point evaluations"),
    "gamma_re": ("float", None, "growth-rate real part override"),
    "gamma_im": ("float", None, "growth-rate imaginary part override"),
    "k": ("int", 8, "eigenvalues to report from spectrum"),
    "rt_list": ("floatlist", None, "thermal Rayleigh numbers for sweep-rt"),
    "le_list": ("floatlist", None, "Lewis numbers for sweep-le"),
    "times": ("floatlist", [0.0, 0.16, 0.32, 0.48], "frame timestamps"),
    "n_periods": ("float", 2.0, "periods covered by phase/time series"),
    "n_t": ("int", 401, "time samples for phase/time series"),
    "probe_x1": ("float", None, "probe x1 (default quarter wavelength)"),
    "probe_x3": ("float", 0.5, "probe depth"),
    "G_lo": ("float", 0.01, "taxis curve lower intensity"),
    "G_hi": ("float", 1.0, "taxis curve upper intensity"),
    "n_G": ("int", 201, "taxis curve samples"),
    "outdir": ("str", "out", "output directory"),
    "format": ("str", "csv", "tabular output format: csv or json"),
}

COMMANDS = ("taxis", "basic-state", "dispersion", "spectrum", "neutral",
            "critical", "sweep-rt", "sweep-le", "fields", "phase", "repro")


def _coerce(key: str, value, from_flag: bool):
    kind = SCHEMA[key][0]
    try:
        if kind == "float":
            if from_flag:
                return float(value)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError
            return float(value)
        if kind == "int":
            if from_flag:
                return int(value)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValueError
            return int(value)
        if kind == "floatlist":
            if from_flag:
                return [float(x) for x in str(value).split(",") if x.strip()]
            if not isinstance(value, list):
                raise ValueError
            return [float(x) for x in value]
        return str(value)
    except (TypeError, ValueError):
        raise InvalidParameterError(
            f"config key '{key}' expects {kind}, got {value!r}")


def load_config(path: str) -> dict:
    try:
        with open(path) as f:
            raw = json.load(f)
    except OSError as e:
        raise InvalidParameterError(f"cannot read config file: {e}")
    except json.JSONDecodeError as e:
        raise InvalidParameterError(f"config file is not valid JSON: {e}")
    if not isinstance(raw, dict):
        raise InvalidParameterError("config file must hold a flat JSON object")
    unknown = sorted(set(raw) - set(SCHEMA))
    if unknown:
        raise InvalidParameterError(f"unknown config keys: {', '.join(unknown)}")
    return {k: _coerce(k, v, from_flag=False) for k, v in raw.items()}


def merge_config(args: argparse.Namespace) -> dict:
    cfg = {k: spec[1] for k, spec in SCHEMA.items()}
    if args.config:
        cfg.update(load_config(args.config))
    for key in SCHEMA:
        flag = getattr(args, key, None)
        if flag is not None:  # flags win over the file
            cfg[key] = _coerce(key, flag, from_flag=True)
    if cfg["format"] not in ("csv", "json"):
        raise InvalidParameterError(
            f"format must be csv or json, got {cfg['format']!r}")
    for key in ("n_steps", "M", "n_pts", "nx", "nz", "n_t", "n_G", "k",
                "workers", "reorth_every", "ncheb"):
        if cfg[key] < 1:
            raise InvalidParameterError(f"{key} must be positive")
    if not cfg["a_lo"] < cfg["a_hi"]:
        raise InvalidParameterError("need a_lo < a_hi")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE",
                        help="flat JSON config file; flags override it")
    for key, (_, default, help_) in SCHEMA.items():
        common.add_argument(f"--{key}", dest=key, default=None, metavar="V",
                            help=f"{help_} (default {default})")
    parser = argparse.ArgumentParser(
        prog="phototherm",
        description="Linear-stability toolkit for a light-driven suspension "
                    "heated from above")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sub.add_parser(cmd, parents=[common])
    return parser


def _params(cfg: dict) -> Params:
    return Params(R_T=cfg["R_T"], Le=cfg["Le"], Pr=cfg["Pr"], U_s=cfg["U_s"],
                  hbar=cfg["hbar"], chi=cfg["chi"], G_c=cfg["G_c"],
                  I0=cfg["I0"])


def _echo(cfg: dict) -> dict:
    return dict(cfg)


def _emit(cfg, name, schema, colnames, rows, flags=()):
    rows = [[float(v) if isinstance(v, (np.floating, np.integer)) else v
             for v in row] for row in rows]
    outdir = Path(cfg["outdir"])
    if cfg["format"] == "json":
        return write_json(outdir / f"{name}.json", schema,
                          {"columns": list(colnames), "rows": rows},
                          _echo(cfg), flags)
    return write_csv(outdir / f"{name}.csv", schema, colnames, rows,
                     _echo(cfg), flags)


def _need(cfg, *keys):
    missing = [k for k in keys if cfg[k] is None]
    if missing:
        raise InvalidParameterError(
            f"this subcommand needs config keys: {', '.join(missing)}")


def cmd_taxis(cfg) -> int:
    if cfg["chi"] is None and cfg["G_c"] is None:
        raise InvalidParameterError("provide chi or G_c")
    chi = cfg["chi"] if cfg["chi"] is not None else taxis_map.chi_from_Gc(cfg["G_c"])
    gs = np.linspace(cfg["G_lo"], cfg["G_hi"], cfg["n_G"])
    rows = [[g, taxis_map.taxis_value(g, chi), taxis_map.taxis_derivative(g, chi)]
            for g in gs]
    path = _emit(cfg, "taxis_curve", "taxis-curve v1",
                 ["G", "T_of_G", "dT_dG"], rows)
    try:
        gc = taxis_map.critical_intensity(chi)
        print(f"chi={fmt(chi)} G_c={fmt(gc)} -> {path}")
    except NoRootError:
        print(f"chi={fmt(chi)} G_c=none -> {path}")
    return EXIT_OK


def cmd_basic_state(cfg) -> int:
    p = _params(cfg)
    b = solve_basic_state(p, M=cfg["M"])
    rows = [[x, n, t, g, tv, tb] for x, n, t, g, tv, tb in
            zip(b.x3, b.nb, b.tau, b.G_b, b.T_b, b.temp_b)]
    path = _emit(cfg, "basic_state", "basic-state v1",
                 ["x3", "n_b", "tau", "G_b", "T_b", "temp_b"], rows)
    loc, val = sublayer_location(b)
    print(f"n_b max {fmt(val)} at x3={fmt(loc)} -> {path}")
    return EXIT_OK


def cmd_dispersion(cfg) -> int:
    _need(cfg, "a", "Ra")
    p = _params(cfg)
    b = solve_basic_state(p, M=cfg["M"])
    gamma = complex(cfg["gamma_re"] or 0.0, cfg["gamma_im"] or 0.0)
    d = boundary_determinant(ModeProblem(
        a=cfg["a"], p=p, b=b, gamma=gamma, Ra=cfg["Ra"],
        n_steps=cfg["n_steps"], reorth_every=cfg["reorth_every"]))
    path = write_json(Path(cfg["outdir"]) / "dispersion.json", "dispersion v1",
                      {"a": cfg["a"], "Ra": cfg["Ra"],
                       "gamma": gamma, "det": d.det,
                       "log_scale": d.log_scale, "cond": d.cond},
                      _echo(cfg))
    print(f"det={fmt(d.det.real)}{d.det.imag:+.12g}j scale=e^{fmt(d.log_scale)}"
          f" -> {path}")
    return EXIT_OK


def cmd_spectrum(cfg) -> int:
    _need(cfg, "a", "Ra")
    p = _params(cfg)
    b = solve_basic_state(p, M=cfg["M"])
    eigs = oracle.spectrum(
        oracle.build_operator(cfg["a"], cfg["Ra"], p, b, Ncheb=cfg["ncheb"]),
        k=cfg["k"])
    rows = [[i, g.real, g.imag] for i, g in enumerate(eigs)]
    path = _emit(cfg, "spectrum", "spectrum v1",
                 ["rank", "gamma_re", "gamma_im"], rows)
    lead = eigs[0]
    print(f"leading gamma = {fmt(lead.real)}{lead.imag:+.12g}j -> {path}")
    return EXIT_OK


def _analyze(cfg, p, b):
    return neutral.analyze(p, b, a_lo=cfg["a_lo"], a_hi=cfg["a_hi"],
                           n_pts=cfg["n_pts"], n_steps=cfg["n_steps"],
                           reorth_every=cfg["reorth_every"])


def _critical_payload(res: neutral.StabilityAnalysis) -> dict:
    c = res.critical
    return {
        "critical": {"a_c": c.a_c, "Ra_c": c.Ra_c, "omega_c": c.omega_c,
                     "kind": c.kind, "period": c.period, "interior": c.interior},
        "merge_a": [br.merge_a for br in res.oscillatory
                    if br.merge_a is not None],
        "stationary_missing": res.stationary.missing,
        "n_seeds": len(res.seeds),
    }


def _neutral_rows(p, res):
    rows = []
    for br in res.branches:
        for a, ra, om in zip(br.a, br.Ra, br.omega):
            rows.append([p.R_T, br.kind, float(a), float(ra), float(om)])
    return rows


def cmd_neutral(cfg) -> int:
    p = _params(cfg)
    b = solve_basic_state(p, M=cfg["M"])
    res = _analyze(cfg, p, b)
    path = _emit(cfg, "neutral_curve", "neutral-curve v1",
                 ["R_T", "branch", "a", "Ra", "omega"], _neutral_rows(p, res))
    jpath = write_json(Path(cfg["outdir"]) / "critical.json", "critical v1",
                       _critical_payload(res), _echo(cfg))
    c = res.critical
    print(f"critical {c.kind} a_c={fmt(c.a_c)} Ra_c={fmt(c.Ra_c)} "
          f"omega={fmt(c.omega_c)} -> {path}, {jpath}")
    return EXIT_OK


def cmd_critical(cfg) -> int:
    p = _params(cfg)
    b = solve_basic_state(p, M=cfg["M"])
    res = _analyze(cfg, p, b)
    path = write_json(Path(cfg["outdir"]) / "critical.json", "critical v1",
                      _critical_payload(res), _echo(cfg))
    c = res.critical
    print(f"critical {c.kind} a_c={fmt(c.a_c)} Ra_c={fmt(c.Ra_c)} "
          f"omega={fmt(c.omega_c)} period={fmt(c.period or 0.0)} -> {path}")
    return EXIT_OK


def _sweep(cfg, values, label, slug, sweep_fn) -> int:
    if not values:
        raise InvalidParameterError(f"empty {label} sweep list")
    p = _params(cfg)
    b = solve_basic_state(p, M=cfg["M"])
    results = sweep_fn(values, p, b, workers=cfg["workers"],
                       a_lo=cfg["a_lo"], a_hi=cfg["a_hi"],
                       n_pts=cfg["n_pts"], n_steps=cfg["n_steps"])
    rows, failures = [], []
    for v, out in results:
        if isinstance(out, str):
            rows.append([v, "", "", "", "", "", out])
            failures.append({label: v, "error": out})
        else:
            rows.append([v, out.kind, out.a_c, out.Ra_c, out.omega_c,
                         out.period if out.period is not None else "", ""])
    path = _emit(cfg, f"sweep_{slug}", f"sweep-{slug} v1",
                 [label, "kind", "a_c", "Ra_c", "omega_c", "period", "error"],
                 rows)
    print(f"{len(values) - len(failures)}/{len(values)} entries -> {path}")
    if failures:
        _error_json("solver failure on some sweep entries",
                    EXIT_SOLVER, entries=failures)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_sweep_rt(cfg) -> int:
    _need(cfg, "rt_list")
    return _sweep(cfg, list(cfg["rt_list"]), "R_T", "rt", neutral.sweep_RT)


def cmd_sweep_le(cfg) -> int:
    _need(cfg, "le_list")
    return _sweep(cfg, list(cfg["le_list"]), "Le", "le", neutral.sweep_Le)


def _resolve_mode(cfg, p, b) -> fields.Eigenmode:
    if cfg["a"] is not None and cfg["Ra"] is not None:
        a, ra = cfg["a"], cfg["Ra"]
        if cfg["gamma_re"] is not None or cfg["gamma_im"] is not None:
            gamma = complex(cfg["gamma_re"] or 0.0, cfg["gamma_im"] or 0.0)
        else:
            gamma = solve_growth_rate(a, ra, p, b, n_steps=cfg["n_steps"],
                                      ncheb=cfg["ncheb"])
    else:
        res = _analyze(cfg, p, b)
        c = res.critical
        a, ra, gamma = c.a_c, c.Ra_c, 1j * c.omega_c
    return fields.extract_eigenmode(a, ra, gamma, p, b,
                                    n_steps=cfg["n_steps"],
                                    reorth_every=cfg["reorth_every"])


FIELD_NAMES = ("psi", "w", "n", "T")


def cmd_fields(cfg) -> int:
    p = _params(cfg)
    b = solve_basic_state(p, M=cfg["M"])
    m = _resolve_mode(cfg, p, b)
    files = {}
    for i, t in enumerate(cfg["times"]):
        frame = fields.render_frame(m, t=t, nx=cfg["nx"], nz=cfg["nz"])
        for name in FIELD_NAMES:
            grid = getattr(frame, name)
            rows = [[frame.x1[ix], frame.x3[iz], grid[iz, ix]]
                    for iz in range(len(frame.x3))
                    for ix in range(len(frame.x1))]
            path = _emit(cfg, f"field_{name}_{i:02d}", "field-frame v1",
                         ["x1", "x3", "value"], rows)
            files[f"{name}_{i:02d}"] = path.name
    manifest = write_json(Path(cfg["outdir"]) / "fields_manifest.json",
                          "fields-manifest v1",
                          {"a": m.a, "Ra": m.Ra, "gamma": m.gamma,
                           "lambda": m.wavelength,
                           "times": list(cfg["times"]), "files": files},
                          _echo(cfg))
    print(f"{len(files)} frames -> {manifest}")
    return EXIT_OK


def cmd_phase(cfg) -> int:
    p = _params(cfg)
    b = solve_basic_state(p, M=cfg["M"])
    m = _resolve_mode(cfg, p, b)
    if m.gamma.imag == 0.0:
        raise InvalidParameterError(
            "phase portrait needs an oscillatory mode (Im gamma != 0)")
    period = 2.0 * np.pi / abs(m.gamma.imag)
    t = np.linspace(0.0, cfg["n_periods"] * period, cfg["n_t"])
    probe_x1 = cfg["probe_x1"] if cfg["probe_x1"] is not None else m.wavelength / 4.0
    ts = fields.time_series(m, t, probe=(probe_x1, cfg["probe_x3"]))
    path = _emit(cfg, "phase", "probe-series v1",
                 ["t", "T_perturb", "dT_perturb_dt"],
                 list(zip(ts.t, ts.Tp, ts.dTp)))
    print(f"period={fmt(period)} probe=({fmt(ts.probe[0])}, {fmt(ts.probe[1])})"
          f" -> {path}")
    return EXIT_OK


def cmd_repro(cfg) -> int:
    rows, all_pass = repro.run_all(cfg["outdir"], n_steps=cfg["n_steps"],
                                   M=cfg["M"], workers=cfg["workers"])
    if not all_pass:
        _error_json("reference-fixture failures",
                    EXIT_FIXTURE,
                    failed=[r.cid for r in rows if not r.passed])
        return EXIT_FIXTURE
    return EXIT_OK


HANDLERS = {
    "taxis": cmd_taxis,
    "basic-state": cmd_basic_state,
    "dispersion": cmd_dispersion,
    "spectrum": cmd_spectrum,
    "neutral": cmd_neutral,
    "critical": cmd_critical,
    "sweep-rt": cmd_sweep_rt,
    "sweep-le": cmd_sweep_le,
    "fields": cmd_fields,
    "phase": cmd_phase,
    "repro": cmd_repro,
}


def _error_json(message: str, code: int, **extra):
    payload = {"error": {"message": message, "exit_code": code, **extra}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _setup_logging():
    name = os.environ.get("PHOTOTHERM_LOG", "warning").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = merge_config(args)
        return HANDLERS[args.command](cfg)
    except InvalidParameterError as e:
        _error_json(str(e), EXIT_CONFIG, type=type(e).__name__)
        return EXIT_CONFIG
    except (NoRootError, ConvergenceError) as e:
        _error_json(str(e), EXIT_SOLVER, type=type(e).__name__)
        return EXIT_SOLVER
    except PhototermError as e:
        _error_json(str(e), EXIT_SOLVER, type=type(e).__name__)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
