"""Command-line front end.

    resflow spectrum --domain interval:pi --N 4
    resflow check --condition LL --f arctan:beta=1 --k 1
    resflow drift-demo --k 1 --T 10

Every subcommand accepts ``--config FILE`` (key=value lines, same keys as the
long options) and ``--out FILE`` for the JSON artifact. Exit codes: 0 success
or holds, 1 fails or negative, 2 inconclusive, 3 operational error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .conditions import (ConditionReport, check_geometric, check_landesman_lazer,
                         check_strong_resonance)
from .conley import orbit_verdict
from .nemytskii import build_grid, parse_nonlinearity, verify_bound
from .orbits import Scenario, drift_demo, search_connections
from .semiflow import WaveState, heat_flow, wave_flow
from .spectral_core import ModalField, build_eigensystem, decompose, parse_domain

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_ERROR = 0, 1, 2, 3
SCHEMA_VERSION = "v1"
# command -> schema file (under schemas/<version>/) describing its "result"
RESULT_SCHEMAS = {"spectrum": "spectrum", "decompose": "decomposition", "check": "check",
                  "simulate": "trajectory_summary", "drift-demo": "drift_report",
                  "verdict": "conley_verdict", "orbit-search": "connection_report"}

# key -> (type, default); shared by flags and config files
OPTIONS = {
    "domain": (str, "interval:pi"),
    "N": (int, 32),
    "panels": (int, None),
    "f": (str, "arctan:beta=1"),
    "k": (int, 1),
    "lam": (float, None),
    "nu": (float, None),
    "model": (str, "heat"),
    "c": (float, 1.0),
    "dt": (float, 1e-2),
    "T": (float, 10.0),
    "scheme": (str, "ETDRK2"),
    "alpha": (float, 0.9),
    "B1": (float, 1.0),
    "B2": (float, 1.0),
    "samples": (int, 2000),
    "sphere_samples": (int, 64),
    "seed": (int, 0),
    "condition": (str, "LL"),
    "u0": (str, "1"),
    "v0": (str, "0"),
    "source_mode": (int, None),
    "eps": (float, 1e-4),
    "tol": (float, 1e-6),
    "bisect": (int, 1),
    "input": (str, None),
    "out": (str, None),
    "csv": (str, None),
}

COMMANDS = {
    "spectrum": ["domain", "N"],
    "decompose": ["domain", "N", "k"],
    "check": ["domain", "N", "panels", "f", "k", "condition", "alpha", "B1", "B2", "samples",
              "sphere_samples", "seed"],
    "simulate": ["domain", "N", "panels", "f", "k", "lam", "model", "c", "dt", "T", "scheme",
                 "alpha", "u0", "v0", "csv"],
    "drift-demo": ["domain", "N", "k", "lam", "model", "c", "dt", "T", "source_mode"],
    "verdict": ["domain", "N", "k", "nu", "f", "model", "input"],
    "orbit-search": ["domain", "N", "f", "k", "lam", "model", "c", "dt", "T", "alpha", "B1", "B2",
                     "samples", "sphere_samples", "seed", "eps", "tol", "bisect"],
}


class ConfigError(ValueError):
    pass


def read_config(path: str, allowed) -> dict:
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, eq, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not eq:
                raise ConfigError(f"{path}:{n}: expected key=value")
            if key not in allowed:
                raise ConfigError(f"{path}:{n}: unknown key {key!r}")
            out[key] = value.strip()
    return out


def resolve(command: str, args: argparse.Namespace) -> dict:
    """Defaults, overridden by the config file, overridden by flags."""
    keys = COMMANDS[command] + ["out"]
    cfg = {k: OPTIONS[k][1] for k in keys}
    if args.config:
        for k, v in read_config(args.config, keys).items():
            cfg[k] = _convert(k, v)
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def _convert(key, value):
    typ = OPTIONS[key][0]
    if typ is str:
        return value
    try:
        return typ(float(value)) if typ is int else typ(value)
    except ValueError as exc:
        raise ConfigError(f"bad value {value!r} for {key}") from exc


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj)}")


def _clean(obj):
    """Replace non-finite floats so the output stays strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def emit(command: str, cfg: dict, result: dict, out) -> str:
    doc = {"tool": {"name": "resflow", "version": __version__}, "command": command,
           "schema": f"{SCHEMA_VERSION}/{RESULT_SCHEMAS[command]}", "config": cfg,
           "result": result}
    text = json.dumps(_clean(json.loads(json.dumps(doc, default=_jsonable))), sort_keys=True,
                      indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    return text


def _setup(cfg, need_grid=True):
    domain = parse_domain(cfg["domain"])
    eig = build_eigensystem(domain, cfg["N"])
    grid = build_grid(domain, eig, cfg.get("panels")) if need_grid else None
    return domain, eig, grid


def _coeff_list(text: str, N: int) -> np.ndarray:
    vals = [float(v) for v in text.split(",") if v.strip()]
    if len(vals) > N:
        raise ConfigError(f"{len(vals)} coefficients given for N={N}")
    return np.array(vals + [0.0] * (N - len(vals)))


def cmd_spectrum(cfg):
    _, eig, _ = _setup(cfg, need_grid=False)
    res = eig.to_dict()
    lines = [f"{d['index']:>3}  lambda = {d['eigenvalue']:.12g}  multiplicity {d['multiplicity']}"
             for d in res["distinct"]]
    return res, "\n".join(lines), EXIT_OK


def cmd_decompose(cfg):
    _, eig, _ = _setup(cfg, need_grid=False)
    dec = decompose(eig, cfg["k"])
    res = dec.to_dict()
    text = (f"lambda_{dec.k} = {dec.lam:.12g}: dim X_- = {dec.dim_minus}, "
            f"dim X_0 = {dec.dim_kernel}, d_k = {dec.d_k}")
    return res, text, EXIT_OK


def _verdict_code(verdicts):
    if any(v == "holds" for v in verdicts):
        return EXIT_OK
    if any(v == "inconclusive" for v in verdicts):
        return EXIT_INCONCLUSIVE
    return EXIT_FAIL


def cmd_check(cfg):
    domain, eig, grid = _setup(cfg)
    f = parse_nonlinearity(cfg["f"], eig)
    cond = cfg["condition"]
    reports = []
    if cond == "LL":
        reports = list(check_landesman_lazer(f, decompose(eig, cfg["k"]), grid,
                                             cfg["sphere_samples"], cfg["seed"]))
    elif cond == "SR":
        reports = [check_strong_resonance(f, grid)]
    elif cond in ("G", "G1", "G2"):
        which = ("G1", "G2") if cond == "G" else (cond,)
        dec = decompose(eig, cfg["k"])
        reports = [check_geometric(f, dec, grid, w, cfg["B1"], cfg["B2"], samples=cfg["samples"],
                                   seed=cfg["seed"], alpha=cfg["alpha"]) for w in which]
    elif cond == "bound":
        rep = verify_bound(f, grid)
        code = {"pass": EXIT_OK, "fail": EXIT_FAIL}.get(rep.verdict, EXIT_INCONCLUSIVE)
        return rep.to_dict(), f"bound: {rep.verdict}, observed max {rep.observed_max:.6g}", code
    else:
        raise ConfigError(f"unknown condition {cond!r}; use LL, SR, G, G1, G2 or bound")
    lines = [f"{r.condition}: {r.verdict}{' (sampled)' if r.condition.startswith('G') and r.holds else ''}"
             f", margin {r.margin:.6g}" for r in reports]
    return {"reports": [r.to_dict() for r in reports]}, "\n".join(lines), \
        _verdict_code([r.verdict for r in reports])


def cmd_simulate(cfg):
    domain, eig, grid = _setup(cfg)
    f = parse_nonlinearity(cfg["f"], eig)
    lam = cfg["lam"] if cfg["lam"] is not None else eig.eigenvalue(cfg["k"])
    u0 = ModalField(eig, _coeff_list(cfg["u0"], eig.N))
    if cfg["model"] == "heat":
        tr = heat_flow(eig, f, grid, lam, u0, cfg["dt"], cfg["T"], cfg["scheme"], cfg["alpha"])
    elif cfg["model"] == "wave":
        v0 = ModalField(eig, _coeff_list(cfg["v0"], eig.N))
        tr = wave_flow(eig, f, grid, lam, cfg["c"], WaveState(u0, v0), cfg["dt"], cfg["T"],
                       cfg["scheme"], cfg["alpha"])
    else:
        raise ConfigError("model must be heat or wave")
    if cfg["csv"]:
        tr.write_csv(cfg["csv"])
    s = tr.summary()
    text = (f"{tr.model} flow to t = {s['t_final']:g}: status {tr.status}, "
            f"|u|_H = {s['final_norm_H']:.6g}, |Pu|_H = {s['final_norm_kernel']:.6g}")
    return s, text, EXIT_OK if tr.status == "ok" else EXIT_FAIL


DRIFT_TOL = 1e-10


def cmd_drift(cfg):
    _, eig, _ = _setup(cfg, need_grid=False)
    rep = drift_demo(eig, cfg["k"], cfg["model"], cfg["T"], cfg["dt"], cfg["lam"],
                     cfg["source_mode"], cfg["c"])
    ok = rep["max_relative_deviation"] <= DRIFT_TOL * max(1.0, cfg["T"])
    if rep["model"] == "heat" and rep["resonant"]:
        ok = rep["max_deviation"] <= DRIFT_TOL
    text = (f"{rep['model']} drift, forcing phi_{rep['source_mode']} at lambda = {rep['lambda']:g}: "
            f"max deviation from closed form {rep['max_deviation']:.3e}")
    return rep, text, EXIT_OK if ok else EXIT_FAIL


def cmd_verdict(cfg):
    _, eig, _ = _setup(cfg, need_grid=False)
    if not cfg["input"]:
        raise ConfigError("verdict needs --input with a JSON condition report chain")
    with open(cfg["input"]) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "result" in data:
        data = data["result"].get("reports", data["result"])
    if isinstance(data, dict):
        data = data.get("reports", [data])
    reports = [ConditionReport.from_dict(d) for d in data]
    nu = cfg["nu"]
    if nu is None:
        nu = parse_nonlinearity(cfg["f"], eig).nu
    v = orbit_verdict(eig, cfg["k"], nu, reports, cfg["model"])
    text = "\n".join([f"conclusion: {v.conclusion} (case {v.case}); "
                      f"exponents K = {v.exponent_K}, 0 = {v.exponent_zero}"] +
                     [f"  - {line}" for line in v.narrative])
    return v.to_dict(), text, EXIT_OK if v.conclusion == "orbit-exists" else EXIT_FAIL


def cmd_orbit_search(cfg):
    sc = Scenario(domain=cfg["domain"], N=cfg["N"], f=cfg["f"], k=cfg["k"], model=cfg["model"],
                  c=cfg["c"], dt=cfg["dt"], T=cfg["T"], alpha=cfg["alpha"], B1_radius=cfg["B1"],
                  B2_radius=cfg["B2"], samples=cfg["samples"], sphere_samples=cfg["sphere_samples"],
                  seed=cfg["seed"], eps=cfg["eps"], tol=cfg["tol"], bisect=bool(cfg["bisect"]),
                  lam=cfg["lam"])
    rep = search_connections(sc)
    counts = {}
    for s in rep.shots:
        counts[s.classification] = counts.get(s.classification, 0) + 1
    v = rep.verdict
    head = f"verdict: {v['conclusion']} (case {v['case']})" if v else "verdict: not available"
    text = "\n".join([head, f"equilibria: {len(rep.equilibria)}", f"shots: {counts}"] +
                     [f"  note: {n}" for n in rep.notes])
    code = EXIT_INCONCLUSIVE if v is None else (EXIT_OK if v["conclusion"] == "orbit-exists"
                                                 else EXIT_FAIL)
    return rep.to_dict(), text, code


HANDLERS = {"spectrum": cmd_spectrum, "decompose": cmd_decompose, "check": cmd_check,
            "simulate": cmd_simulate, "drift-demo": cmd_drift, "verdict": cmd_verdict,
            "orbit-search": cmd_orbit_search}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="resflow", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"resflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, keys in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value file; flags take precedence")
        for key in keys + ["out"]:
            typ, _ = OPTIONS[key]
            flag = "--" + key.replace("_", "-")
            p.add_argument(flag, dest=key, type=typ, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args.command, args)
        result, text, code = HANDLERS[args.command](cfg)
        emit(args.command, cfg, result, cfg.get("out"))
    except (ValueError, KeyError, IndexError, OSError) as exc:
        print(f"resflow {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
