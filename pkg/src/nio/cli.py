"""Command line front end: ``nio {tilde,ulam-sweep,mc-sweep,nio,certify}``.

Settings come from built-in defaults, then an optional flat ``key = value``
config file (``#`` comments), then command line flags. ``NIO_SEED`` overrides
the seed and ``NIO_THREADS`` caps the worker count.

Exit codes: 0 success or certificate found, 1 no certificate, 2 usage or
configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import BoundaryCondition, MapSpec
from .lyapunov import (detect_nio, find_alpha_tilde, lyapunov_curve, sign_changes,
                       tilde_lambda)
from .montecarlo import AllOrbitsRejected, McConfig, finite_time_lyapunov, heatmap_sweep
from .noise import NoiseKernel, mother_from_name
from .spectral import NonConvergence, coarse_fine_certificate, coupling_time
from .ulam import Partition, annealed_matrix, deterministic_matrix, dump_matrix, load_matrix

EXIT_OK, EXIT_NONE, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

SWEEP_HEADER = ["xi", "lambda", "residual", "variation", "coupling_k", "cf_bound"]
MC_HEADER = ["alpha", "xi", "mean", "stderr", "rejected"]


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _float_list(text: str) -> list[float]:
    return [float(t) for t in str(text).replace(";", ",").split(",") if t.strip()]


@dataclass
class RunConfig:
    alpha: float = 5.0
    beta: float = 1.0
    mother: str = "uniform"
    boundary: str = "periodic"
    n: int = 1024
    xi: float | None = None
    xi_min: float = 0.01
    xi_max: float = 2.5
    xi_count: int = 40
    xi_list: list[float] | None = None
    alpha_list: list[float] | None = None
    tol: float = 1e-10
    max_iter: int = 100_000
    k_max: int = 64
    margin: float | None = None
    cf_i: int | None = None
    orbits: int = 200
    length: int = 10_000
    seed: int = 0
    burn_in: int = 0
    threads: int = 1
    csv: str | None = None
    json: str | None = None
    cache_dir: str | None = None

    def validate(self) -> "RunConfig":
        try:
            MapSpec(self.alpha, self.beta)
        except ValueError as exc:
            raise ConfigError("alpha" if "alpha" in str(exc) else "beta", str(exc)) from None
        for a in self.alpha_list or []:
            try:
                MapSpec(a, self.beta)
            except ValueError as exc:
                raise ConfigError("alpha_list", str(exc)) from None
        try:
            mother_from_name(self.mother)
        except ValueError as exc:
            raise ConfigError("mother", str(exc)) from None
        try:
            BoundaryCondition.parse(self.boundary)
        except ValueError as exc:
            raise ConfigError("boundary", str(exc)) from None
        try:
            Partition(self.n)
        except ValueError as exc:
            raise ConfigError("n", str(exc)) from None
        if self.xi is not None and not self.xi > 0:
            raise ConfigError("xi", "noise amplitude must be > 0")
        if not 0 < self.xi_min <= self.xi_max:
            raise ConfigError("xi_min", "need 0 < xi_min <= xi_max")
        if self.xi_count < 1:
            raise ConfigError("xi_count", "must be >= 1")
        if self.xi_list is not None:
            xs = self.xi_list
            if not xs or any(x <= 0 for x in xs) or any(b <= a for a, b in zip(xs, xs[1:])):
                raise ConfigError("xi_list", "must be positive and strictly increasing")
        if not self.tol > 0:
            raise ConfigError("tol", "must be > 0")
        for name in ("max_iter", "k_max", "threads"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "must be >= 1")
        if self.margin is not None and self.margin < 0:
            raise ConfigError("margin", "must be >= 0 (omit for the automatic margin)")
        if self.cf_i is not None and self.cf_i < 1:
            raise ConfigError("cf_i", "must be >= 1")
        try:
            McConfig(self.orbits, self.length, self.seed, self.burn_in)
        except ValueError as exc:
            raise ConfigError(str(exc).split()[0], str(exc)) from None
        return self

    def xi_grid(self) -> list[float]:
        if self.xi_list is not None:
            return list(self.xi_list)
        if self.xi is not None:
            return [self.xi]
        if self.xi_count == 1:
            return [self.xi_min]
        return [float(x) for x in np.geomspace(self.xi_min, self.xi_max, self.xi_count)]

    def tmap(self, alpha: float | None = None) -> MapSpec:
        return MapSpec(self.alpha if alpha is None else alpha, self.beta)

    def mc(self) -> McConfig:
        return McConfig(self.orbits, self.length, self.seed, self.burn_in)


def _convert(field: dataclasses.Field, raw: str):
    name = field.name
    text = str(raw).strip()
    try:
        if name in ("xi_list", "alpha_list"):
            return _float_list(text)
        if text.lower() in ("", "none", "auto") and field.default is None:
            return None
        if name in ("n", "xi_count", "max_iter", "k_max", "cf_i", "orbits", "length", "seed",
                    "burn_in", "threads"):
            return int(text, 0)
        if name in ("alpha", "beta", "xi", "xi_min", "xi_max", "tol", "margin"):
            return float(text)
    except ValueError:
        raise ConfigError(name, f"cannot parse {text!r}") from None
    return text


_FIELDS = {f.name: f for f in fields(RunConfig)}


def read_config_file(path) -> dict:
    text = Path(path).read_text()
    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#",),
                                       inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string("[run]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError("config", f"malformed config file: {exc}") from None
    if parser.sections() != ["run"]:
        raise ConfigError("config", "malformed config file: sections are not allowed")
    out = {}
    for key, raw in parser.items("run"):
        name = key.replace("-", "_")
        if name not in _FIELDS:
            raise ConfigError(name, "unknown configuration key")
        out[name] = _convert(_FIELDS[name], raw)
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        try:
            values.update(read_config_file(args.config))
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
    for name, field in _FIELDS.items():
        raw = getattr(args, name, None)
        if raw is not None:
            values[name] = _convert(field, raw)
    if os.environ.get("NIO_SEED"):
        values["seed"] = _convert(_FIELDS["seed"], os.environ["NIO_SEED"])
    cfg = RunConfig(**values)
    if os.environ.get("NIO_THREADS"):
        cap = _convert(_FIELDS["threads"], os.environ["NIO_THREADS"])
        if cap < 1:
            raise ConfigError("NIO_THREADS", "must be >= 1")
        cfg.threads = min(cfg.threads, cap)
    return cfg.validate()


def _clean(obj):
    """JSON-safe copy: NaN and infinities become null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def _write_csv(path: str | None, header: list[str], rows, stdout) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    if path in (None, "-"):
        stdout.write(buf.getvalue())
    else:
        with open(path, "w", newline="", encoding="ascii") as fh:
            fh.write(buf.getvalue())


def _write_json(path: str | None, report: dict, stdout) -> None:
    text = json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"
    if path in (None, "-"):
        stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _deterministic_factor(cfg: RunConfig, partition: Partition, alpha: float | None = None):
    tmap = cfg.tmap(alpha)
    if not cfg.cache_dir:
        return deterministic_matrix(tmap, partition)
    key = hashlib.sha256(f"{tmap.alpha!r}|{tmap.beta!r}|{partition.n}".encode()).hexdigest()[:24]
    path = Path(cfg.cache_dir) / f"det-{key}.ulam"
    if path.exists():
        return load_matrix(path)
    det = deterministic_matrix(tmap, partition)
    path.parent.mkdir(parents=True, exist_ok=True)
    dump_matrix(path, det)
    return det


def _config_dict(cfg: RunConfig) -> dict:
    return dataclasses.asdict(cfg)


def _run_curve(cfg: RunConfig, estimate_error: bool):
    partition = Partition(cfg.n)
    det = _deterministic_factor(cfg, partition)
    return lyapunov_curve(cfg.tmap(), mother_from_name(cfg.mother), cfg.boundary, cfg.n,
                          cfg.xi_grid(), tol=cfg.tol, max_iter=cfg.max_iter, k_max=cfg.k_max,
                          estimate_error=estimate_error, workers=cfg.threads, det=det)


def _sample_dict(s) -> dict:
    return {"xi": s.xi, "lambda": s.lam, "residual": s.residual, "variation": s.variation,
            "coupling_k": s.coupling_k, "cf_bound": s.cf_bound, "error": s.error,
            "failure": s.failure}


def cmd_tilde(args, stdout) -> int:
    beta = 1.0 if args.beta is None else args.beta
    try:
        if args.alpha:
            rows = [(a, tilde_lambda(a, beta)) for a in args.alpha]
            enclosure = None
        else:
            grid = np.linspace(args.alpha_min, args.alpha_max, args.count)
            rows = [(float(a), tilde_lambda(float(a), beta)) for a in grid]
            enclosure = find_alpha_tilde(args.alpha_min, args.alpha_max, args.tol)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for a, lam in rows:
        stdout.write(f"alpha={a!r} beta={beta!r} tilde_lambda={lam!r}\n")
    if enclosure is not None:
        stdout.write(f"alpha_tilde in [{enclosure[0]!r}, {enclosure[1]!r}]\n")
    if args.json:
        report = {"command": "tilde", "version": __version__, "beta": beta,
                  "values": [{"alpha": a, "tilde_lambda": lam} for a, lam in rows],
                  "enclosure": list(enclosure) if enclosure else None}
        _write_json(args.json, report, stdout)
    return EXIT_OK


def cmd_ulam_sweep(cfg: RunConfig, stdout) -> int:
    curve = _run_curve(cfg, estimate_error=cfg.margin is None)
    _write_csv(cfg.csv, SWEEP_HEADER,
               [(s.xi, s.lam, s.residual, s.variation, s.coupling_k, s.cf_bound)
                for s in curve.samples], stdout)
    cert = detect_nio(curve, cfg.margin)
    report = {"command": "ulam-sweep", "version": __version__, "config": _config_dict(cfg),
              "samples": [_sample_dict(s) for s in curve.samples],
              "sign_changes": [list(p) for p in sign_changes(curve)],
              "certificate": cert.as_dict() if cert else None}
    if cfg.json:
        _write_json(cfg.json, report, stdout)
    return EXIT_OK


def cmd_mc_sweep(cfg: RunConfig, stdout) -> int:
    alphas = cfg.alpha_list or [cfg.alpha]
    xis = cfg.xi_grid()
    grid = heatmap_sweep(alphas, xis, cfg.beta, cfg.boundary, cfg.mc(),
                         mother=mother_from_name(cfg.mother), threads=cfg.threads)
    rows, failures = [], []
    for a, row in zip(alphas, grid):
        for xi, est in zip(xis, row):
            if isinstance(est, str):
                rows.append((a, xi, math.nan, math.nan, None))
                failures.append({"alpha": a, "xi": xi, "failure": est})
            else:
                rows.append((a, xi, est.mean, est.stderr, est.rejected))
    _write_csv(cfg.csv, MC_HEADER, rows, stdout)
    if cfg.json:
        report = {"command": "mc-sweep", "version": __version__, "config": _config_dict(cfg),
                  "failures": failures}
        _write_json(cfg.json, report, stdout)
    return EXIT_OK


def _mc_check(cfg: RunConfig, xi: float, lam: float) -> dict:
    est = finite_time_lyapunov(cfg.tmap(), NoiseKernel(mother_from_name(cfg.mother), xi),
                               cfg.boundary, cfg.mc(), threads=cfg.threads)
    three_sigma = 3.0 * est.stderr
    agrees = np.sign(est.mean) == np.sign(lam) and abs(est.mean - lam) <= three_sigma
    # sign of the MC mean alone excludes zero at 3 sigma
    resolved = est.mean - three_sigma > 0.0 if lam > 0.0 else est.mean + three_sigma < 0.0
    return {"xi": xi, "operator_lambda": lam, "mc_mean": est.mean, "mc_stderr": est.stderr,
            "mc_rejected": est.rejected, "sign_agrees": bool(agrees),
            "sign_resolved": bool(resolved), "difference": est.mean - lam}


def cmd_nio(cfg: RunConfig, stdout) -> int:
    curve = _run_curve(cfg, estimate_error=cfg.margin is None)
    cert = detect_nio(curve, cfg.margin)
    report = {"command": "nio", "version": __version__, "config": _config_dict(cfg),
              "samples": [_sample_dict(s) for s in curve.samples],
              "sign_changes": [list(p) for p in sign_changes(curve)],
              "certificate": None, "monte_carlo": None}
    if cert is not None:
        report["certificate"] = cert.as_dict()
        report["monte_carlo"] = {"pos": _mc_check(cfg, cert.xi_pos, cert.lambda_pos),
                                 "neg": _mc_check(cfg, cert.xi_neg, cert.lambda_neg)}
    _write_json(cfg.json, report, stdout)
    if cert is None:
        print("none", file=sys.stderr)
        return EXIT_NONE
    return EXIT_OK


def cmd_certify(cfg: RunConfig, stdout) -> int:
    xi = cfg.xi if cfg.xi is not None else cfg.xi_grid()[0]
    partition = Partition(cfg.n)
    kernel = NoiseKernel(mother_from_name(cfg.mother), xi)
    M = annealed_matrix(cfg.tmap(), kernel, cfg.boundary, partition,
                        det=_deterministic_factor(cfg, partition))
    k = coupling_time(M, cfg.k_max)
    i = cfg.cf_i if cfg.cf_i is not None else k
    report = {"command": "certify", "version": __version__, "config": _config_dict(cfg),
              "coupling_k": k, "certificate": None}
    if i is not None:
        cert = coarse_fine_certificate(cfg.tmap(), kernel, cfg.boundary, cfg.n, i, M=M)
        report["certificate"] = cert.as_dict()
    _write_json(cfg.json, report, stdout)
    if report["certificate"] is None or not report["certificate"]["valid"]:
        return EXIT_NONE
    return EXIT_OK


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value configuration file")
    for name, field in _FIELDS.items():
        flag = "--" + name.replace("_", "-")
        p.add_argument(flag, dest=name, default=None, metavar=name.upper(),
                       help=f"(default: {field.default!r})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nio", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tilde", help="exponent of the uniform density and its zero in alpha")
    t.add_argument("--alpha", type=float, nargs="+")
    t.add_argument("--beta", type=float)
    t.add_argument("--alpha-min", type=float, default=2.0)
    t.add_argument("--alpha-max", type=float, default=4.0)
    t.add_argument("--count", type=int, default=9)
    t.add_argument("--tol", type=float, default=1e-7)
    t.add_argument("--json", help="write a JSON report here ('-' for stdout)")

    for name, text in [("ulam-sweep", "lambda(xi) from Ulam stationary densities"),
                       ("mc-sweep", "Monte Carlo finite-time exponents over (alpha, xi)"),
                       ("nio", "search and certify a sign change of lambda(xi)"),
                       ("certify", "coarse-fine L1 contraction certificate")]:
        _add_run_options(sub.add_parser(name, help=text))
    return parser


COMMANDS = {"ulam-sweep": cmd_ulam_sweep, "mc-sweep": cmd_mc_sweep, "nio": cmd_nio,
            "certify": cmd_certify}


def main(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.command == "tilde":
        return cmd_tilde(args, stdout)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](cfg, stdout)
    except (NonConvergence, AllOrbitsRejected, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
