"""Command-line interface: ``gevfit {fit,simulate,dqm,support,info}``.

Exit codes: 0 ok, 1 input error, 2 degenerate or undefined, 3 infeasible box.
Every subcommand accepts ``--config FILE`` (a JSON object keyed by option
name); options given explicitly on the command line take precedence.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, jsonio
from .dqm_verify import COORDINATE_DIRECTIONS, dqm_certify
from .errors import (
    DegenerateSampleError,
    GevError,
    InfeasibleBoxError,
    InformationUndefinedError,
    InvalidParameterError,
)
from .fisher import fisher_information
from .gev_core import Sample, Theta
from .mc_harness import SimConfig, run_simulation
from .mle import FitOptions, ParamBox, fit
from .support_geometry import common_support, mass_outside

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_UNDEFINED = 2
EXIT_INFEASIBLE = 3

BUNDLED_PREFIX = "bundled:"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # unknown flags and bad values are input errors
        raise CliError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- input files

def read_values(path: str) -> Sample:
    """Read one numeric column; ``#`` comments, blank lines and a header row are allowed."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc
    values = []
    seen_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cell = line.split(",")
        if len(cell) != 1 and not (len(cell) == 2 and cell[1].strip() == ""):
            raise CliError(f"{path}: row {lineno}: expected one column, got {len(cell)}")
        cell = cell[0].strip()
        try:
            v = float(cell)
        except ValueError:
            if not seen_data and not values:
                seen_data = True  # header row
                continue
            raise CliError(f"{path}: row {lineno}: not a number: {cell!r}") from None
        if not math.isfinite(v):
            raise CliError(f"{path}: row {lineno}: non-finite value {cell!r}")
        seen_data = True
        values.append(v)
    if not values:
        raise CliError(f"{path}: no numeric rows")
    return Sample(np.array(values), {"path": str(p)})


def bundled_config_names() -> list[str]:
    root = resources.files("gevfit") / "configs"
    return sorted(f.name[:-5] for f in root.iterdir() if f.name.endswith(".json"))


def load_json(path: str) -> dict:
    if path.startswith(BUNDLED_PREFIX):
        name = path[len(BUNDLED_PREFIX):]
        f = resources.files("gevfit") / "configs" / f"{name}.json"
        if not f.is_file():
            raise CliError(f"unknown bundled config {name!r}; available: {bundled_config_names()}")
        text = f.read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise CliError(f"{path}: expected a JSON object")
    return obj


# -------------------------------------------------------------------- options

def _merge(args: argparse.Namespace, defaults: dict, explicit: set[str]) -> dict:
    """Defaults, then ``--config`` values, then explicitly given flags."""
    merged = dict(defaults)
    if getattr(args, "config", None):
        cfg = load_json(args.config)
        for k, v in cfg.items():
            key = k.replace("-", "_")
            if key not in defaults:
                raise CliError(f"{args.config}: unknown option {k!r}")
            merged[key] = v
    for key in defaults:
        if key in explicit:
            merged[key] = getattr(args, key)
    return merged


def _explicit(parser: argparse.ArgumentParser, argv: list[str]) -> set[str]:
    # re-parse with every default suppressed to learn which flags were typed
    probe = _Parser(add_help=False)
    for action in parser._actions:
        if action.option_strings and action.dest != "help":
            probe.add_argument(*action.option_strings, dest=action.dest,
                               nargs=action.nargs, default=argparse.SUPPRESS)
    ns, _ = probe.parse_known_args(argv)
    return set(vars(ns))


def _theta(opts: dict) -> Theta:
    try:
        return Theta(float(opts["gamma"]), float(opts["mu"]), float(opts["sigma"]))
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid parameter: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- subcommands

FIT_DEFAULTS = {
    "out": None, "gamma_range": None, "mu_range": None, "sigma_range": None, "starts": 5,
}


def cmd_fit(args, explicit) -> int:
    opts = _merge(args, FIT_DEFAULTS, explicit)
    x = read_values(args.input)
    box = None
    ranges = [opts["gamma_range"], opts["mu_range"], opts["sigma_range"]]
    if any(r is not None for r in ranges):
        if not all(r is not None for r in ranges):
            raise CliError("give all of --gamma-range, --mu-range and --sigma-range, or none")
        try:
            box = ParamBox(*(tuple(float(v) for v in r) for r in ranges))
        except (InvalidParameterError, TypeError, ValueError) as exc:
            raise CliError(f"invalid box: {exc}") from exc
    try:
        res = fit(x, box, FitOptions(n_starts=int(opts["starts"])))
    except DegenerateSampleError as exc:
        raise CliError(f"degenerate sample: {exc}", EXIT_UNDEFINED) from exc
    except InfeasibleBoxError as exc:
        raise CliError(f"infeasible box: {exc}", EXIT_INFEASIBLE) from exc
    t = res.theta_hat
    report = {
        "theta_hat": [t.gamma, t.mu, t.sigma],
        "loglik": res.loglik * res.n,
        "stderr": [None if not math.isfinite(v) else float(v) for v in res.stderr],
        "converged": res.converged,
        "warnings": list(res.warnings),
        "n": res.n,
        "grad_norm": res.grad_norm,
        "iterations": res.iterations,
        "boundary_hit": list(res.boundary_hit),
        "box": res.box.to_dict(),
    }
    _emit(jsonio.dumps(report), opts["out"])
    return EXIT_OK if res.converged else EXIT_UNDEFINED


SIM_DEFAULTS = {"out_json": None, "out_csv": None, "threads": None, "seed": None, "replicates": None}


def cmd_simulate(args, explicit) -> int:
    opts = _merge(args, SIM_DEFAULTS, explicit)
    raw = load_json(args.sim_config)
    if opts["seed"] is not None:
        raw["seed"] = int(opts["seed"])
    if opts["replicates"] is not None:
        raw["replicates"] = int(opts["replicates"])
    try:
        config = SimConfig.from_dict(raw)
    except InvalidParameterError as exc:
        raise CliError(f"invalid config: {exc}") from exc
    report = run_simulation(config, threads=opts["threads"])
    text = report.to_json()
    if opts["out_json"]:
        Path(opts["out_json"]).write_text(text)
    else:
        sys.stdout.write(text)
    if opts["out_csv"]:
        Path(opts["out_csv"]).write_text(report.to_csv())
    return EXIT_OK if report.valid else EXIT_UNDEFINED


THETA_DEFAULTS = {"gamma": None, "mu": 0.0, "sigma": 1.0, "out": None}


def _need_gamma(opts):
    if opts["gamma"] is None:
        raise CliError("--gamma is required")


def cmd_dqm(args, explicit) -> int:
    opts = _merge(args, {**THETA_DEFAULTS, "k_min": 4, "k_max": 14, "direction": None}, explicit)
    _need_gamma(opts)
    theta0 = _theta(opts)
    dirs = COORDINATE_DIRECTIONS if opts["direction"] is None else [tuple(float(v) for v in opts["direction"])]
    try:
        rep = dqm_certify(theta0, dirs, (int(opts["k_min"]), int(opts["k_max"])))
    except InvalidParameterError as exc:
        raise CliError(str(exc)) from exc
    _emit(jsonio.dumps(rep.to_dict()), opts["out"])
    return EXIT_OK


def cmd_support(args, explicit) -> int:
    opts = _merge(args, {**THETA_DEFAULTS, "eps": None, "k_min": 3, "k_max": 12}, explicit)
    _need_gamma(opts)
    theta0 = _theta(opts)
    report: dict = {"theta0": [theta0.gamma, theta0.mu, theta0.sigma]}
    try:
        if opts["eps"] is not None:
            cs = common_support(theta0, float(opts["eps"]))
            report["eps"] = float(opts["eps"])
            report["lower"] = cs.lower
            report["upper"] = cs.upper
            report["mass_outside"] = mass_outside(theta0, float(opts["eps"]))
        table = []
        for k in range(int(opts["k_min"]), int(opts["k_max"]) + 1):
            eps = 2.0 ** -k
            m = mass_outside(theta0, eps)
            table.append({"k": k, "eps": eps, "mass_outside": m, "ratio": m / eps**2})
        report["table"] = table
    except InvalidParameterError as exc:
        raise CliError(str(exc)) from exc
    # the JSON encoder writes infinite endpoints as null
    _emit(jsonio.dumps(report), opts["out"])
    return EXIT_OK


def cmd_info(args, explicit) -> int:
    opts = _merge(args, THETA_DEFAULTS, explicit)
    _need_gamma(opts)
    theta = _theta(opts)
    try:
        fm = fisher_information(theta)
    except InformationUndefinedError as exc:
        raise CliError(f"information undefined: {exc}", EXIT_UNDEFINED) from exc
    report = {
        "theta": [theta.gamma, theta.mu, theta.sigma],
        "fisher": fm.entries.tolist(),
        "inverse": fm.inverse().tolist(),
        "quadrature_error": fm.quadrature_error,
        "near_singular": fm.near_singular,
    }
    _emit(jsonio.dumps(report), opts["out"])
    return EXIT_OK


# --------------------------------------------------------------------- parser

def build_parser() -> _Parser:
    p = _Parser(prog="gevfit", description="GEV maximum likelihood and regularity checks")
    p.add_argument("--version", action="version", version=f"gevfit {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def theta_flags(sp):
        sp.add_argument("--gamma", type=float, default=None)
        sp.add_argument("--mu", type=float, default=0.0)
        sp.add_argument("--sigma", type=float, default=1.0)
        sp.add_argument("--out", default=None, help="write JSON here instead of stdout")
        sp.add_argument("--config", default=None, help="JSON file of option values")

    sp = sub.add_parser("fit", help="fit a GEV to a column of numbers")
    sp.add_argument("input")
    sp.add_argument("--out", default=None)
    sp.add_argument("--config", default=None)
    sp.add_argument("--gamma-range", nargs=2, type=float, default=None)
    sp.add_argument("--mu-range", nargs=2, type=float, default=None)
    sp.add_argument("--sigma-range", nargs=2, type=float, default=None)
    sp.add_argument("--starts", type=int, default=5)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("simulate", help="Monte Carlo study from a JSON config")
    sp.add_argument("sim_config", metavar="CONFIG", help=f"path or {BUNDLED_PREFIX}NAME")
    sp.add_argument("--out-json", default=None)
    sp.add_argument("--out-csv", default=None)
    sp.add_argument("--threads", type=int, default=None, help="default: GEVFIT_THREADS or 1")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--replicates", type=int, default=None)
    sp.add_argument("--config", default=None)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("dqm", help="remainder-rate report for quadratic-mean differentiability")
    theta_flags(sp)
    sp.add_argument("--k-min", type=int, default=4)
    sp.add_argument("--k-max", type=int, default=14)
    sp.add_argument("--direction", nargs=3, type=float, default=None)
    sp.set_defaults(func=cmd_dqm)

    sp = sub.add_parser("support", help="common support over a max-norm ball and its tail mass")
    theta_flags(sp)
    sp.add_argument("--eps", type=float, default=None)
    sp.add_argument("--k-min", type=int, default=3)
    sp.add_argument("--k-max", type=int, default=12)
    sp.set_defaults(func=cmd_support)

    sp = sub.add_parser("info", help="Fisher information matrix and its inverse")
    theta_flags(sp)
    sp.set_defaults(func=cmd_info)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        explicit = _explicit(subparser, argv[1:])
        return args.func(args, explicit)
    except CliError as exc:
        print(f"gevfit: error: {exc}", file=sys.stderr)
        return exc.code
    except GevError as exc:
        print(f"gevfit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
