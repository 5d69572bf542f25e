"""Command-line interface.

Subcommands: ``test``, ``power``, ``power-grid``, ``expansion``, ``clt`` and
``asymptotic``.  Exit codes: 0 success, 2 usage or configuration error,
3 runtime pipeline error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
from typing import Optional

import numpy as np

from .ar_process import ARModelSpec, ScenarioSpec
from .asymptotics import asymptotic_power, noncentrality, robustness_bound, shift_vector
from .distributions import (
    DiscretePi,
    LogisticH,
    NormalH,
    NormalMixtureH,
    NormalPi,
    NormalScale,
    PointMassPi,
    UniformPi,
)
from .estimation import fit_ar
from .exceptions import SymPearsonError
from .mc_harness import ExperimentConfig, check_clt_nu, check_expansion, run_power
from .pearson_test import Partition, residual_test

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3

COMMANDS = ("test", "power", "power-grid", "expansion", "clt", "asymptotic")

POWER_COLUMNS = ["rho", "gamma", "n", "m", "alpha", "lambda2", "W_asymptotic", "W_empirical",
                 "ci_lo", "ci_hi", "bound_2_16", "N", "seed"]
ASYMPTOTIC_COLUMNS = ["rho", "gamma", "n", "m", "alpha", "lambda2", "W_asymptotic", "bound_2_16"]
EXPANSION_COLUMNS = ["x", "mean", "se", "lo", "hi", "predicted", "covered"]
CLT_COLUMNS = ["j", "k", "empirical", "limit", "se", "z"]
TEST_COLUMNS = ["n", "m", "theta_hat", "statistic", "dof", "threshold", "alpha", "pvalue",
                "reject", "nu", "boundaries"]

DEFAULTS = {
    "input": None,
    "p": 1,
    "n": 1000,
    "beta": [0.5],
    "nu": 0.0,
    "theta0": 1.0,
    "rho": [0.0],
    "gamma": [0.0],
    "h": "normal:3",
    "pi": "point:0",
    "m": 5,
    "alpha": 0.05,
    "reps": 1000,
    "seed": 0,
    "format": "csv",
    "out": None,
    "partition": "auto",
    "jobs": 1,
    "grid": [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0],
    "mean_method": "mean",
    "beta_method": "ls",
}


class UsageError(Exception):
    """Bad flags, config file or input file; maps to exit code 2."""


class PipelineError(Exception):
    """A computation failed; maps to exit code 3."""


# Parsing of small value languages.


def _floats(text, what):
    if isinstance(text, (list, tuple)):
        vals = text
    elif isinstance(text, (int, float)):
        vals = [text]
    else:
        vals = [t for t in str(text).split(",") if t.strip() != ""]
    try:
        return [float(v) for v in vals]
    except (TypeError, ValueError):
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def parse_h(text):
    """``normal:SIGMA``, ``mixture:W,S1,S2`` or ``logistic:S``."""
    kind, _, args = str(text).partition(":")
    vals = _floats(args, "--h")
    try:
        if kind == "normal" and len(vals) == 1:
            return NormalH(vals[0])
        if kind == "mixture" and len(vals) == 3:
            return NormalMixtureH(*vals)
        if kind == "logistic" and len(vals) == 1:
            return LogisticH(vals[0])
    except SymPearsonError as exc:
        raise UsageError(f"--h: {exc}") from None
    raise UsageError(f"--h: cannot parse {text!r}; use normal:S, mixture:W,S1,S2 or logistic:S")


def parse_pi(text):
    """``point:C``, ``normal:MEAN,SD``, ``uniform:A,B`` or ``discrete:V1:P1,V2:P2,...``."""
    kind, _, args = str(text).partition(":")
    try:
        if kind == "discrete":
            pairs = [item.split(":") for item in args.split(",") if item]
            if not pairs or any(len(pr) != 2 for pr in pairs):
                raise UsageError(f"--pi: discrete law must look like discrete:v1:p1,v2:p2, got {text!r}")
            values = _floats([pr[0] for pr in pairs], "--pi")
            probs = _floats([pr[1] for pr in pairs], "--pi")
            return DiscretePi(tuple(values), tuple(probs))
        vals = _floats(args, "--pi")
        if kind == "point" and len(vals) == 1:
            return PointMassPi(vals[0])
        if kind == "normal" and len(vals) == 2:
            return NormalPi(*vals)
        if kind == "uniform" and len(vals) == 2:
            return UniformPi(*vals)
    except SymPearsonError as exc:
        raise UsageError(f"--pi: {exc}") from None
    raise UsageError(f"--pi: cannot parse {text!r}; use point:C, normal:M,S, uniform:A,B or discrete:...")


def parse_partition(text, m):
    if text is None or text == "auto":
        return None
    if isinstance(text, (list, tuple)):
        bounds = _floats(text, "--partition")
    elif str(text).startswith("fixed:"):
        bounds = _floats(str(text)[len("fixed:"):], "--partition")
    else:
        raise UsageError(f"--partition: expected auto or fixed:x1,x2,..., got {text!r}")
    try:
        part = Partition(tuple(bounds))
    except SymPearsonError as exc:
        raise UsageError(f"--partition: {exc}") from None
    if part.m != m:
        raise UsageError(f"--partition gives {part.m} cells but --m is {m}")
    return part


def read_series(path):
    """One observation per line; blank lines and ``#`` comments are skipped."""
    values = []
    try:
        handle = sys.stdin if path == "-" else open(path)
    except OSError as exc:
        raise UsageError(f"cannot open {path}: {exc.strerror}") from None
    with handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise UsageError(f"{path}:{lineno}: not a number: {text!r}") from None
    if not np.all(np.isfinite(values)):
        raise UsageError(f"{path}: series contains non-finite values")
    return np.asarray(values)


# Configuration resolution.


def _load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot open config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path}: top level must be an object")
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise UsageError(f"config {path}: unknown keys {unknown}")
    return data


def resolve(args) -> dict:
    """Merge defaults, config file and explicit flags (flags win)."""
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(_load_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    out = dict(cfg)
    try:
        for key in ("p", "n", "m", "reps", "seed", "jobs"):
            if isinstance(out[key], bool) or int(out[key]) != float(out[key]):
                raise UsageError(f"{key} must be an integer, got {out[key]!r}")
            out[key] = int(out[key])
        for key in ("nu", "theta0", "alpha"):
            out[key] = float(out[key])
    except (TypeError, ValueError):
        raise UsageError(f"invalid numeric setting in {out!r}") from None
    out["beta"] = _floats(out["beta"], "--beta")
    out["rho"] = _floats(out["rho"], "--rho")
    out["gamma"] = _floats(out["gamma"], "--gamma")
    out["grid"] = _floats(out["grid"], "--grid")
    if out["m"] <= 2:
        raise UsageError("m must exceed 2")
    if not 0.0 < out["alpha"] < 1.0:
        raise UsageError("alpha must lie in (0, 1)")
    if out["reps"] < 1:
        raise UsageError("reps must be at least 1")
    if out["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {out['format']!r}")
    if out["mean_method"] not in ("mean", "median"):
        raise UsageError(f"mean_method must be mean or median, got {out['mean_method']!r}")
    if out["beta_method"] not in ("ls", "huber"):
        raise UsageError(f"beta_method must be ls or huber, got {out['beta_method']!r}")
    if any(r < 0 for r in out["rho"]) or any(g < 0 for g in out["gamma"]):
        raise UsageError("rho and gamma must be nonnegative")
    if isinstance(out["partition"], (list, tuple)):
        out["partition"] = "fixed:" + ",".join(repr(float(x)) for x in out["partition"])
    out["_h"] = parse_h(out["h"])
    out["_pi"] = parse_pi(out["pi"])
    out["_partition"] = parse_partition(out["partition"], out["m"])
    try:
        out["_model"] = ARModelSpec(tuple(out["beta"]), out["nu"], NormalScale(out["theta0"]))
    except SymPearsonError as exc:
        raise UsageError(f"model: {exc}") from None
    if out["n"] < 50:
        raise UsageError("n must be at least 50")
    return out


# Settings that change how a run executes but never what it computes.
_EXECUTION_ONLY = ("jobs", "out")


def _public(cfg):
    return {k: v for k, v in cfg.items() if not k.startswith("_") and k not in _EXECUTION_ONLY}


def _experiment(cfg, rho, gamma):
    scenario = ScenarioSpec(cfg["_model"], n=cfg["n"], rho=rho, h=cfg["_h"], gamma=gamma, pi=cfg["_pi"])
    return ExperimentConfig(scenario=scenario, m=cfg["m"], alpha=cfg["alpha"],
                            partition=cfg["_partition"], reps=cfg["reps"], seed=cfg["seed"],
                            n_jobs=cfg["jobs"], mean_method=cfg["mean_method"],
                            beta_method=cfg["beta_method"])


# Output.


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (list, tuple)):
        return ";".join(_fmt(v) for v in value)
    return str(value)


def render(command, cfg, columns, rows, fmt, extra=None) -> str:
    if fmt == "json":
        doc = {"command": command, "config": _public(cfg), "columns": columns,
               "rows": [{c: _jsonable(r[c]) for c in columns} for r in rows]}
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# Commands.


def cmd_test(cfg):
    if cfg["input"] is None:
        raise UsageError("test: an input series file is required")
    y = read_series(cfg["input"])
    p = cfg["p"]
    if y.size - p < p + 10:
        raise UsageError(f"test: need n >= p + 10 observations after {p} pre-sample values, got {y.size}")
    try:
        fit = fit_ar(y, p, cfg["mean_method"], cfg["beta_method"])
    except SymPearsonError as exc:
        raise PipelineError(f"estimation stage failed: {exc}") from None
    try:
        rep = residual_test(fit.residuals, m=cfg["m"], alpha=cfg["alpha"], partition=cfg["_partition"])
    except SymPearsonError as exc:
        raise PipelineError(f"test stage failed: {exc}") from None
    d = rep.to_dict()
    d["mu_hat"] = fit.mu_hat
    d["beta_hat"] = [float(b) for b in fit.beta_hat]
    row = {c: d[c] for c in TEST_COLUMNS}
    if cfg["format"] == "json":
        doc = {"command": "test", "config": _public(cfg), "report": _jsonable(d)}
        return json.dumps(doc, indent=2) + "\n"
    return render("test", cfg, TEST_COLUMNS, [row], "csv")


def _grid_points(cfg):
    return list(itertools.product(cfg["rho"], cfg["gamma"]))


def cmd_power(cfg, command="power"):
    points = _grid_points(cfg)
    if command == "power" and len(points) != 1:
        raise UsageError("power: give a single --rho and --gamma (use power-grid for lists)")
    rows = []
    for rho, gamma in points:
        exp = _experiment(cfg, rho, gamma)
        try:
            res = run_power(exp)
        except SymPearsonError as exc:
            raise PipelineError(f"grid point rho={rho}, gamma={gamma} failed: {exc}") from None
        rows.append({"rho": rho, "gamma": gamma, "n": cfg["n"], "m": cfg["m"], "alpha": cfg["alpha"],
                     "lambda2": res.lambda2, "W_asymptotic": res.w_asymptotic,
                     "W_empirical": res.w_empirical, "ci_lo": res.ci_lo, "ci_hi": res.ci_hi,
                     "bound_2_16": res.bound, "N": res.reps, "seed": cfg["seed"]})
    return render(command, cfg, POWER_COLUMNS, rows, cfg["format"])


def cmd_asymptotic(cfg):
    exp = _experiment(cfg, 0.0, 0.0)
    ctx = exp.context()
    delta = shift_vector(cfg["_pi"], ctx) if any(g > 0 for g in cfg["gamma"]) else None
    rows = []
    for rho, gamma in _grid_points(cfg):
        lam2 = noncentrality(rho, gamma, cfg["_h"], cfg["_pi"], ctx, delta)
        rows.append({"rho": rho, "gamma": gamma, "n": cfg["n"], "m": cfg["m"], "alpha": cfg["alpha"],
                     "lambda2": lam2,
                     "W_asymptotic": asymptotic_power(rho, gamma, cfg["_h"], cfg["_pi"], ctx,
                                                      cfg["alpha"], delta=delta),
                     "bound_2_16": robustness_bound(gamma, cfg["_pi"], ctx, delta)})
    return render("asymptotic", cfg, ASYMPTOTIC_COLUMNS, rows, cfg["format"])


def _single_point(cfg, command):
    points = _grid_points(cfg)
    if len(points) != 1:
        raise UsageError(f"{command}: give a single --rho and --gamma")
    return points[0]


def cmd_expansion(cfg):
    rho, gamma = _single_point(cfg, "expansion")
    exp = _experiment(cfg, rho, gamma)
    try:
        chk = check_expansion(exp, cfg["grid"])
    except SymPearsonError as exc:
        raise PipelineError(f"expansion check failed: {exc}") from None
    rows = [vars(r) for r in chk.rows]
    extra = {"coverage": chk.coverage, "antisymmetric": chk.antisymmetric}
    return render("expansion", cfg, EXPANSION_COLUMNS, rows, cfg["format"], extra)


def cmd_clt(cfg):
    rho, gamma = _single_point(cfg, "clt")
    if gamma != 0.0:
        raise UsageError("clt: the count CLT diagnostic requires --gamma 0")
    exp = _experiment(cfg, rho, gamma)
    try:
        chk = check_clt_nu(exp)
    except SymPearsonError as exc:
        raise PipelineError(f"clt check failed: {exc}") from None
    z = chk.z
    rows = []
    m = chk.limit.shape[0]
    for j in range(m):
        for k in range(m):
            rows.append({"j": j + 1, "k": k + 1, "empirical": chk.empirical[j, k],
                         "limit": chk.limit[j, k], "se": chk.se[j, k], "z": z[j, k]})
    extra = {"max_deviation": chk.max_deviation, "max_z": chk.max_z}
    return render("clt", cfg, CLT_COLUMNS, rows, cfg["format"], extra)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sympearson",
        description="Symmetrized Pearson chi-square test for normality of AR(p) innovations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        if name == "test":
            sp.add_argument("input", nargs="?", default=None,
                            help="series file, one value per line; first p lines are pre-sample")
        sp.add_argument("--config", help="JSON file with settings (flags override it)")
        sp.add_argument("--p", type=int, help="AR order for the test subcommand")
        sp.add_argument("--n", type=int)
        sp.add_argument("--beta", help="comma-separated AR coefficients")
        sp.add_argument("--nu", type=float, help="intercept")
        sp.add_argument("--theta0", type=float)
        sp.add_argument("--rho", help="value or comma-separated list")
        sp.add_argument("--gamma", help="value or comma-separated list")
        sp.add_argument("--h", help="normal:S | mixture:W,S1,S2 | logistic:S")
        sp.add_argument("--pi", help="point:C | normal:M,S | uniform:A,B | discrete:v1:p1,...")
        sp.add_argument("--m", type=int)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--reps", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--out")
        sp.add_argument("--partition", help="auto | fixed:x1,x2,...")
        sp.add_argument("--jobs", type=int, help="worker processes (results do not depend on it)")
        sp.add_argument("--grid", help="x values for the expansion subcommand")
        sp.add_argument("--mean-method", dest="mean_method", choices=("mean", "median"))
        sp.add_argument("--beta-method", dest="beta_method", choices=("ls", "huber"))
    return parser


HANDLERS = {
    "test": cmd_test,
    "power": cmd_power,
    "power-grid": lambda cfg: cmd_power(cfg, "power-grid"),
    "expansion": cmd_expansion,
    "clt": cmd_clt,
    "asymptotic": cmd_asymptotic,
}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = resolve(args)
        text = HANDLERS[args.command](cfg)
        _emit(text, cfg["out"])
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
