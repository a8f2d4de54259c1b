"""Command-line interface.

    seqkernel simulate | estimate | adaptive | risk-table | verify-class | diagnostics

Exit status: 0 on success, 2 when an argument violates a precondition,
3 when the data make an estimator degenerate or a risk table is partial.
A flat ``key = value`` file passed with ``--config`` supplies defaults for
any long option; flags on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace

import numpy as np

from .adaptive import adaptive_estimate, build_grid
from .errors import SeqKernelError, ValidationError
from .experiments import ESTIMATORS, PUBLISHED_RISKS, RiskExperiment, Z0_DEFAULT, nonsequential_baseline, preset, run_risk
from .kernel_core import BOUNDARY_POLICIES, bandwidth, kappa, make_window
from .process import (NOISE_FAMILIES, CoefficientFunction, ModelConfig, NoiseSpec, Path, constant_function,
                      demo_function, simulate_path, strong_holder_constant, verify_moment_class, verify_stability,
                      weak_holder_defect)
from .sequential import estimate_at, zeta_diagnostics

RISK_HEADER = ["n", "estimator", "noise", "M", "risk", "std_error", "miss_rate", "mean_tau_over_H", "seed"]
EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3


class UsageError(ValidationError):
    pass


def parse_function(spec: str, eps: float = 0.1) -> CoefficientFunction:
    """``demo-<alpha>``, ``zero`` or ``const-<c>``."""
    try:
        if spec.startswith("demo-"):
            return demo_function(float(spec[5:]), eps=eps)
        if spec == "zero":
            return constant_function(0.0, eps)
        if spec.startswith("const-"):
            return constant_function(float(spec[6:]), eps)
    except ValueError as exc:
        raise UsageError(f"--function {spec!r}: {exc}") from exc
    raise UsageError(f"--function must be demo-<alpha>, zero or const-<c>, got {spec!r}")


def _bounded(name, kind=float, lo=None, hi=None, lo_open=False, hi_open=False):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"--{name}: expected {kind.__name__}, got {text!r}")
        if lo is not None and (v < lo or (lo_open and v == lo)):
            raise argparse.ArgumentTypeError(f"--{name} must be {'>' if lo_open else '>='} {lo}, got {v}")
        if hi is not None and (v > hi or (hi_open and v == hi)):
            raise argparse.ArgumentTypeError(f"--{name} must be {'<' if hi_open else '<='} {hi}, got {v}")
        return v
    return conv


def _int_list(text):
    try:
        values = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"--n: expected comma-separated integers, got {text!r}")
    if not values or min(values) < 3:
        raise argparse.ArgumentTypeError(f"--n values must be integers >= 3, got {text!r}")
    return values


# --- output --------------------------------------------------------------------


def _cell(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return str(v)


def _json_value(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    if isinstance(v, np.generic):
        return v.item()
    return v


def render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{k: _json_value(v) for k, v in r.items()} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf)
    if rows:
        writer.writerow(list(rows[0]))
        for r in rows:
            writer.writerow([_cell(v) for v in r.values()])
    return buf.getvalue()


def emit(rows: list[dict], args) -> None:
    text = render(rows, args.format)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def risk_rows(table) -> list[dict]:
    return [{k: getattr(r, k) for k in RISK_HEADER} for r in table.rows]


# --- commands ------------------------------------------------------------------


def _path_from_args(args) -> Path:
    if getattr(args, "input", None):
        values = np.loadtxt(args.input, delimiter=",", ndmin=1)
        return Path.from_observations(values.ravel())
    cfg = ModelConfig(args.n, parse_function(args.function, args.eps), NoiseSpec(args.noise, args.varsigma),
                      args.seed, args.y0)
    return simulate_path(cfg)


def cmd_simulate(args):
    path = _path_from_args(args)
    n = path.n
    emit([{"k": k, "x": k / n, "y": float(path.values[k])} for k in range(n + 1)], args)


def _h_for(args, n):
    return args.h if args.h is not None else bandwidth(args.beta, kappa(n, args.kappa_regime))


def cmd_estimate(args):
    n = args.n
    if not args.input:
        make_window(n, args.z0, _h_for(args, n), args.boundary)
    path = _path_from_args(args)
    h = _h_for(args, path.n)
    if args.estimator == "nonsequential_baseline":
        w = make_window(path.n, args.z0, h, args.boundary)
        emit([{"estimator": args.estimator, "n": path.n, "z0": args.z0, "h": h, "k_star": w.k_star,
               "k_upper": w.k_upper, "estimate": nonsequential_baseline(path, w)}], args)
        return
    alpha = args.alpha if args.alpha is not None else args.beta - 1.0
    res = estimate_at(path, args.z0, h, alpha, args.eps, args.boundary)
    p, w = res.pilot, res.window
    emit([{"estimator": "sequential", "n": path.n, "z0": args.z0, "h": h, "k_star": w.k_star,
           "k_upper": w.k_upper, "nu": p.nu, "iota": p.iota, "eps_tilde": p.eps_tilde, "s_hat": p.s_hat,
           "s_tilde": p.s_tilde, "H": res.H, "tau": res.tau, "kappa": res.kappa_corr, "hit": res.hit,
           "estimate": res.estimate, "zeta_tilde": res.zeta_tilde, "eps": args.eps}], args)


def cmd_adaptive(args):
    grid = build_grid(args.n, args.beta_low, args.beta_high, args.lambda_factor)
    path = _path_from_args(args)
    res = adaptive_estimate(path, args.z0, grid, args.eps, args.boundary)
    rows = []
    for k, lvl in enumerate(res.per_level):
        rows.append({"k": k, "beta": grid.betas[k], "h": grid.h_checks[k], "N": grid.N_values[k],
                     "estimate": lvl.estimate, "hit": lvl.hit, "tau": lvl.tau, "omega": res.omegas[k],
                     "bound": grid.lambda_check / grid.N_values[k], "selected": k == res.k_selected,
                     "lambda_check": grid.lambda_check})
    emit(rows, args)


def experiment_from_args(args) -> RiskExperiment:
    overrides = {k: v for k, v in {
        "replications": args.M, "master_seed": args.seed, "n_values": args.n_list, "eps": args.eps,
        "lambda_factor": args.lambda_factor, "kappa_regime": args.kappa_regime, "boundary": args.boundary,
        "beta": args.beta, "beta_low": args.beta_low, "beta_high": args.beta_high, "z0": args.z0,
    }.items() if v is not None}
    if args.preset:
        exp = preset(args.preset, **overrides)
    else:
        if not args.estimator:
            raise UsageError("risk-table needs --preset or --estimator")
        exp = RiskExperiment(args.estimator, parse_function(args.function), **overrides)
    if args.noise:
        exp = replace(exp, noise=NoiseSpec(args.noise))
    if args.function and args.preset:
        exp = replace(exp, coefficient=parse_function(args.function))
    if args.estimator and args.preset:
        exp = replace(exp, estimator_kind=args.estimator)
    return exp


def cmd_risk_table(args):
    table = run_risk(experiment_from_args(args), workers=args.threads)
    emit(risk_rows(table), args)
    for n, msg in table.failures:
        print(f"row n={n} failed: {msg}", file=sys.stderr)
    return EXIT_RUNTIME if table.partial else EXIT_OK


def cmd_verify_class(args):
    f = parse_function(args.function, args.eps)
    check = args.check
    if check == "stability":
        v = verify_stability(f, args.eps, args.L, args.grid_size)
        row = {"check": check, "passed": v.passed, "witness": v.witness if v.witness is not None else math.nan,
               "grid_size": v.grid_size, "reason": v.reason}
        emit([row], args)
    elif check == "weak-holder":
        h = args.h if args.h is not None else 0.05
        d = weak_holder_defect(f, args.z0, h, args.quadrature_points)
        emit([{"check": check, "z0": args.z0, "h": h, "defect": d, "quadrature_points": args.quadrature_points}],
             args)
    elif check == "strong-holder":
        alpha = args.alpha if args.alpha is not None else args.beta - 1.0
        c = strong_holder_constant(f, args.z0, alpha, args.grid_size)
        emit([{"check": check, "z0": args.z0, "alpha": alpha, "constant": c, "grid_size": args.grid_size}], args)
    else:
        res = verify_moment_class(NoiseSpec(args.noise), args.varsigma, args.k_max, args.sample_size, args.seed)
        emit([{"check": check, "noise": args.noise, "varsigma": args.varsigma, "k": m.k, "moment": m.moment,
               "std_error": m.std_error, "bound": m.bound, "passed": m.passed} for m in res], args)


def cmd_diagnostics(args):
    exp = RiskExperiment("sequential", parse_function(args.function), NoiseSpec(args.noise), z0=args.z0,
                         n_values=(args.n,), replications=args.M or 5000, master_seed=args.seed, beta=args.beta,
                         eps=args.eps)
    table = run_risk(exp, workers=args.threads, keep_samples=True)
    if table.partial:
        raise table_error(table)
    s = zeta_diagnostics(table.samples[args.n].zeta)
    row = {"n": args.n, "M": s.count, "second_moment": s.second_moment, "ks_distance": s.normality_stat,
           "miss_rate": table.rows[0].miss_rate}
    for z, rate in s.tail_exceed_rates.items():
        row[f"exceed_{z:g}"] = rate
        row[f"bound_{z:g}"] = s.tail_bounds[z]
    emit([row], args)


def table_error(table):
    return SeqKernelError("; ".join(f"n={n}: {msg}" for n, msg in table.failures))


# --- parser --------------------------------------------------------------------


def _common(p, function="demo-0.3"):
    p.add_argument("--function", default=function, help="demo-<alpha>, zero or const-<c>")
    p.add_argument("--noise", default="gaussian_unit", choices=NOISE_FAMILIES[:-1])
    p.add_argument("--varsigma", type=_bounded("varsigma", lo=1.0), default=2.0)
    p.add_argument("--seed", type=_bounded("seed", int, 0, 2**64 - 1), default=0)
    p.add_argument("--y0", type=float, default=0.0)
    p.add_argument("--eps", type=_bounded("eps", lo=0.0, hi=1.0, lo_open=True, hi_open=True), default=0.1)
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _estimation(p):
    p.add_argument("--z0", type=_bounded("z0", lo=0.0, hi=1.0, lo_open=True, hi_open=True), default=Z0_DEFAULT)
    p.add_argument("--boundary", choices=BOUNDARY_POLICIES, default="reject")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqkernel", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="flat key=value file of defaults")
    sub = parser.add_subparsers(dest="command", required=True)
    n_type = _bounded("n", int, 3)
    beta_type = _bounded("beta", lo=1.0, hi=2.0, lo_open=True, hi_open=True)

    p = sub.add_parser("simulate", help="simulate one path")
    _common(p)
    p.add_argument("--n", type=n_type, default=1000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="sequential (or baseline) estimate on one path")
    _common(p)
    _estimation(p)
    p.add_argument("--n", type=n_type, default=1000)
    p.add_argument("--beta", type=beta_type, default=1.3)
    p.add_argument("--alpha", type=_bounded("alpha", lo=0.0, hi=1.0, lo_open=True, hi_open=True))
    p.add_argument("--h", type=_bounded("h", lo=0.0, lo_open=True), help="bandwidth; overrides --beta")
    p.add_argument("--kappa-regime", choices=("nonadaptive", "adaptive"), default="nonadaptive")
    p.add_argument("--estimator", choices=("sequential", "nonsequential_baseline"), default="sequential")
    p.add_argument("--input", help="comma/newline separated observations y_0..y_n")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("adaptive", help="adaptive estimate on one path")
    _common(p, function="demo-0.7")
    _estimation(p)
    p.add_argument("--n", type=n_type, default=10000)
    p.add_argument("--beta-low", type=_bounded("beta-low", lo=1.0, hi=2.0), default=1.6)
    p.add_argument("--beta-high", type=_bounded("beta-high", lo=1.0, hi=2.0), default=1.8)
    p.add_argument("--lambda-factor", type=_bounded("lambda-factor", lo=1.0, lo_open=True), default=1.05)
    p.add_argument("--input", help="comma/newline separated observations y_0..y_n")
    p.set_defaults(func=cmd_adaptive)

    p = sub.add_parser("risk-table", help="Monte Carlo risk table")
    p.add_argument("--preset", choices=sorted(PUBLISHED_RISKS))
    p.add_argument("--estimator", choices=ESTIMATORS)
    p.add_argument("--function", default=None)
    p.add_argument("--noise", choices=NOISE_FAMILIES[:-1])
    p.add_argument("--n", dest="n_list", type=_int_list)
    p.add_argument("--M", type=_bounded("M", int, 1))
    p.add_argument("--seed", type=_bounded("seed", int, 0, 2**64 - 1))
    p.add_argument("--eps", type=_bounded("eps", lo=0.0, hi=1.0, lo_open=True, hi_open=True))
    p.add_argument("--z0", type=_bounded("z0", lo=0.0, hi=1.0, lo_open=True, hi_open=True))
    p.add_argument("--beta", type=beta_type)
    p.add_argument("--beta-low", type=_bounded("beta-low", lo=1.0, hi=2.0))
    p.add_argument("--beta-high", type=_bounded("beta-high", lo=1.0, hi=2.0))
    p.add_argument("--lambda-factor", type=_bounded("lambda-factor", lo=1.0, lo_open=True))
    p.add_argument("--kappa-regime", choices=("nonadaptive", "adaptive"))
    p.add_argument("--boundary", choices=BOUNDARY_POLICIES)
    p.add_argument("--threads", type=_bounded("threads", int, 1))
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_risk_table)

    p = sub.add_parser("verify-class", help="numerical class-membership checks")
    _common(p)
    p.add_argument("--check", choices=("stability", "weak-holder", "strong-holder", "moments"), required=True)
    p.add_argument("--z0", type=_bounded("z0", lo=0.0, hi=1.0, lo_open=True, hi_open=True), default=Z0_DEFAULT)
    p.add_argument("--h", type=_bounded("h", lo=0.0, lo_open=True))
    p.add_argument("--beta", type=beta_type, default=1.3)
    p.add_argument("--alpha", type=_bounded("alpha", lo=0.0, hi=1.0, lo_open=True, hi_open=True))
    p.add_argument("--L", type=_bounded("L", lo=0.0, lo_open=True), default=1.3)
    p.add_argument("--grid-size", type=_bounded("grid-size", int, 2), default=10_001)
    p.add_argument("--quadrature-points", type=_bounded("quadrature-points", int, 8), default=1024)
    p.add_argument("--k-max", type=_bounded("k-max", int, 1, 8), default=3)
    p.add_argument("--sample-size", type=_bounded("sample-size", int, 2), default=1_000_000)
    p.set_defaults(func=cmd_verify_class)

    p = sub.add_parser("diagnostics", help="martingale-term diagnostics of the sequential estimator")
    _common(p, function="zero")
    p.add_argument("--z0", type=_bounded("z0", lo=0.0, hi=1.0, lo_open=True, hi_open=True), default=Z0_DEFAULT)
    p.add_argument("--n", type=n_type, default=10000)
    p.add_argument("--M", type=_bounded("M", int, 1), default=5000)
    p.add_argument("--beta", type=beta_type, default=1.3)
    p.add_argument("--threads", type=_bounded("threads", int, 1))
    p.set_defaults(func=cmd_diagnostics)
    return parser


def read_config(path: str) -> list[str]:
    """Turn ``key = value`` lines into ``--key value`` tokens; ``#`` starts a comment."""
    tokens = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            tokens += [key if key == "command" else "--" + key.replace("_", "-"), value]
    return tokens


def _split_config(argv: list[str]) -> tuple[list[str], list[str]]:
    argv = list(argv)
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[:i] + argv[i + 2:], read_config(argv[i + 1])
        if tok.startswith("--config="):
            return argv[:i] + argv[i + 1:], read_config(tok.split("=", 1)[1])
    return argv, []


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        argv, cfg = _split_config(argv)
        if cfg:
            command = None
            if "command" in cfg:
                i = cfg.index("command")
                command = cfg[i + 1]
                cfg = cfg[:i] + cfg[i + 2:]
            if argv and not argv[0].startswith("-"):
                command, argv = argv[0], argv[1:]
            if command is None:
                raise UsageError("no command given on the command line or in the config file")
            argv = [command] + cfg + argv
    except (OSError, UsageError) as exc:
        print(f"seqkernel: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    try:
        status = args.func(args)
    except ValidationError as exc:
        print(f"seqkernel: invalid argument: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SeqKernelError as exc:
        print(f"seqkernel: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return status or EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
