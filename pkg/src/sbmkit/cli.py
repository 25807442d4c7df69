"""
Command-line front end.

Every subcommand prints one JSON object per line on stdout (keys in a fixed
order, floats with 17 significant digits).  Histograms and path exports go
to CSV with ``--out``.  Exit status: 0 on success, 2 on invalid arguments,
1 on a failed suite or an unconverged integral.
"""
from __future__ import annotations

import argparse
import contextlib
import sys
from dataclasses import replace

from .kernels import (
    SpaceTimePoint,
    density_bounds,
    exact_density,
    hitting_density,
    hitting_total_mass,
    joint_density_from_zero,
    killed_density,
    marginal_density_from_zero,
)
from .model import DriftParams, classify, exit_probability, scale_function
from .numerics import DEFAULT_SPEC, NonConvergence, QuadratureSpec
from .simulate import (
    WalkConfig,
    aligned_edges,
    endpoint_density,
    simulate_killed,
    simulate_paths,
)
from .verify import SUITES, run_suite, to_json


class _UsageError(Exception):
    pass


def _params(args, need_p=True) -> DriftParams:
    return DriftParams(args.m1, args.m2, args.p if need_p else 0.5)


def _spec(args) -> QuadratureSpec:
    return QuadratureSpec(
        abs_tol=args.abs_tol if args.abs_tol is not None else DEFAULT_SPEC.abs_tol,
        rel_tol=args.rel_tol if args.rel_tol is not None else DEFAULT_SPEC.rel_tol,
    )


def _emit(obj, out) -> None:
    out.write(to_json(obj) + "\n")


# ---------------------------------------------------------------------------
# handlers

def _cmd_classify(args, out):
    _emit({"kind": classify(_params(args, need_p=False)).value}, out)
    return 0


def _cmd_scale(args, out):
    value = scale_function(_params(args), args.x, inverted_skew_weight=args.literal)
    _emit({"x": args.x, "scale": value}, out)
    return 0


def _cmd_exit(args, out):
    value = exit_probability(_params(args), args.a, args.x, args.b, inverted_skew_weight=args.literal)
    _emit({"probability": value}, out)
    return 0


def _cmd_bounds(args, out):
    b = density_bounds(_params(args), SpaceTimePoint(args.t, args.x, args.y),
                       time_free_exponent=args.literal_exponent)
    _emit({"lower": b.lower, "upper": b.upper}, out)
    return 0


def _cmd_exact(args, out):
    res = exact_density(_params(args), SpaceTimePoint(args.t, args.x, args.y), _spec(args),
                        method=args.method, full_output=True)
    res.require("transition density")
    _emit({"density": res.value, "error": res.error}, out)
    return 0


def _cmd_from_zero(args, out):
    params, spec = _params(args), _spec(args)
    if args.l is None:
        res = marginal_density_from_zero(params, args.t, args.x, spec, full_output=True)
        res.require("marginal density")
        _emit({"density": res.value, "error": res.error}, out)
    else:
        res = joint_density_from_zero(params, args.t, args.x, args.l, spec,
                                      method=args.method, full_output=True)
        res.require("joint density")
        _emit({"density": res.value, "error": res.error}, out)
    return 0


def _cmd_killed(args, out):
    value = killed_density(_params(args), args.t, args.x, args.y,
                           time_free_exponent=args.literal_exponent)
    _emit({"density": value}, out)
    return 0


def _cmd_hitting(args, out):
    params = _params(args)
    if args.total:
        _emit({"total_mass": hitting_total_mass(params, args.x)}, out)
    else:
        _emit({"density": hitting_density(params, args.x, args.s)}, out)
    return 0


def _cmd_simulate(args, out):
    params = _params(args)
    cfg = WalkConfig(n=args.n, paths=args.paths, seed=args.seed, zero_rule=args.zero_rule)
    cfg.check(params)
    if args.bin_width is not None and args.out is None:
        raise _UsageError("--bin-width needs --out")
    runs = (simulate_killed if args.killed else simulate_paths)(params, args.t, args.x0, cfg)
    survivors = ~runs.absorbed
    summary = {
        "paths": len(runs),
        "n": cfg.n,
        "t": runs.t,
        "x0": runs.x0,
        "seed": cfg.seed,
        "mean_endpoint": float(runs.endpoint.mean()),
        "mean_local_time": float(runs.local_time.mean()),
        "hit_fraction": float(runs.hit.mean()),
        "survival_fraction": float(survivors.mean()),
    }
    if args.out is not None:
        if args.bin_width is not None:
            x = runs.endpoint[survivors] if args.killed else runs.endpoint
            lo = 0.0 if args.killed else (float(x.min()) if x.size else 0.0)
            hi = float(x.max()) if x.size else args.bin_width
            edges = aligned_edges(lo, hi, args.bin_width, cfg.n)
            if args.killed:
                edges = edges[edges > 0.0]
            endpoint_density(runs, args.bin_width, edges=edges,
                             survivors_only=args.killed).to_csv(args.out)
        else:
            runs.to_csv(args.out)
        summary["out"] = str(args.out)
    _emit(summary, out)
    return 0


def _cmd_verify(args, out):
    names = SUITES if args.suite == "all" else (args.suite,)
    cfg = replace(WalkConfig(), seed=args.seed)
    if args.paths is not None:
        cfg = replace(cfg, paths=args.paths)
    if args.n is not None:
        cfg = replace(cfg, n=args.n)
    ok = True
    for name in names:
        report = run_suite(name, seed=args.seed, cfg=cfg)
        ok = ok and report.passed
        _emit(report.to_dict(), out)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser

def _drift_flags(p, need_p=True, p_default=None):
    p.add_argument("--m1", type=float, required=True, help="drift on [0, inf)")
    p.add_argument("--m2", type=float, required=True, help="drift on (-inf, 0)")
    if need_p:
        p.add_argument("--p", type=float, required=p_default is None, default=p_default,
                       help="skewness in (0, 1)")


def _tol_flags(p):
    p.add_argument("--abs-tol", type=float, default=None)
    p.add_argument("--rel-tol", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbmkit", description="Skew Brownian motion with two-valued drift.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="recurrent or transient")
    _drift_flags(p, need_p=False)
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("scale", help="canonical scale function")
    _drift_flags(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--literal", action="store_true", help="use the (1-p)/p negative branch")
    p.set_defaults(handler=_cmd_scale)

    p = sub.add_parser("exit-prob", help="probability of leaving (a, b) through b")
    _drift_flags(p)
    for name in ("--a", "--x", "--b"):
        p.add_argument(name, type=float, required=True)
    p.add_argument("--literal", action="store_true", help="use the (1-p)/p negative branch")
    p.set_defaults(handler=_cmd_exit)

    dens = sub.add_parser("density", help="transition densities")
    dsub = dens.add_subparsers(dest="kind", required=True)

    p = dsub.add_parser("bounds", help="two-sided explicit bounds")
    _drift_flags(p)
    for name in ("--t", "--x", "--y"):
        p.add_argument(name, type=float, required=True)
    p.add_argument("--literal-exponent", action="store_true",
                   help="drop the time factor from the drift exponents")
    p.set_defaults(handler=_cmd_bounds)

    p = dsub.add_parser("exact", help="transition density by quadrature")
    _drift_flags(p)
    for name in ("--t", "--x", "--y"):
        p.add_argument(name, type=float, required=True)
    _tol_flags(p)
    p.add_argument("--method", choices=("occupation", "convolution"), default="occupation")
    p.set_defaults(handler=_cmd_exact)

    p = dsub.add_parser("from-zero", help="marginal (or joint with --l) density from 0")
    _drift_flags(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--l", type=float, default=None, help="local time level")
    _tol_flags(p)
    p.add_argument("--method", choices=("occupation", "simplex"), default="occupation",
                   help="joint density route")
    p.set_defaults(handler=_cmd_from_zero)

    p = dsub.add_parser("killed", help="density of paths that have not hit 0")
    _drift_flags(p, p_default=0.5)
    for name in ("--t", "--x", "--y"):
        p.add_argument(name, type=float, required=True)
    p.add_argument("--literal-exponent", action="store_true")
    p.set_defaults(handler=_cmd_killed)

    p = sub.add_parser("hitting", help="first hitting time of 0")
    _drift_flags(p, p_default=0.5)
    p.add_argument("--x", type=float, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--s", type=float, help="time at which to evaluate the density")
    g.add_argument("--total", action="store_true", help="probability of ever hitting 0")
    p.set_defaults(handler=_cmd_hitting)

    p = sub.add_parser("simulate", help="lattice random walk")
    _drift_flags(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--n", type=int, default=WalkConfig.n)
    p.add_argument("--paths", type=int, default=WalkConfig.paths)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--killed", action="store_true", help="absorb paths at 0")
    p.add_argument("--out", default=None, help="CSV file (paths, or histogram with --bin-width)")
    p.add_argument("--bin-width", type=float, default=None)
    p.add_argument("--zero-rule", choices=("tilted", "skew"), default="tilted")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", choices=SUITES + ("all",), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--paths", type=int, default=None, help="walks per Monte Carlo comparison")
    p.add_argument("--n", type=int, default=None, help="lattice steps per unit time")
    p.set_defaults(handler=_cmd_verify)
    return parser


def run(argv=None, out=None, err=None) -> int:
    """Parse ``argv``, dispatch, and return the exit status."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args, out)
    except NonConvergence as exc:
        err.write(f"sbmkit: {exc}\n")
        return 1
    except (_UsageError, ValueError) as exc:
        err.write(f"sbmkit: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())
