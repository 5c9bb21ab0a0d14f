"""Command-line front end: ``painleve-lab <subcommand> ...``.

Exit codes: 0 success, 1 numeric failure, 2 usage error.  Every output file
embeds the full configuration and the package version.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction
from typing import List, Optional

from . import __version__

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
BITS_ENV = "PAINLEVE_LAB_BITS"


class UsageError(ValueError):
    pass


def default_bits() -> int:
    raw = os.environ.get(BITS_ENV)
    if raw is None:
        return 512
    try:
        bits = int(raw)
    except ValueError:
        raise UsageError(f"{BITS_ENV} must be an integer, got {raw!r}") from None
    if bits < 53:
        raise UsageError(f"{BITS_ENV} must be at least 53")
    return bits


def _rational(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}") from None


def _complex(s: str) -> complex:
    try:
        return complex(s.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {s!r}") from None


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive number")
    return v


# helpers

def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    for k, v in cfg.items():
        if isinstance(v, Fraction):
            cfg[k] = f"{v.numerator}/{v.denominator}"
        elif isinstance(v, complex):
            cfg[k] = [v.real, v.imag]
        elif isinstance(v, list):
            cfg[k] = [str(x) if isinstance(x, Fraction) else x for x in v]
    return cfg


def _emit_json(args, payload) -> None:
    from .io import dumps_json, write_json

    cfg = _config(args)
    if getattr(args, "out", None):
        write_json(args.out, payload, cfg)
    else:
        sys.stdout.write(dumps_json(payload, cfg))


def _build_map(args):
    from .maps import MapSpec

    if getattr(args, "lf", None):
        a, b = args.lf
        return MapSpec.linear_fractional(a, b)
    if getattr(args, "map", None):
        params = {}
        if args.a is not None:
            params["a"] = args.a
        if getattr(args, "b", None) is not None:
            params["b"] = args.b
        fp = getattr(args, "fixed_point", None) or 0
        return MapSpec.parse(args.map, fixed_point=fp, **params)
    if args.a is None:
        raise UsageError("give --map, --lf or --a")
    return MapSpec.logistic(args.a)


def _need_unit_a(a):
    if a is None or not 0 < a < 1:
        raise UsageError("--a must lie in (0, 1) for the conformal parametrization")


# subcommands

def cmd_classify(args) -> int:
    from .classifier import painleve_test

    G = _build_map(args)
    _emit_json(args, {"map": G.to_json(), "verdict": painleve_test(G).to_json()})
    return EXIT_OK


def cmd_linearize(args) -> int:
    from .julia import disk_samples
    from .linearization import conjugation_residual, q_equation_residual, solve_conjugation
    from .series import series_to_json

    G = _build_map(args)
    cd = solve_conjugation(G, order=args.order, bits=args.bits)
    r = min(cd.phi_radius, cd.radius_estimate) / 2
    pts = [complex(z) for z in disk_samples(32, seed=args.seed, radius=min(0.5, cd.radius_estimate / 2))]
    payload = {
        "map": G.to_json(), "multiplier": cd.a, "order": cd.order, "bits": cd.bits,
        "q_radius_estimate": cd.radius_estimate, "phi_radius_estimate": cd.phi_radius,
        "conjugation_residual": conjugation_residual(cd, r),
        "q_equation_residual": q_equation_residual(cd, pts),
        "phi": series_to_json(cd.phi), "q": series_to_json(cd.q),
    }
    _emit_json(args, payload)
    return EXIT_OK


def cmd_continue(args) -> int:
    from .linearization import conserved_quantity, continue_solution, solve_conjugation
    from .series import convert

    G = _build_map(args)
    cd = solve_conjugation(G, order=args.order, bits=args.bits)
    C = conserved_quantity(cd, 0, convert(args.x0, args.bits), extend=True)
    rows = []
    for z in args.z:
        zz = int(z.real) if z.imag == 0 and z.real == int(z.real) else z
        rows.append({"z": z, "x": continue_solution(cd, C, zz, route=args.route)})
    _emit_json(args, {"map": G.to_json(), "C": C, "route": args.route, "values": rows})
    return EXIT_OK


def cmd_barrier(args) -> int:
    from .linearization import barrier_probe, solve_conjugation

    G = _build_map(args)
    cd = solve_conjugation(G, order=args.order, bits=args.bits)
    direction = complex(math.cos(args.angle), math.sin(args.angle))
    rep = barrier_probe(G, cd, direction, steps=args.steps, max_iter=args.max_iter)
    _emit_json(args, rep.to_json())
    return EXIT_OK


def cmd_julia(args) -> int:
    from .io import write_csv
    from .julia import boundary_trace

    _need_unit_a(args.a)
    if not 0 < args.inset <= 0.1:
        raise UsageError("--inset must lie in (0, 0.1]")
    tr = boundary_trace(args.a, args.angles, args.inset, precision=args.precision, threads=args.threads)
    cfg = _config(args)
    rows = tr.to_rows()
    if args.out:
        write_csv(args.out, ["theta", "re", "im", "err_bound"], rows, cfg)
    else:
        from .io import dumps_csv

        sys.stdout.write(dumps_csv(["theta", "re", "im", "err_bound"], rows, cfg))
    if args.svg:
        from .plotting import julia_svg

        julia_svg(tr.points, args.svg, cfg)
    return EXIT_OK


def cmd_holder(args) -> int:
    from .julia import holder_exponent_probe

    _need_unit_a(args.a)
    est = holder_exponent_probe(args.a, args.theta, eps_range=(args.eps_min, args.eps_max),
                                n_points=args.points, precision=args.bits, detail=True)
    _emit_json(args, {"exponent": est.exponent, "expected": est.expected,
                      "relative_error": est.relative_error, "eps": est.eps, "gaps": est.gaps})
    return EXIT_OK


def cmd_psi(args) -> int:
    from .asymptotics import psi_scan, required_bits
    from .io import dumps_csv, write_csv

    _need_unit_a(args.a)
    need = required_bits(args.a, args.N + 1)
    if args.bits < need:
        raise UsageError(f"--bits {args.bits} too small for N = {args.N}; need at least {need}")
    tab = psi_scan(args.a, grid=args.grid, N=args.N, precision=args.bits, threads=args.threads)
    c = args.c if args.c is not None else -tab.mean()
    scaled = tab.scaled(c)
    rows = [(t, p, s, lead) for t, p, s, lead in zip(tab.t, tab.psi, scaled, tab.leading)]
    cols = ["t", "psi", "scaled", "leading"]
    cfg = _config(args)
    cfg["c_used"] = c
    if args.out:
        write_csv(args.out, cols, rows, cfg)
    else:
        sys.stdout.write(dumps_csv(cols, rows, cfg))
    if args.svg:
        from .plotting import psi_svg

        psi_svg(tab.t, scaled, args.svg, cfg)
    return EXIT_OK


def cmd_borel(args) -> int:
    from .borel import drift_table, solve_borel_fixed_point

    n = args.P / args.h
    if abs(n - round(n)) > 1e-9 * n:
        raise UsageError("--P must be an integer multiple of --h")
    g = solve_borel_fixed_point(args.P, args.h, args.tol, kernel=args.kernel, direction=args.direction)
    table = drift_table(args.orbit_from, args.steps, g)
    payload = {"grid": g.to_json(include_samples=args.samples), "ratios": g.ratios,
               "max_drift": max(r["drift"] for r in table), "drift_table": table}
    _emit_json(args, payload)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import run_all

    results = run_all(set(args.only) if args.only else None)
    for r in results:
        print(r.line(), flush=True)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    if args.out:
        from .io import write_json

        write_json(args.out, [r.to_json() for r in results], _config(args))
    return EXIT_OK if n_pass == len(results) else EXIT_NUMERIC


# parser

def build_parser() -> argparse.ArgumentParser:
    bits = default_bits()
    p = argparse.ArgumentParser(prog="painleve-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_positive_int, default=1, help="worker process cap")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    common.add_argument("--out", help="output file (stdout when omitted)")
    sub = p.add_subparsers(dest="command", required=True)

    def map_args(sp, lf=True):
        sp.add_argument("--map", help="map expression in x, e.g. 'a*x*(1-x)'")
        sp.add_argument("--a", type=_rational, help="parameter a (logistic map when --map is absent)")
        sp.add_argument("--b", type=_rational, help="parameter b for --map expressions")
        sp.add_argument("--fixed-point", type=_rational, default=None)
        if lf:
            sp.add_argument("--lf", nargs=2, type=_rational, metavar=("A", "B"),
                            help="linear-fractional map a x / (1 + b x)")

    sp = sub.add_parser("classify", parents=[common], help="Painleve-property verdict")
    map_args(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("linearize", parents=[common], help="conjugation series phi and Q")
    map_args(sp)
    sp.add_argument("--order", type=_positive_int, default=64)
    sp.add_argument("--bits", type=_positive_int, default=bits)
    sp.set_defaults(func=cmd_linearize)

    sp = sub.add_parser("continue", parents=[common], help="continue an orbit to complex n")
    map_args(sp)
    sp.add_argument("--x0", type=_rational, required=True)
    sp.add_argument("--z", type=_complex, nargs="+", required=True)
    sp.add_argument("--route", choices=["phi", "transseries"], default="phi")
    sp.add_argument("--order", type=_positive_int, default=64)
    sp.add_argument("--bits", type=_positive_int, default=bits)
    sp.set_defaults(func=cmd_continue)

    sp = sub.add_parser("barrier", parents=[common], help="Q radius versus basin boundary")
    map_args(sp)
    sp.add_argument("--angle", type=float, default=math.pi, help="ray angle (default: towards -1)")
    sp.add_argument("--steps", type=_positive_int, default=16)
    sp.add_argument("--max-iter", type=_positive_int, default=10_000)
    sp.add_argument("--order", type=_positive_int, default=64)
    sp.add_argument("--bits", type=_positive_int, default=bits)
    sp.set_defaults(func=cmd_barrier)

    sp = sub.add_parser("julia", parents=[common], help="trace the Julia set of a x (1 - x)")
    sp.add_argument("--a", type=_rational, required=True)
    sp.add_argument("--angles", type=_positive_int, default=4096)
    sp.add_argument("--inset", type=float, default=1e-6)
    sp.add_argument("--precision", type=_positive_int, default=128)
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_julia)

    sp = sub.add_parser("holder", parents=[common], help="radial Holder exponent")
    sp.add_argument("--a", type=_rational, required=True)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--eps-min", type=_positive_float, default=1e-30)
    sp.add_argument("--eps-max", type=_positive_float, default=1e-5)
    sp.add_argument("--points", type=_positive_int, default=26)
    sp.add_argument("--bits", type=_positive_int, default=bits)
    sp.set_defaults(func=cmd_holder)

    sp = sub.add_parser("psi", parents=[common], help="boundary oscillation over one period")
    sp.add_argument("--a", type=_rational, required=True)
    sp.add_argument("--N", type=_positive_int, default=300)
    sp.add_argument("--bits", type=_positive_int, default=bits)
    sp.add_argument("--grid", type=_positive_int, default=64)
    sp.add_argument("--c", type=float, default=None, help="offset c in 1e9 (psi + c); fitted if absent")
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_psi)

    sp = sub.add_parser("borel", parents=[common], help="Borel-plane solve for the a = 1 invariant")
    sp.add_argument("--P", type=_positive_float, default=40.0)
    sp.add_argument("--h", type=_positive_float, default=1 / 64)
    sp.add_argument("--tol", type=_positive_float, default=1e-12)
    sp.add_argument("--kernel", choices=["bessel", "series"], default="bessel")
    sp.add_argument("--direction", type=float, default=0.0)
    sp.add_argument("--orbit-from", type=float, default=0.05)
    sp.add_argument("--steps", type=_positive_int, default=50)
    sp.add_argument("--samples", action="store_true", help="include H samples in the JSON")
    sp.set_defaults(func=cmd_borel)

    sp = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    sp.add_argument("--only", type=int, nargs="+", help="criterion numbers")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    try:
        parser = build_parser()
    except UsageError as exc:
        print(f"painleve-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    from .maps import MapError

    try:
        return args.func(args)
    except (UsageError, MapError) as exc:
        print(f"painleve-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, ValueError, OverflowError) as exc:
        print(f"painleve-lab: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
