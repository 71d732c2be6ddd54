"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numeric/chart error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys

import numpy as np

from . import hannay, transport
from .errors import DegenerateChart, DivergentAnholonomy, UnsupportedLoop, ZeroTangent
from .geometry import (
    TWO_PI,
    Poloidal,
    TangentVector,
    Toroidal,
    Torus,
    Winding,
    approx_knot_length,
    loop_length,
)
from .records import (
    ComparisonRecord,
    HannayRecord,
    HannayRunRecord,
    KnotLengthRecord,
    TransportComparisonRecord,
    TransportRecord,
    r12,
    sweep_csv,
    write_atomic,
)

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

JOBS_ENV = "TORUS_HOLONOMY_JOBS"

_ANGLE = re.compile(
    r"""^\s*(?P<sign>[+-])?\s*(?P<num>(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)?\s*\*?\s*
        (?P<pi>pi)?\s*(/\s*(?P<den>\d+(\.\d*)?|\.\d+))?\s*$""",
    re.VERBOSE,
)


def parse_angle(text: str) -> float:
    """Parse an angle literal such as ``1.2``, ``pi``, ``-pi/2``, ``2pi/3``, ``3*pi/2``."""
    m = _ANGLE.match(text)
    if not m or (m.group("num") is None and m.group("pi") is None):
        raise ValueError(f"not an angle: {text!r}")
    value = float(m.group("num")) if m.group("num") else 1.0
    if m.group("pi"):
        value *= math.pi
    if m.group("den"):
        den = float(m.group("den"))
        if den == 0:
            raise ValueError("zero denominator")
        value /= den
    return -value if m.group("sign") == "-" else value


def _angle_type(text):
    try:
        return parse_angle(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV)
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


# -- argument groups ---------------------------------------------------------


def _add_torus_args(p):
    g = p.add_argument_group("torus")
    g.add_argument("--a", type=float, help="tube radius (default 1)")
    g.add_argument("--c", type=float, help="central radius")
    g.add_argument("--n", type=float, help="aspect ratio c/a")


def _add_loop_args(p):
    g = p.add_argument_group("loop")
    g.add_argument("--loop", choices=("toroidal", "poloidal", "knot"), required=True)
    g.add_argument("--theta0", type=_angle_type, default=0.0)
    g.add_argument("--phi0", type=_angle_type, default=0.0)
    g.add_argument("--p", type=float, help="toroidal winding count (knot)")
    g.add_argument("--q", type=float, help="poloidal winding count (knot)")


def _add_profile_args(p):
    g = p.add_argument_group("torus revolution")
    g.add_argument("--n1", type=int, default=0)
    g.add_argument("--n2", type=int, default=0)
    g.add_argument("--n3", type=int, default=0)
    g.add_argument("--T", type=float, default=1.0, help="process time")
    g.add_argument("--circuits", type=_positive_int, default=1000)
    g.add_argument("--panels", type=int, default=8192)


def _add_out(p):
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torus-holonomy",
        description="Parallel-transport anholonomy and Hannay angles for loops on a torus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub_kw = {"allow_abbrev": False}

    p = sub.add_parser("sigma-sweep", **sub_kw, help="Sigma(theta0) for toroidal loops, as CSV")
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--min", dest="lo", type=_angle_type, default=0.0)
    p.add_argument("--max", dest="hi", type=_angle_type, default=TWO_PI)
    p.add_argument("--jobs", type=_positive_int, default=_default_jobs())
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_out(p)

    p = sub.add_parser("transport", **sub_kw, help="transport a tangent vector around a loop")
    _add_torus_args(p)
    _add_loop_args(p)
    p.add_argument("--p0-phi", type=float)
    p.add_argument("--p0-theta", type=float)
    p.add_argument("--method", choices=("closed", "numeric", "both"), default="both")
    p.add_argument("--both", dest="method", action="store_const", const="both")
    p.add_argument("--steps", type=int, default=transport.DEFAULT_STEPS)
    p.add_argument("--lambda", dest="lam", type=_angle_type, default=TWO_PI)
    _add_out(p)

    for name, text in (
        ("hannay", "Hannay angle for a loop of the revolving torus"),
        ("berry-sim", "simulate the particle on the revolving torus"),
        ("compare", "compare the Hannay frameworks"),
    ):
        p = sub.add_parser(name, **sub_kw, help=text)
        _add_torus_args(p)
        _add_loop_args(p)
        _add_profile_args(p)
        if name == "hannay":
            p.add_argument(
                "--framework", choices=("line", "berry-avg", "berry-sim", "all"), default="line"
            )
        if name == "berry-sim":
            p.add_argument("--steps-per-circuit", type=_positive_int, default=256)
            p.add_argument("--trajectory", help="CSV path for the per-circuit trajectory")
        if name == "compare":
            p.add_argument("--simulate", action="store_true", help="include the simulated framework")
        _add_out(p)

    p = sub.add_parser("knot-length", **sub_kw, help="length of a (p, q) winding")
    _add_torus_args(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--method", choices=("quad", "approx", "both"), default="both")
    p.add_argument("--panels", type=int, default=16384)
    _add_out(p)
    return parser


# -- config resolution ---------------------------------------------------------


class ConfigError(Exception):
    pass


def resolve_torus(args) -> Torus:
    if (args.c is None) == (args.n is None):
        raise ConfigError("give exactly one of --c or --n")
    a = 1.0 if args.a is None else args.a
    try:
        if args.n is not None:
            return Torus.from_aspect(args.n, a)
        return Torus(a=a, c=args.c)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def resolve_loop(args):
    if args.loop == "toroidal":
        return Toroidal(args.theta0)
    if args.loop == "poloidal":
        return Poloidal(args.phi0)
    if args.p is None or args.q is None:
        raise ConfigError("--loop knot needs --p and --q")
    try:
        return Winding(args.p, args.q)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def resolve_profile(args) -> hannay.OmegaProfile:
    try:
        return hannay.OmegaProfile(args.n1, args.n2, args.n3, args.T)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# -- commands ----------------------------------------------------------------


def run_sigma_sweep(args) -> str:
    if args.samples < 2:
        raise ConfigError("--samples must be >= 2")
    if not args.n > 0 or not args.a > 0:
        raise ConfigError("--n and --a must be positive")
    grid = np.linspace(args.lo, args.hi, args.samples)
    try:
        rows = transport.sigma_sweep(args.n, args.a, grid, jobs=args.jobs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.format == "json":
        data = [
            {"theta0": r12(r.theta0), "n": r12(r.n), "sigma": r12(r.sigma), "divergent": r.divergent}
            for r in rows
        ]
        return json.dumps(data, indent=2) + "\n"
    return sweep_csv(rows)


def run_transport(args) -> str:
    torus = resolve_torus(args)
    loop = resolve_loop(args)
    if (args.p0_phi is None) != (args.p0_theta is None):
        raise ConfigError("give both --p0-phi and --p0-theta, or neither")
    if args.p0_phi is None:
        p0 = transport.sweep_p0(torus)
    else:
        p0 = TangentVector(args.p0_phi, args.p0_theta)
    if args.steps < 16:
        raise ConfigError("--steps must be >= 16")
    results = {}
    if args.method in ("closed", "both"):
        results["closed"] = transport.transport_closed(torus, loop, p0, args.lam)
    if args.method in ("numeric", "both"):
        results["numeric"] = transport.transport_numeric(torus, loop, p0, args.steps, args.lam)
    if args.method == "both":
        return TransportComparisonRecord.from_results(results["closed"], results["numeric"]).to_json()
    return TransportRecord.from_result(results[args.method]).to_json()


def run_hannay(args) -> str:
    torus = resolve_torus(args)
    loop = resolve_loop(args)
    profile = resolve_profile(args)
    wanted = {"line", "berry-avg", "berry-sim"} if args.framework == "all" else {args.framework}
    reports = []
    if "line" in wanted:
        reports.append(hannay.hannay_angle_line_integral(torus, loop, profile, args.panels))
    if "berry-avg" in wanted:
        reports.append(hannay.berry_averaged_shift(torus, loop, profile, args.panels))
    if "berry-sim" in wanted:
        reports.append(hannay.berry_simulate(torus, loop, profile, args.circuits).report)
    return HannayRunRecord(tuple(HannayRecord.from_report(r) for r in reports)).to_json()


def run_berry_sim(args) -> str:
    torus = resolve_torus(args)
    loop = resolve_loop(args)
    profile = resolve_profile(args)
    result = hannay.berry_simulate(torus, loop, profile, args.circuits, args.steps_per_circuit)
    if args.trajectory:
        lines = ["t,s,s_dot"] + [",".join(f"{v:.12g}" for v in row) for row in result.trajectory]
        write_atomic(args.trajectory, "\n".join(lines) + "\n")
    return HannayRecord.from_report(result.report).to_json()


def run_compare(args) -> str:
    torus = resolve_torus(args)
    loop = resolve_loop(args)
    profile = resolve_profile(args)
    comp = hannay.compare_frameworks(torus, loop, profile, args.simulate, args.circuits, args.panels)
    return ComparisonRecord.from_comparison(comp).to_json()


def run_knot_length(args) -> str:
    torus = resolve_torus(args)
    if args.panels < 2 or args.panels % 2:
        raise ConfigError("--panels must be even and >= 2")
    try:
        loop = Winding(args.p, args.q)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    quad = approx = None
    if args.method in ("quad", "both"):
        quad = loop_length(torus, loop, args.panels)
    if args.method in ("approx", "both"):
        approx = approx_knot_length(torus, args.p, args.q)
    return KnotLengthRecord(
        p=args.p,
        q=args.q,
        a=torus.a,
        c=r12(torus.c),
        panels=args.panels if quad is not None else None,
        quadrature=r12(quad),
        approximation=r12(approx),
    ).to_json()


COMMANDS = {
    "sigma-sweep": run_sigma_sweep,
    "transport": run_transport,
    "hannay": run_hannay,
    "berry-sim": run_berry_sim,
    "compare": run_compare,
    "knot-length": run_knot_length,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = COMMANDS[args.command](args)
    except (ConfigError, UnsupportedLoop, ZeroTangent) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateChart, DivergentAnholonomy, ArithmeticError) as exc:
        print(f"{parser.prog}: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out == "-":
        sys.stdout.write(text)
    else:
        write_atomic(args.out, text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
