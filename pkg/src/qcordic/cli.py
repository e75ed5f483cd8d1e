"""Command-line front end.

Exit codes: 0 success, 2 argument errors (argparse), 3 out-of-range input,
4 fixed-point overflow, 5 I/O failure.  All behavior is controlled by flags;
no environment variables are consulted.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .fixed import FixedPointOverflowError, quantize, to_hex, to_real
from .harness import (monte_carlo_mse, export_rom, report_to_json, run_table1,
                      sweep_bits, table1_to_csv)
from .pipeline import (angle_format, build_rom, format_trace, pipeline_rotate,
                       pipeline_vector, xy_format)
from .reference import ConvergenceRangeError, Mode, PROFILES, convergence_range

EXIT_RANGE = 3
EXIT_OVERFLOW = 4
EXIT_IO = 5


def _profile(args):
    return PROFILES[args.profile]


def _cmd_rotate(args) -> int:
    params = _profile(args)
    bound = convergence_range(params)
    if not abs(args.theta) <= bound:
        raise ConvergenceRangeError(
            f"theta {args.theta!r} outside convergence range +-{bound!r}")
    thq = quantize(args.theta, angle_format(params), params.rounding)
    cos_out, sin_out, trace = pipeline_rotate(thq, params)
    print(f"theta_quantized {to_real(thq)!r}")
    print(f"cos {to_real(cos_out)!r} {to_hex(cos_out)}")
    print(f"sin {to_real(sin_out)!r} {to_hex(sin_out)}")
    if any(trace.saturated):
        which = [n for n, f in zip(("cos", "sin"), trace.saturated) if f]
        print(f"saturated {' '.join(which)}")
    if args.trace:
        sys.stdout.write(format_trace(trace))
    return 0


def _cmd_vector(args) -> int:
    params = _profile(args)
    fmt = xy_format(params)
    try:
        vx = quantize(args.x, fmt, params.rounding)
        vy = quantize(args.y, fmt, params.rounding)
    except FixedPointOverflowError as exc:
        # bad user input, not a datapath headroom failure
        raise ConvergenceRangeError(str(exc)) from None
    angle, magnitude, _ = pipeline_vector(vx, vy, params)
    print(f"angle {to_real(angle)!r} {to_hex(angle)}")
    print(f"magnitude {to_real(magnitude)!r} {to_hex(magnitude)}")
    return 0


def _cmd_table1(args) -> int:
    rows = run_table1(_profile(args))
    text = table1_to_csv(rows, paper_format=args.paper_format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _fmt(v: float) -> str:
    return repr(v)


def _cmd_mse(args) -> int:
    params = _profile(args)
    report = monte_carlo_mse(params, args.trials, args.seed,
                             workers=args.workers)
    t = report.theoretical
    print(f"trials {report.trials} seed {report.seed} profile {args.profile}")
    print(f"empirical_mse {_fmt(report.empirical_mse)}")
    print(f"angle_mse {_fmt(t.angle_mse)}")
    print(f"scaling_mse {_fmt(t.scaling_mse)}")
    print(f"rounding_mse {_fmt(t.rounding_mse)}")
    print(f"theoretical_total {_fmt(t.total_mse)}")
    print("rounding_closed_form_vs_propagated_ratio "
          f"{_fmt(report.rounding_closed_form_vs_propagated_ratio)}")
    print(f"saturated_outputs {report.saturated_outputs}")
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(report_to_json(report))
    return 0


def _cmd_sweep(args) -> int:
    try:
        bits = [int(tok) for tok in args.bits.split(",") if tok.strip()]
    except ValueError:
        print(f"error: --bits expects a comma-separated integer list, "
              f"got {args.bits!r}", file=sys.stderr)
        return 2
    if not bits:
        print("error: --bits list is empty", file=sys.stderr)
        return 2
    params = _profile(args)
    results = sweep_bits(params, bits, args.trials, args.seed,
                         workers=args.workers)
    lines = ["frac_bits,empirical_mse,angle_mse,scaling_mse,rounding_mse,"
             "total_mse"]
    for b, rep in results:
        t = rep.theoretical
        lines.append(f"{b},{_fmt(rep.empirical_mse)},{_fmt(t.angle_mse)},"
                     f"{_fmt(t.scaling_mse)},{_fmt(t.rounding_mse)},"
                     f"{_fmt(t.total_mse)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_export_rom(args) -> int:
    for path in export_rom(_profile(args), args.out):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcordic",
        description="Fixed-point CORDIC rotator and error-analysis harness")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_profile(p):
        p.add_argument("--profile", choices=sorted(PROFILES),
                       default="paper",
                       help="parameter profile (default: paper)")

    p = sub.add_parser("rotate", help="rotate the unit vector by an angle")
    p.add_argument("--theta", type=float, required=True,
                   help="rotation angle in radians")
    add_profile(p)
    p.add_argument("--trace", action="store_true",
                   help="dump per-stage state as hex words")
    p.set_defaults(func=_cmd_rotate)

    p = sub.add_parser("vector", help="angle and magnitude of a vector")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    add_profile(p)
    p.set_defaults(func=_cmd_vector)

    p = sub.add_parser("table1", help="replicate the published angle table")
    p.add_argument("--paper-format", action="store_true",
                   help="render 4 decimal places with explicit signs")
    p.add_argument("--out", help="write CSV here instead of stdout")
    add_profile(p)
    p.set_defaults(func=_cmd_table1)

    p = sub.add_parser("mse", help="Monte Carlo error vs theory")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--json", help="also write the full report as JSON here")
    p.add_argument("--workers", type=int, default=1,
                   help="worker processes (result-invariant)")
    add_profile(p)
    p.set_defaults(func=_cmd_mse)

    p = sub.add_parser("sweep", help="Monte Carlo across fractional widths")
    p.add_argument("--bits", required=True,
                   help="comma-separated fractional bit widths, e.g. 8,12,15")
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="write CSV here instead of stdout")
    add_profile(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("export-rom", help="write the constant tables as hex")
    p.add_argument("--out", required=True, help="destination directory")
    add_profile(p)
    p.set_defaults(func=_cmd_export_rom)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except FixedPointOverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
