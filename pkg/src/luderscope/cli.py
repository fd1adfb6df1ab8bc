"""Command-line entry point: ``luderscope {discriminate,scan-trine,scan-noisy,advantage,verify}``."""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import qobjects, scan, verify
from .errors import EnsembleFormatError, LuderscopeError, SolverError
from .tester import discriminate, validate_tester

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2


class InputError(Exception):
    pass


def _range(text, n_parts=2):
    try:
        parts = [float(x) for x in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    if len(parts) != n_parts:
        raise argparse.ArgumentTypeError(f"expected {n_parts} ':'-separated numbers, got {text!r}")
    return tuple(parts)


def _steps(text):
    lo, hi, n = _range(text, 3)
    if n < 1 or n != int(n):
        raise argparse.ArgumentTypeError(f"step count must be a positive integer, got {n}")
    return lo, hi, int(n)


def _priors(text):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad priors {text!r}")


def _dump(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_discriminate(args):
    priors, povms = qobjects.load_ensemble(args.input)
    if args.priors is not None:
        if len(args.priors) != len(povms):
            raise InputError(f"{len(args.priors)} priors given for {len(povms)} POVMs")
        priors = args.priors
    e, tester, report = discriminate(povms, priors, args.mode)
    if report.status != "optimal":
        raise SolverError(f"solver did not certify optimality: {report.to_json()}")
    tr = validate_tester(tester, e.d_out)
    _dump(
        {
            "mode": args.mode,
            "success": round(report.primal_value, 12),
            "distance": round(max(0.0, 4 * (report.primal_value - 0.5)), 12) if len(povms) == 2 else None,
            "sdp": report.to_dict(),
            "tester": {
                "positivity": tr.positivity,
                "normalization": tr.normalization,
                "sigma_positivity": tr.sigma_positivity,
                "sigma_trace": tr.sigma_trace,
                "ok": tr.ok,
            },
            "choi": [
                {
                    "dims": list(c.dims),
                    "cp_residual": c.cp_residual(),
                    "tp_residual": c.tp_residual(),
                    "valid": c.is_valid(),
                }
                for c in e.chois
            ],
        }
    )
    return EXIT_OK


def _scan(args, family):
    second = args.phi if family == "trine" else args.p
    try:
        cfg = scan.ScanConfig(
            family,
            grid_n=args.grid,
            theta_range=args.theta,
            second_axis_range=second,
            mode=args.mode,
            output_path=args.out,
            format=args.format,
            emit_heatmap=args.heatmap,
            level_spacing=args.spacing,
        )
    except ValueError as exc:
        raise InputError(str(exc))
    if not Path(args.out).resolve().parent.is_dir():
        raise InputError(f"output directory for {args.out} does not exist")
    rows = scan.run_scan(cfg)
    try:
        written = scan.write_outputs(rows, cfg)
    except OSError as exc:
        raise InputError(f"cannot write output: {exc}")
    bad = scan.row_violations(rows)
    flagged = [r for r in rows if r.flag]
    for path in written:
        print(path)
    if bad:
        print(f"{len(bad)} rows violate 1/2 <= p_meas <= p_inst", file=sys.stderr)
    if flagged:
        print(f"{len(flagged)} grid points flagged by the solver", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_advantage(args):
    lo, hi, n = args.p
    rows = scan.advantage_curve(args.theta, np.linspace(lo, hi, n))
    fields = ("axis2", "p_meas", "p_inst", "advantage", "sequential_advantage")
    print("p,p_meas,p_inst,advantage,sequential_advantage")
    for row in rows:
        print(",".join("" if row[f] is None else f"{row[f]:.9g}" for f in fields))
    return EXIT_SOLVER if any(row["flag"] for row in rows) else EXIT_OK


def cmd_verify(args):
    results = verify.run_all(mutation=args.mutation)
    return EXIT_OK if all(r.passed for r in results) else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="luderscope", description="Optimal discrimination of quantum measurements and their Lüders instruments."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("discriminate", help="solve one ensemble given as JSON")
    d.add_argument("--input", required=True)
    d.add_argument("--mode", choices=("measurement", "instrument"), required=True)
    d.add_argument("--priors", type=_priors)
    d.set_defaults(func=cmd_discriminate)

    for family, second in (("trine", "phi"), ("noisy", "p")):
        s = sub.add_parser(f"scan-{family}", help=f"grid scan over the {family} family")
        s.add_argument("--grid", type=int, default=50)
        s.add_argument("--theta", type=_range)
        s.add_argument(f"--{second}", type=_range)
        s.add_argument("--mode", choices=("measurement", "instrument", "both"), default="both")
        s.add_argument("--out", required=True)
        s.add_argument("--format", choices=("csv", "json"), default="csv")
        s.add_argument("--heatmap", action="store_true")
        s.add_argument("--spacing", type=float, help="heatmap level spacing")
        s.set_defaults(func=lambda a, f=family: _scan(a, f))

    a = sub.add_parser("advantage", help="advantage curve along p at fixed theta")
    a.add_argument("--family", choices=("noisy",), default="noisy")
    a.add_argument("--theta", type=float, default=0.0)
    a.add_argument("--p", type=_steps, required=True)
    a.set_defaults(func=cmd_advantage)

    v = sub.add_parser("verify", help="run every analytic-vs-SDP cross-check")
    v.add_argument("--mutation", action="store_true", help="perturb the oracles; some checks must fail")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EnsembleFormatError as exc:
        out = {"error": str(exc)}
        if exc.report is not None:
            out["report"] = exc.report.to_dict()
        print(json.dumps(out), file=sys.stderr)
        return EXIT_INPUT
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except LuderscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
