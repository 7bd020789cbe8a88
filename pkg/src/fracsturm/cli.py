"""Command-line front end.

    fracsturm solve --alpha 1.5 --potential "2*x*(x+1)" --size 320 --eigs 10
    fracsturm convergence --alpha 0.5,1.0 --potential "2*x*(x+1)" --degree 2

Exit status: 0 on success, 2 on usage errors, 1 when a computation fails.
"""

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from .expr import ParseError, parse
from .harness import StudyConfig, run_study
from .jacobi import check_alpha
from .potential import potential_model
from .solver import DEFAULT_TRUST_FRACTION, SolveRequest, solve

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

STUDIES = ("convergence", "index-growth", "mean-asymptote", "well-asymptote", "coeff-decay")

# per-study defaults: sizes and indices (None lets the study pick)
DEFAULTS = {
    "convergence": ("40,80,160,320,640", "5,10,15,20"),
    "index-growth": ("320", None),
    "mean-asymptote": ("1000", None),
    "well-asymptote": ("1000", "10-100"),
    "coeff-decay": ("640", "5,10,25"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x):
    """Shortest round-trip text for a float (at most 17 significant digits)."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _int_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            try:
                out.extend(range(int(lo), int(hi) + 1))
            except ValueError:
                raise argparse.ArgumentTypeError(f"bad range {part!r}") from None
            continue
        try:
            out.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected integers, got {part!r}") from None
    return out


def _float_list(text):
    try:
        return [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def build_parser():
    parser = _Parser(prog="fracsturm", description="Fractional Sturm-Liouville eigenvalues by a Jacobi-Galerkin method.")
    parser.add_argument("--version", action="version", version=f"fracsturm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--potential", default="zero", help='expression in x, or "zero"')
        p.add_argument("--degree", type=int, help="Legendre degree L of the potential (default: automatic)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", help="output path (default: standard output)")

    p = sub.add_parser("solve", help="eigenpairs at one size")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--size", type=_positive_int, default=128)
    p.add_argument("--eigs", type=_positive_int, default=10, help="number of eigenvalues (k_max+1)")
    p.add_argument("--trust-fraction", type=float, default=DEFAULT_TRUST_FRACTION,
                   help="flags eigenvalues with k >= fraction*N as untrusted; values are unaffected")
    common(p)

    for name in STUDIES:
        p = sub.add_parser(name, help=f"{name} study")
        p.add_argument("--alpha", type=_float_list, required=True, help="comma-separated orders")
        p.add_argument("--sizes", type=_int_list, help="comma-separated sizes")
        p.add_argument("--size", type=_positive_int, help="single size (studies at fixed N)")
        p.add_argument("--ref-size", type=_positive_int, help="reference size N_true (default 2*max size)")
        p.add_argument("--ks", type=_int_list, help="indices, comma list or lo-hi range")
        p.add_argument("--jobs", type=_positive_int, default=1)
        common(p)
    return parser


def _check_potential(args):
    """The potential text, or None for the zero potential; parse errors are usage errors."""
    if args.potential.strip() == "zero":
        if args.degree is not None:
            raise UsageError("--degree needs a non-zero potential")
        return None
    try:
        parse(args.potential)
    except ParseError as exc:
        raise UsageError(f"bad potential: {exc}") from None
    if args.degree is not None and not 0 <= args.degree <= 128:
        raise UsageError("degree must lie in 0..128")
    return args.potential


def _open(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def write_solution(sol, model, out, kind):
    if kind == "json":
        doc = {
            "meta": {
                "alpha": sol.alpha,
                "N": sol.N,
                "L": None if model is None else model.L,
                "N_true": None,
                "mean": 0.0 if model is None else model.mean,
                "version": __version__,
            },
            "eigenvalues": [
                {"k": k, "lambda": float(lam), "residual": float(res), "trusted": bool(t)}
                for k, (lam, res, t) in enumerate(zip(sol.lambdas, sol.residuals, sol.trusted))
            ],
        }
        json.dump(doc, out, indent=2)
        out.write("\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["k", "lambda", "residual", "trusted"])
    for k, (lam, res, t) in enumerate(zip(sol.lambdas, sol.residuals, sol.trusted)):
        w.writerow([k, fmt(lam), fmt(res), fmt(bool(t))])


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_json_safe(v) for v in obj]
    return obj


def write_report(report, out, kind):
    if kind == "json":
        json.dump(_json_safe(report.to_dict()), out, indent=2)
        out.write("\n")
        return
    w = csv.writer(out, lineterminator="\n")
    if report.kind == "coeff-decay":
        w.writerow(["alpha", "k", "n", "c", "c_hat"])
        for r in report.rows:
            w.writerow([fmt(r.alpha), r.k, r.n, fmt(r.coeff), fmt(r.predicted)])
        for (a, k), (lo, hi) in report.extra["ratio_range"].items():
            out.write(f"# ratio alpha={fmt(a)} k={k} min={fmt(lo)} max={fmt(hi)}\n")
    else:
        w.writerow(["alpha", "k", "N", "error"])
        for r in report.rows:
            w.writerow([fmt(r.alpha), r.k, r.N, fmt(r.error)])
    for f in report.fits:
        k = "all" if f.k is None else f.k
        tail = "" if f.reliable else " unreliable"
        if f.note:
            tail += f" note={f.note.replace(' ', '_')}"
        out.write(f"# fit alpha={fmt(f.alpha)} k={k} exponent={fmt(f.exponent)} residual={fmt(f.residual)}{tail}\n")


def _study_config(args):
    sizes_default, ks_default = DEFAULTS[args.command]
    if args.sizes is not None and args.size is not None:
        raise UsageError("give either --sizes or --size, not both")
    sizes = args.sizes if args.sizes is not None else ([args.size] if args.size else _int_list(sizes_default))
    if args.command != "convergence" and len(sizes) != 1:
        raise UsageError(f"{args.command} runs at a single size")
    ks = args.ks if args.ks is not None else (_int_list(ks_default) if ks_default else [])
    for a in args.alpha:
        check_alpha(a)
    if args.command == "well-asymptote" and args.potential.strip() != "zero":
        raise UsageError("well-asymptote uses the zero potential")
    potential = _check_potential(args)
    try:
        return StudyConfig(
            tuple(args.alpha), potential, tuple(ks), tuple(sizes), args.ref_size, args.degree, args.format, args.jobs
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def run(argv=None):
    """Execute one subcommand; returns the exit status."""
    try:
        args = build_parser().parse_args(argv)
        if args.command == "solve":
            check_alpha(args.alpha)
            if args.eigs > args.size:
                raise UsageError("--eigs must not exceed --size")
            if not 0.0 < args.trust_fraction <= 1.0:
                raise UsageError("trust fraction must lie in (0,1]")
            potential = _check_potential(args)
        else:
            cfg = _study_config(args)
    except (UsageError, ValueError) as exc:
        print(f"fracsturm: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "solve":
            model = None if potential is None else potential_model(potential, L=args.degree)
            result = solve(SolveRequest(args.alpha, args.size, args.eigs - 1, model, args.trust_fraction))
        else:
            result = run_study(args.command, cfg)
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"fracsturm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL

    out, close = _open(args.output)
    try:
        if args.command == "solve":
            write_solution(result, model, out, args.format)
        else:
            write_report(result, out, args.format)
    finally:
        if close:
            out.close()
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
