"""Command line front end.

    singroot run FILE [--tol T] [--perturb EPS --seed N] [--json]
    singroot bench [NAME ...] [--perturb EPS]
    singroot list

Exit codes: 0 converged, 2 parse or usage error, 3 breadth violation,
4 no convergence.
"""

import argparse
import json
import logging
import sys
import time

import numpy as np

from .errors import SingrootError
from .refiner import REFINER_TAU, RefinerConfig, refine, tolerance_at_root
from .systems import ParseError, corpus_names, format_number, load_corpus, load_system

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_BREADTH = 3
EXIT_NO_CONVERGENCE = 4

_STATUS_EXIT = {"converged": EXIT_OK, "breadth_violation": EXIT_BREADTH, "max_sweeps": EXIT_NO_CONVERGENCE}


def perturbed_guess(root, eps, seed):
    """``root + eps * u`` with ``u`` a seeded random real unit vector."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(np.asarray(root).size)
    return np.asarray(root, dtype=complex) + eps * u / np.linalg.norm(u)


def _tolerance(arg, sf):
    if arg != "auto":
        return float(arg)
    if sf.known_root is not None:
        try:
            return tolerance_at_root(sf.system, sf.known_root)
        except SingrootError:
            pass
    return REFINER_TAU


def _fmt_sci(v):
    return "-" if v is None else f"{v:.3e}"


def _fmt_digits(v):
    return "-" if v is None else f"{v:.1f}"


def format_report(sf, trace, tau, seconds):
    lines = []
    title = sf.name or "system"
    lines.append(f"{title}: t={sf.system.npolys} s={sf.system.nvars} tau={tau:.3g}")
    header = f"{'sweep':>5}  {'|F(x)|':>10}  {'sigma_n':>10}  {'mu':>3}  {'|delta|':>10}  {'digits':>6}  mode"
    lines.append(header)
    lines.append(f"{0:>5}  {trace.initial_residual:>10.3e}  {'-':>10}  {'-':>3}  {'-':>10}  {_fmt_digits(trace.initial_digits):>6}  start")
    for i, r in enumerate(trace.records, start=1):
        mu = "-" if r.mu is None else str(r.mu)
        delta = None if r.delta is None else abs(r.delta)
        mode = r.mode + (f" ({r.diagnostic})" if r.diagnostic and r.mode != "breadth-one" else "")
        lines.append(
            f"{i:>5}  {r.residual:>10.3e}  {_fmt_sci(r.sigma_n):>10}  {mu:>3}  {_fmt_sci(delta):>10}  {_fmt_digits(r.digits):>6}  {mode}"
        )
    lines.append("digits: " + " -> ".join(_fmt_digits(d) for d in trace.digits()))
    lines.append("x = (" + ", ".join(format_number(v, 15) for v in trace.x) + ")")
    lines.append(f"status: {trace.status} ({seconds:.3f} s)")
    return "\n".join(lines)


def _cplx(z):
    return [float(np.real(z)), float(np.imag(z))]


def report_dict(sf, trace, tau, seconds):
    return {
        "name": sf.name,
        "tau": tau,
        "status": trace.status,
        "seconds": seconds,
        "x0": [_cplx(v) for v in trace.x0],
        "initial_residual": trace.initial_residual,
        "initial_digits": trace.initial_digits,
        "sweeps": [
            {
                "x": [_cplx(v) for v in r.x],
                "residual": r.residual,
                "sigma_n": r.sigma_n,
                "mu": r.mu,
                "delta": None if r.delta is None else _cplx(r.delta),
                "digits": r.digits,
                "mode": r.mode,
                "diagnostic": r.diagnostic,
            }
            for r in trace.records
        ],
    }


def _initial_guess(sf, args):
    if args.perturb is not None:
        if sf.known_root is None:
            raise ParseError("--perturb needs a 'root:' line in the system file")
        return perturbed_guess(sf.known_root, args.perturb, args.seed)
    if sf.initial_guess is not None:
        return sf.initial_guess
    raise ParseError("no 'guess:' line; pass --perturb to start near the known root")


def _config(args, tau):
    return RefinerConfig(
        tau=tau,
        max_sweeps=args.max_sweeps,
        digits_target=args.digits_target,
        fallback_newton=args.fallback_newton,
    )


def run_one(sf, args, out):
    x0 = _initial_guess(sf, args)
    tau = _tolerance(args.tol, sf)
    t0 = time.perf_counter()
    trace = refine(sf.system, x0, _config(args, tau), known_root=sf.known_root)
    seconds = time.perf_counter() - t0
    if args.json:
        out.write(json.dumps(report_dict(sf, trace, tau, seconds), indent=2) + "\n")
    else:
        out.write(format_report(sf, trace, tau, seconds) + "\n")
    return _STATUS_EXIT.get(trace.status, EXIT_NO_CONVERGENCE)


def cmd_run(args, out):
    sf = load_system(args.file)
    if sf.name is None:
        sf.name = args.file
    return run_one(sf, args, out)


def cmd_bench(args, out):
    names = args.names or corpus_names()
    if args.perturb is None:
        args.perturb = 1e-2
    worst = EXIT_OK
    summaries = []
    for name in names:
        sf = load_corpus(name)
        code = run_one(sf, args, out)
        worst = max(worst, code)
        summaries.append((name, code))
        out.write("\n")
    if not args.json:
        for name, code in summaries:
            out.write(f"{name:<10} exit {code}\n")
    return worst


def cmd_list(args, out):
    for name in corpus_names():
        sf = load_corpus(name)
        out.write(f"{name:<10} t={sf.system.npolys} s={sf.system.nvars} mu={sf.expected_mu}\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="singroot", description="Refine breadth-one multiple roots of polynomial systems.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every sweep")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_refine_flags(p):
        p.add_argument("--tol", default="auto",
                       help="rank tolerance tau, or 'auto' to derive it from the known root (default)")
        p.add_argument("--max-sweeps", type=int, default=10)
        p.add_argument("--digits-target", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--perturb", type=float, default=None,
                       help="start at root + PERTURB * (seeded random unit vector)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--fallback-newton", dest="fallback_newton", action="store_true", default=True,
                       help="use a plain Newton step at regular points (default)")
        p.add_argument("--no-fallback-newton", dest="fallback_newton", action="store_false")

    p_run = sub.add_parser("run", help="refine the root of one system file")
    p_run.add_argument("file")
    add_refine_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_bench = sub.add_parser("bench", help="run the bundled benchmark systems")
    p_bench.add_argument("names", nargs="*", help="corpus names (default: all)")
    add_refine_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_list = sub.add_parser("list", help="list the bundled benchmark systems")
    p_list.set_defaults(func=cmd_list)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if hasattr(args, "tol") and args.tol != "auto":
            try:
                tau = float(args.tol)
            except ValueError:
                raise ParseError(f"--tol expects a number or 'auto', got {args.tol!r}") from None
            if not 0 < tau < 1:
                raise ParseError("--tol must lie in (0, 1)")
        return args.func(args, out)
    except (ParseError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
