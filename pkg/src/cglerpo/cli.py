"""Command-line surface.

Subcommands: refine, continue, classify, monodromy, integrate, spectrum,
orbit-compare.  Exit codes: 0 success, 2 parse failure, 3 no convergence,
4 continuation stall.  Worker count comes from --threads, then the
RPO_THREADS environment variable, then the core count.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import dynamics, symmetry
from .continuation import ContinuationConfig, run
from .fileio import PathCsvWriter, SolutionFormatError, read_solution, spectrum_csv, write_solution
from .newton import GmresConfig, NewtonConfig, newton_solve
from .spectral import decay_ratio
from .system import residual_norm

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_STALL = 4


def _threads(value) -> int | None:
    if value is not None:
        return value
    env = os.environ.get("RPO_THREADS")
    return int(env) if env else None


def _load(path):
    try:
        return read_solution(path)
    except SolutionFormatError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return None
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def cli_refine(args) -> int:
    s = _load(args.input)
    if s is None:
        return EXIT_PARSE
    res = newton_solve(
        s, NewtonConfig(f_tol=args.newton_tol),
        GmresConfig(tol=args.gmres_tol, max_iter=args.gmres_maxit),
        threads=_threads(args.threads))
    for i, h in enumerate(res.history):
        print(f"newton iter {i}: |F| = {h:.6e}", file=sys.stderr)
    if not res.converged:
        print("error: Newton did not converge", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    write_solution(args.output, res.state)
    print(f"converged in {res.iterations} iterations, |F| = {res.history[-1]:.3e}")
    return EXIT_OK


def cli_continue(args) -> int:
    s = _load(args.input)
    if s is None:
        return EXIT_PARSE
    r0 = residual_norm(s)
    if r0 > args.newton_tol:
        print(f"error: input not converged (|F| = {r0:.3e})", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    os.makedirs(args.out_dir, exist_ok=True)
    ds0 = min(args.ds0, args.ds_max)
    cfg = ContinuationConfig(param=args.param, target=args.target, ds0=ds0,
                             ds_max=args.ds_max, ds_min=min(args.ds_min, ds0),
                             max_steps=args.max_steps)
    writer = PathCsvWriter(os.path.join(args.out_dir, "path.csv"))

    def on_accept(record, point, step):
        name = f"step_{step.index:04d}.rpo"
        write_solution(os.path.join(args.out_dir, name), point)
        writer.write_step(point, step, name)

    try:
        rec = run(s, cfg, NewtonConfig(f_tol=args.newton_tol),
                  GmresConfig(tol=args.gmres_tol, max_iter=args.gmres_maxit),
                  threads=_threads(args.threads), on_accept=on_accept)
    finally:
        writer.close()
    print(f"accepted {len(rec.steps)} steps, rejections {rec.rejections}")
    if rec.reached_target:
        return EXIT_OK
    print("error: continuation stalled; partial path preserved", file=sys.stderr)
    return EXIT_STALL


def cli_classify(args) -> int:
    s = _load(args.file)
    if s is None:
        return EXIT_PARSE
    rep = symmetry.detect_reflection(s, tol=args.tol)
    try:
        rep.l_symmetry = symmetry.detect_l_symmetry(s.field, tol=args.tol)
    except ValueError:
        pass
    print(f"l_symmetry: {rep.l_symmetry}")
    print(f"even_center: {rep.even_center}")
    print(f"odd_center: {rep.odd_center}")
    print(f"reflect_shift: {rep.reflect_shift}")
    print(f"flags: {symmetry.flags_string(rep) or 'none'}")
    return EXIT_OK


def cli_monodromy(args) -> int:
    s = _load(args.file)
    if s is None:
        return EXIT_PARSE
    mono = dynamics.relative_monodromy(s, steps=args.steps)
    for ev in mono.eigenvalues:
        print(f"{ev.real:+.12e} {ev.imag:+.12e} {abs(ev):.12e}")
    print(f"unstable_dimension: {mono.unstable_dimension}")
    print(f"unit_count: {mono.unit_count}")
    return EXIT_OK


def cli_integrate(args) -> int:
    s = _load(args.file)
    if s is None:
        return EXIT_PARSE
    res = dynamics.closure_residual(s, steps=args.steps)
    print(f"closure_residual: {res:.6e}")
    return EXIT_OK


def cli_spectrum(args) -> int:
    s = _load(args.file)
    if s is None:
        return EXIT_PARSE
    spectrum_csv(s.field, sys.stdout)
    print(f"# decay_ratio: {decay_ratio(s.field):.6e}", file=sys.stderr)
    return EXIT_OK


def cli_orbit_compare(args) -> int:
    s1 = _load(args.file)
    s2 = _load(args.file2)
    if s1 is None or s2 is None:
        return EXIT_PARSE
    rel = symmetry.same_orbit(s1, s2, tol=args.tol)
    print(f"verdict: {rel.verdict}")
    if rel.element is not None:
        a, sh, tau = rel.element
        print(f"element: alpha={a:.12g} s={sh:.12g} tau={tau:.12g}")
        print(f"mismatch: {rel.mismatch:.3e}")
    return EXIT_OK


def _add_common_solver(p):
    p.add_argument("--newton-tol", type=float, default=1e-7)
    p.add_argument("--gmres-tol", type=float, default=1e-9)
    p.add_argument("--gmres-maxit", type=int, default=3000)
    p.add_argument("--threads", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cglerpo",
                                 description="invariant solutions of the cubic "
                                             "complex Ginzburg-Landau equation")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("refine", help="Newton-refine a solution file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    _add_common_solver(p)
    p.set_defaults(func=cli_refine)

    p = sub.add_parser("continue", help="arclength continuation in one parameter")
    p.add_argument("--input", required=True)
    p.add_argument("--param", required=True, choices=["R", "nu", "mu"])
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--ds0", type=float, default=0.02)
    p.add_argument("--ds-max", type=float, default=0.5)
    p.add_argument("--ds-min", type=float, default=1e-4)
    p.add_argument("--max-steps", type=int, default=500)
    _add_common_solver(p)
    p.set_defaults(func=cli_continue)

    p = sub.add_parser("classify", help="detect extra symmetries")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cli_classify)

    p = sub.add_parser("monodromy", help="relative monodromy spectrum")
    p.add_argument("file")
    p.add_argument("--steps", type=int, default=2048)
    p.set_defaults(func=cli_monodromy)

    p = sub.add_parser("integrate", help="time-integration closure residual")
    p.add_argument("file")
    p.add_argument("--steps", type=int, default=2048)
    p.set_defaults(func=cli_integrate)

    p = sub.add_parser("spectrum", help="spatial/temporal power spectra as CSV")
    p.add_argument("file")
    p.set_defaults(func=cli_spectrum)

    p = sub.add_parser("orbit-compare", help="same orbit / conjugate / distinct")
    p.add_argument("file")
    p.add_argument("file2")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cli_orbit_compare)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
