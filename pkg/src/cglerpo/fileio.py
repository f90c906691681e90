"""Text persistence for solutions and continuation paths.

Solution file, line oriented::

    RPO1
    Lx <v>
    params <R> <nu> <mu>
    group <phi> <S> <T>
    grid <Nx> <Nt>
    coef <m> <n> <re> <im>     x (Nx-1)(Nt-1) lines, canonical order

Reals carry 17 significant digits, so a write/read round trip reproduces
doubles bit-exactly.  Path CSV rows are written and flushed one accepted
step at a time; a crashed run leaves a parseable file.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .continuation import PathRecord, PathStep
from .spectral import Grid, SpectralField
from .system import GroupShift, Parameters, StatePoint

MAGIC = "RPO1"

PATH_CSV_HEADER = [
    "step", "param", "R", "nu", "mu", "phi", "S", "T",
    "field_norm", "residual_norm", "newton_iters", "gmres_max_iters",
    "symmetry", "solution_file",
]


class SolutionFormatError(ValueError):
    """Parse failure with the 1-based line number attached."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def write_solution(path, s: StatePoint) -> None:
    g = s.grid
    with open(path, "w") as fh:
        fh.write(MAGIC + "\n")
        fh.write(f"Lx {_fmt(g.Lx)}\n")
        fh.write(f"params {_fmt(s.params.R)} {_fmt(s.params.nu)} {_fmt(s.params.mu)}\n")
        fh.write(f"group {_fmt(s.shift.phi)} {_fmt(s.shift.S)} {_fmt(s.shift.T)}\n")
        fh.write(f"grid {g.Nx} {g.Nt}\n")
        coef = s.field.coef
        for ni, n in enumerate(g.ns):
            for mi, m in enumerate(g.ms):
                z = coef[mi, ni]
                fh.write(f"coef {m} {n} {_fmt(z.real)} {_fmt(z.imag)}\n")


def _expect(fields, count, line_no, what):
    if len(fields) != count:
        raise SolutionFormatError(line_no, f"expected {what}")


def read_solution(path) -> StatePoint:
    with open(path) as fh:
        lines = fh.read().splitlines()

    def get(i):
        if i >= len(lines):
            raise SolutionFormatError(len(lines) + 1, "unexpected end of file")
        return lines[i].split()

    if not lines or lines[0].strip() != MAGIC:
        raise SolutionFormatError(1, f"missing {MAGIC} magic header")

    def parse(line_no, fields, key, count, build):
        _expect(fields, count, line_no, f"{key} line with {count - 1} values")
        if fields[0] != key:
            raise SolutionFormatError(line_no, f"expected {key} line")
        try:
            return build(fields[1:])
        except ValueError as exc:
            raise SolutionFormatError(line_no, str(exc)) from exc

    Lx = parse(2, get(1), "Lx", 2, lambda v: float(v[0]))
    params = parse(3, get(2), "params", 4,
                   lambda v: Parameters(float(v[0]), float(v[1]), float(v[2])))
    shift = parse(4, get(3), "group", 4,
                  lambda v: GroupShift(float(v[0]), float(v[1]), float(v[2])))
    grid = parse(5, get(4), "grid", 3, lambda v: Grid(int(v[0]), int(v[1]), Lx))

    coef = np.zeros((grid.n_m, grid.n_n), dtype=complex)
    need = grid.n_modes
    for k in range(need):
        line_no = 6 + k
        f = get(5 + k)
        _expect(f, 5, line_no, "coef <m> <n> <re> <im>")
        if f[0] != "coef":
            raise SolutionFormatError(line_no, "expected coef line")
        try:
            m, n = int(f[1]), int(f[2])
            val = complex(float(f[3]), float(f[4]))
        except ValueError as exc:
            raise SolutionFormatError(line_no, str(exc)) from exc
        if abs(m) > grid.Nx // 2 - 1 or abs(n) > grid.Nt // 2 - 1:
            raise SolutionFormatError(line_no, f"mode ({m}, {n}) out of range")
        coef[m + grid.Nx // 2 - 1, n + grid.Nt // 2 - 1] = val
    return StatePoint(SpectralField(grid, coef), shift, params)


class PathCsvWriter:
    """Appends one CSV row per accepted continuation step, flushing each."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(PATH_CSV_HEADER)
        self._fh.flush()

    def write_step(self, state: StatePoint, step: PathStep, solution_file: str = "") -> None:
        p, sh = state.params, state.shift
        self._writer.writerow([
            step.index, step.param, _fmt(p.R), _fmt(p.nu), _fmt(p.mu),
            _fmt(sh.phi), _fmt(sh.S), _fmt(sh.T),
            _fmt(state.field.norm()), _fmt(step.residual_norm),
            step.newton_iters, step.gmres_max_iters,
            step.flags, solution_file,
        ])
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def spectrum_csv(f: SpectralField, out: io.TextIOBase) -> None:
    """Two power arrays as CSV rows (kind, index, power)."""
    from .spectral import power_spectra

    spatial, temporal = power_spectra(f)
    w = csv.writer(out)
    w.writerow(["kind", "index", "power"])
    for m, v in zip(f.grid.ms, spatial):
        w.writerow(["spatial", m, _fmt(v)])
    for n, v in zip(f.grid.ns, temporal):
        w.writerow(["temporal", n, _fmt(v)])
