"""GMRES, the two-sub-problem minimum-norm Newton step, and the Newton loop.

The linearized system J z = b is underdetermined: p equations, q = p + 3
unknowns.  Rather than forming J^T (J J^T)^{-1} b directly, the step is
computed from the column split J = [Js | Jr], where Js is square and obtained
by excluding the three swap columns of :func:`cglerpo.system.select_swap_columns`
(generically three coefficient columns, replaced by the phi/S/T columns).

Sub-problem 1 solves the four systems Js ztilde = btilde (three right-hand
sides are the excluded columns, one is b) with block-preconditioned GMRES;
the solves are independent and run on a thread pool.  Sub-problem 2 solves
(I + M M^T) y = c with M = Js^{-1} Jr and c = Js^{-1} b by unpreconditioned
GMRES; that matrix has at most four distinct eigenvalues, all >= 1, so the
solve needs at most four iterations.  The step z = (y; M^T y), scattered back
to canonical unknown order, is the minimum-norm solution of J z = b whenever
Js is nonsingular (premultiplication by Js^{-1} and column permutation both
preserve the solution set and the 2-norm).

GMRES is the full (non-restarted by default) modified Gram-Schmidt variant
with Givens rotations; convergence is declared on the left-preconditioned
relative residual.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import os

import numpy as np

from . import system as sysmod
from .system import StatePoint


@dataclass(frozen=True)
class GmresConfig:
    tol: float = 1e-9
    max_iter: int = 3000
    restart: int | None = None

    def __post_init__(self) -> None:
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be positive and max_iter >= 1")


@dataclass(frozen=True)
class NewtonConfig:
    max_iter: int = 10
    f_tol: float = 1e-7

    def __post_init__(self) -> None:
        if self.max_iter < 1 or self.f_tol <= 0:
            raise ValueError("NewtonConfig fields must be positive")


@dataclass
class GmresResult:
    x: np.ndarray
    iters: int
    converged: bool
    residual: float
    breakdown: bool = False


@dataclass
class StepReport:
    """Solver statistics for one bordered Newton step."""

    gmres_iters: tuple[int, int, int, int]
    b_iters: int
    step_norm: float
    success: bool
    degenerate_swap: bool = False

    @property
    def max_gmres_iters(self) -> int:
        return max(self.gmres_iters)


@dataclass
class NewtonResult:
    state: StatePoint
    converged: bool
    history: list[float]
    reports: list[StepReport] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.reports)


def gmres(apply, b, cfg: GmresConfig, precond=None) -> GmresResult:
    """Solve A x = b from x0 = 0; stop on ||M^-1 (b - A x)|| / ||M^-1 b|| <= tol."""
    b = np.asarray(b, dtype=float)
    n = b.size
    psolve = precond if precond is not None else (lambda r: r)
    pb = psolve(b)
    beta0 = np.linalg.norm(pb)
    if beta0 == 0.0:
        return GmresResult(np.zeros(n), 0, True, 0.0)

    x = np.zeros(n)
    total = 0
    cycle_cap = cfg.restart if cfg.restart is not None else cfg.max_iter
    breakdown = False

    while True:
        r = pb if total == 0 else psolve(b - apply(x))
        beta = np.linalg.norm(r)
        if beta / beta0 <= cfg.tol:
            return GmresResult(x, total, True, beta / beta0, breakdown)
        m = min(cycle_cap, cfg.max_iter - total, n)
        if m <= 0:
            return GmresResult(x, total, False, beta / beta0, breakdown)

        V = np.empty((m + 1, n))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        V[0] = r / beta
        g[0] = beta
        size = 0
        for j in range(m):
            # copy: the operator may return its input (or a view), and the
            # Gram-Schmidt updates below modify w in place
            w = np.array(psolve(apply(V[j])), dtype=float)
            for i in range(j + 1):  # modified Gram-Schmidt
                H[i, j] = V[i] @ w
                w -= H[i, j] * V[i]
            hj1 = np.linalg.norm(w)
            H[j + 1, j] = hj1
            total += 1
            size = j + 1
            happy = hj1 <= 1e-14 * beta0
            if not happy:
                V[j + 1] = w / hj1
            # previous Givens rotations on the new column
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            denom = np.hypot(H[j, j], H[j + 1, j])
            cs[j], sn[j] = (1.0, 0.0) if denom == 0.0 else (H[j, j] / denom, H[j + 1, j] / denom)
            H[j, j] = denom
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            res = abs(g[j + 1])
            if happy or res / beta0 <= cfg.tol:
                breakdown = breakdown or happy
                break

        y = np.linalg.lstsq(H[:size, :size], g[:size], rcond=None)[0] if size else np.zeros(0)
        x = x + y @ V[:size]
        res_est = abs(g[size]) if size else beta
        if res_est / beta0 <= cfg.tol or breakdown:
            pr = np.linalg.norm(psolve(b - apply(x))) / beta0
            return GmresResult(x, total, pr <= 10 * cfg.tol or pr <= 1e-12, pr, breakdown)
        if total >= cfg.max_iter or size >= n:
            pr = np.linalg.norm(psolve(b - apply(x))) / beta0
            return GmresResult(x, total, pr <= cfg.tol, pr, breakdown)
        # otherwise restart


def default_threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    return max(1, min(4, os.cpu_count() or 1))


def min_norm_step(apply_jac, b, jr_indices, q, gcfg: GmresConfig, precond=None,
                  executor: ThreadPoolExecutor | None = None,
                  degenerate: bool = False) -> tuple[np.ndarray, StepReport]:
    """Minimum-norm solution of the underdetermined system J z = b.

    ``apply_jac`` maps a q-vector to a p-vector, ``jr_indices`` are the three
    excluded unknown slots.  Returns the step in canonical unknown order.
    """
    b = np.asarray(b, dtype=float)
    p = b.size
    jr = list(jr_indices)
    if len(set(jr)) != 3:
        raise ValueError("need three distinct excluded columns")
    js = np.array(sorted(set(range(q)) - set(jr)), dtype=int)
    if js.size != p:
        raise ValueError(f"square block has {js.size} columns, expected {p}")

    def apply_js(y):
        v = np.zeros(q)
        v[js] = y
        return apply_jac(v)

    def column(idx):
        e = np.zeros(q)
        e[idx] = 1.0
        return apply_jac(e)

    rhs = [column(i) for i in jr] + [b]

    def solve(vec):
        return gmres(apply_js, vec, gcfg, precond=precond)

    if executor is None:
        sols = [solve(v) for v in rhs]
    else:
        sols = list(executor.map(solve, rhs))

    iters = tuple(s.iters for s in sols)
    if not all(s.converged for s in sols):
        return np.zeros(q), StepReport(iters, 0, 0.0, False, degenerate)

    M = np.column_stack([s.x for s in sols[:3]])
    c = sols[3].x

    def apply_b(y):
        return y + M @ (M.T @ y)

    # The spread of the at-most-four distinct eigenvalues of I + M M^T caps
    # the attainable relative residual near eps * (1 + ||M||^2); below that
    # the iteration only wobbles around its floor.
    b_tol = max(gcfg.tol, 4.0 * np.finfo(float).eps * (1.0 + np.sum(M * M)))
    bres = gmres(apply_b, c, GmresConfig(tol=b_tol, max_iter=gcfg.max_iter,
                                         restart=gcfg.restart))
    if not bres.converged:
        return np.zeros(q), StepReport(iters, bres.iters, 0.0, False, degenerate)

    z = np.zeros(q)
    z[js] = bres.x
    z[jr] = M.T @ bres.x
    return z, StepReport(iters, bres.iters, float(np.linalg.norm(z)), True, degenerate)


# ---------------------------------------------------------------------------
# generic bordered Newton iteration over a problem description

@dataclass
class BorderedProblem:
    """Callable bundle for one underdetermined root-finding problem.

    residual/jvp/precond/swap all take the current flat unknown vector x of
    length q; residual returns p = q - 3 entries.  ``accept`` decides
    convergence from the residual vector.
    """

    q: int
    residual: callable
    jvp: callable
    precond: callable
    swap: callable
    accept: callable


def solve_bordered(problem: BorderedProblem, x0: np.ndarray, ncfg: NewtonConfig,
                   gcfg: GmresConfig, threads: int | None = None):
    """Full-step Newton on an underdetermined system via minimum-norm steps.

    Returns (x, converged, history, reports); history holds the residual
    2-norms including the initial one.  A failed linear solve aborts the
    iteration and is reported through the last StepReport.
    """
    x = np.asarray(x0, dtype=float).copy()
    r = problem.residual(x)
    history = [float(np.linalg.norm(r))]
    reports: list[StepReport] = []
    if problem.accept(r):
        return x, True, history, reports

    nthreads = default_threads(threads)
    pool = ThreadPoolExecutor(max_workers=nthreads) if nthreads > 1 else None
    try:
        for _ in range(ncfg.max_iter):
            jr, degenerate = problem.swap(x)
            z, report = min_norm_step(
                lambda v: problem.jvp(x, v), -r, jr, problem.q, gcfg,
                precond=lambda rr: problem.precond(x, rr),
                executor=pool, degenerate=degenerate)
            reports.append(report)
            if not report.success:
                return x, False, history, reports
            x = x + z
            r = problem.residual(x)
            history.append(float(np.linalg.norm(r)))
            if problem.accept(r):
                return x, True, history, reports
        return x, False, history, reports
    finally:
        if pool is not None:
            pool.shutdown()


# ---------------------------------------------------------------------------
# StatePoint front ends

def _plain_problem(template: StatePoint, f_tol: float) -> BorderedProblem:
    cache: dict = {}

    def state_of(x):
        # one unpack per iterate; swap() warms the cache before threaded solves
        if cache.get("x") is not x:
            cache["x"] = x
            cache["s"] = sysmod.unpack_state(x, template)
        return cache["s"]

    def res(x):
        return sysmod.residual(state_of(x))

    def jac(x, v):
        return sysmod.jvp(state_of(x), v)

    def pre(x, r):
        return sysmod.precond_apply(state_of(x), r)

    def swap(x):
        sel = sysmod.select_swap_columns(state_of(x))
        return sel.indices, sel.degenerate

    return BorderedProblem(
        q=template.grid.n_unknowns, residual=res, jvp=jac, precond=pre, swap=swap,
        accept=lambda r: np.linalg.norm(r) <= f_tol)


def bordered_newton_step(s: StatePoint, b: np.ndarray, gcfg: GmresConfig | None = None,
                         threads: int | None = None) -> tuple[np.ndarray, StepReport]:
    """Minimum-norm solution of J(s) z = b in canonical unknown order."""
    gcfg = gcfg or GmresConfig()
    sel = sysmod.select_swap_columns(s)
    nthreads = default_threads(threads)
    pool = ThreadPoolExecutor(max_workers=nthreads) if nthreads > 1 else None
    try:
        return min_norm_step(
            lambda v: sysmod.jvp(s, v), b, sel.indices, s.grid.n_unknowns, gcfg,
            precond=lambda r: sysmod.precond_apply(s, r),
            executor=pool, degenerate=sel.degenerate)
    finally:
        if pool is not None:
            pool.shutdown()


def newton_solve(s0: StatePoint, ncfg: NewtonConfig | None = None,
                 gcfg: GmresConfig | None = None,
                 threads: int | None = None) -> NewtonResult:
    """Newton iteration s <- s + z with full steps; converges on ||F||_2 <= f_tol."""
    ncfg = ncfg or NewtonConfig()
    gcfg = gcfg or GmresConfig()
    problem = _plain_problem(s0, ncfg.f_tol)
    x, ok, hist, reports = solve_bordered(problem, sysmod.pack_state(s0), ncfg, gcfg, threads)
    return NewtonResult(sysmod.unpack_state(x, s0), ok, hist, reports)
