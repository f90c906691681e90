"""Pseudo-arclength continuation of invariant solutions over one parameter.

Predictor: secant extrapolation in the joint space of the unknown vector and
the active parameter value, normalized to unit arclength (pure parameter
perturbation on the first step).  Corrector: minimum-norm Newton on the
augmented system

    [ F(x, lambda) ; tangent . ((x, lambda) - (x, lambda)_base) - ds ] = 0,

which has one more equation and one more unknown than the plain system, so
the unknown surplus stays three and the bordered step machinery applies
unchanged.  The appended arclength equation permits turning points: the
parameter may reverse along the path while the cumulative arclength grows.

Step control: accepted steps grow ds by ``grow`` up to ``ds_max``; failed
correctors shrink it by ``shrink`` and retry, down to ``ds_min`` (stall).
When the predictor would cross the target value the run lands exactly on it
by a fixed-parameter Newton solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import newton as newtmod
from . import symmetry as symmod
from . import system as sysmod
from .newton import BorderedProblem, GmresConfig, NewtonConfig, solve_bordered
from .system import StatePoint

ARCLENGTH_TOL = 1e-9


@dataclass(frozen=True)
class ContinuationConfig:
    param: str
    target: float
    ds0: float = 0.02
    ds_max: float = 0.5
    ds_min: float = 1e-4
    grow: float = 1.3
    shrink: float = 0.5
    max_steps: int = 500

    def __post_init__(self) -> None:
        if not (0 < self.ds_min <= self.ds0 <= self.ds_max):
            raise ValueError("need 0 < ds_min <= ds0 <= ds_max")
        if self.grow < 1.0 or not (0 < self.shrink < 1.0) or self.max_steps < 1:
            raise ValueError("bad step-control settings")


@dataclass
class PathStep:
    index: int
    param: str
    value: float
    ds: float
    newton_iters: int
    gmres_max_iters: int
    b_iters_max: int
    residual_norm: float
    flags: str


@dataclass
class PathRecord:
    param: str
    points: list[StatePoint] = field(default_factory=list)
    steps: list[PathStep] = field(default_factory=list)
    stalled: bool = False
    reached_target: bool = False
    rejections: int = 0

    def values(self) -> np.ndarray:
        return np.array([p.params.get(self.param) for p in self.points])


@dataclass
class CorrectorStats:
    success: bool
    newton_iters: int
    residual_norm: float
    arclength_residual: float
    gmres_max_iters: int
    b_iters_max: int


def _joint(s: StatePoint, param: str) -> np.ndarray:
    return np.append(sysmod.pack_state(s), s.params.get(param))


def _state_from_joint(X: np.ndarray, template: StatePoint, param: str) -> StatePoint:
    s = sysmod.unpack_state(X[:-1], template)
    return StatePoint(s.field, s.shift, template.params.with_value(param, float(X[-1])))


def predict(prev: StatePoint, cur: StatePoint, ds: float, param: str) -> StatePoint:
    """Secant predictor; coincident inputs fall back to a pure parameter step."""
    Xp, Xc = _joint(prev, param), _joint(cur, param)
    if not (np.all(np.isfinite(Xp)) and np.all(np.isfinite(Xc))):
        raise ValueError("non-finite continuation points")
    sec = Xc - Xp
    nrm = np.linalg.norm(sec)
    if nrm == 0.0:
        tangent = np.zeros_like(Xc)
        tangent[-1] = 1.0
    else:
        tangent = sec / nrm
    return _state_from_joint(Xc + ds * tangent, cur, param)


def _augmented_problem(template: StatePoint, param: str, tangent: np.ndarray,
                       X_base: np.ndarray, ds: float, f_tol: float) -> BorderedProblem:
    q0 = template.grid.n_unknowns
    cache: dict = {}

    def state_of(X):
        if cache.get("X") is not X:
            cache["X"] = X
            cache["s"] = _state_from_joint(X, template, param)
        return cache["s"]

    def res(X):
        st = state_of(X)
        arc = tangent @ (X - X_base) - ds
        return np.append(sysmod.residual(st), arc)

    def jac(X, V):
        st = state_of(X)
        row = sysmod.jvp(st, V[:q0]) + V[-1] * sysmod.param_column(st, param)
        return np.append(row, tangent @ V)

    def pre(X, r):
        return np.append(sysmod.precond_apply(state_of(X), r[:-1]), r[-1])

    def swap(X):
        sel = sysmod.select_swap_columns(state_of(X))
        return sel.indices, sel.degenerate

    def accept(r):
        return (np.linalg.norm(r[:-1]) <= f_tol) and (abs(r[-1]) <= ARCLENGTH_TOL)

    return BorderedProblem(q=q0 + 1, residual=res, jvp=jac, precond=pre,
                           swap=swap, accept=accept)


def correct(pred: StatePoint, prev: StatePoint, ds: float, param: str,
            ncfg: NewtonConfig | None = None, gcfg: GmresConfig | None = None,
            threads: int | None = None) -> tuple[StatePoint, CorrectorStats]:
    """Minimum-norm Newton on the augmented system; the predictor seeds it.

    The unit tangent is recovered from (pred - prev)/ds, which is exactly the
    secant direction the predictor stepped along.
    """
    ncfg = ncfg or NewtonConfig()
    gcfg = gcfg or GmresConfig()
    if ds == 0.0:
        return prev, CorrectorStats(True, 0, sysmod.residual_norm(prev), 0.0, 0, 0)
    X_base = _joint(prev, param)
    X_pred = _joint(pred, param)
    tangent = (X_pred - X_base) / ds
    problem = _augmented_problem(pred, param, tangent, X_base, ds, ncfg.f_tol)
    try:
        x, ok, hist, reports = solve_bordered(problem, X_pred, ncfg, gcfg, threads)
    except ValueError:
        # an iterate left the admissible set (T <= 0, R <= 0, non-finite);
        # report a failed step so the caller shrinks ds instead of aborting
        return pred, CorrectorStats(False, 0, float("inf"), float("inf"), 0, 0)
    state = _state_from_joint(x, pred, param)
    r = problem.residual(x)
    stats = CorrectorStats(
        success=ok,
        newton_iters=len(reports),
        residual_norm=float(np.linalg.norm(r[:-1])),
        arclength_residual=float(abs(r[-1])),
        gmres_max_iters=max((rp.max_gmres_iters for rp in reports), default=0),
        b_iters_max=max((rp.b_iters for rp in reports), default=0),
    )
    return state, stats


def _land_on_target(cur: StatePoint, tangent: np.ndarray, cfg: ContinuationConfig,
                    ncfg, gcfg, threads):
    """Fixed-parameter Newton solve exactly at the target value."""
    lam = cur.params.get(cfg.param)
    X = _joint(cur, cfg.param)
    if abs(tangent[-1]) > 1e-12:
        X = X + ((cfg.target - lam) / tangent[-1]) * tangent
    guess = sysmod.unpack_state(X[:-1], cur)
    guess = StatePoint(guess.field, guess.shift,
                       cur.params.with_value(cfg.param, cfg.target))
    return newtmod.newton_solve(guess, ncfg, gcfg, threads)


def _flags(state: StatePoint) -> str:
    try:
        rep = symmod.detect_reflection(state)
        rep.l_symmetry = symmod.detect_l_symmetry(state.field)
    except ValueError:
        return ""
    return symmod.flags_string(rep)


def run(s0: StatePoint, cfg: ContinuationConfig, ncfg: NewtonConfig | None = None,
        gcfg: GmresConfig | None = None, threads: int | None = None,
        on_accept=None) -> PathRecord:
    """Predict/correct loop from a converged starting point to the target.

    Every accepted point satisfies ||F|| <= f_tol at its own parameters and is
    appended to the record (parameter revisits across turning points
    included).  ``on_accept(record, point, step)`` streams rows out as they
    are produced.
    """
    ncfg = ncfg or NewtonConfig()
    gcfg = gcfg or GmresConfig()
    r0 = sysmod.residual_norm(s0)
    if r0 > ncfg.f_tol:
        raise ValueError(f"starting point is not converged (||F|| = {r0:.3e})")

    record = PathRecord(param=cfg.param, points=[s0])
    lam0 = s0.params.get(cfg.param)
    if cfg.target == lam0:
        record.reached_target = True
        return record
    direction = 1.0 if cfg.target > lam0 else -1.0

    prev, cur = s0, s0
    ds = cfg.ds0 * direction  # sign only matters for the first (secant-free) step
    first = True
    while len(record.steps) < cfg.max_steps:
        try:
            pred = predict(prev, cur, ds, cfg.param)
        except ValueError:
            # extrapolation left the admissible set (T <= 0 or R <= 0)
            record.rejections += 1
            ds = cfg.shrink * abs(ds) * (direction if first else 1.0)
            if abs(ds) < cfg.ds_min:
                record.stalled = True
                return record
            continue
        lam_cur = cur.params.get(cfg.param)
        lam_pred = pred.params.get(cfg.param)
        crossing = (lam_pred - cfg.target) * (lam_cur - cfg.target) <= 0.0

        if crossing:
            Xc, Xp = _joint(cur, cfg.param), _joint(pred, cfg.param)
            tangent = (Xp - Xc) / ds
            try:
                res = _land_on_target(cur, tangent, cfg, ncfg, gcfg, threads)
            except ValueError:
                res = None
            if res is not None and res.converged:
                step = PathStep(len(record.steps), cfg.param, cfg.target, abs(ds),
                                res.iterations,
                                max((r.max_gmres_iters for r in res.reports), default=0),
                                max((r.b_iters for r in res.reports), default=0),
                                res.history[-1], _flags(res.state))
                record.points.append(res.state)
                record.steps.append(step)
                record.reached_target = True
                if on_accept:
                    on_accept(record, res.state, step)
                return record
        else:
            new_state, stats = correct(pred, cur, ds, cfg.param, ncfg, gcfg, threads)
            if stats.success:
                step = PathStep(len(record.steps), cfg.param,
                                new_state.params.get(cfg.param), abs(ds),
                                stats.newton_iters, stats.gmres_max_iters,
                                stats.b_iters_max, stats.residual_norm,
                                _flags(new_state))
                record.points.append(new_state)
                record.steps.append(step)
                if on_accept:
                    on_accept(record, new_state, step)
                prev, cur = cur, new_state
                ds = min(cfg.grow * abs(ds), cfg.ds_max)
                first = False
                continue

        record.rejections += 1
        ds = cfg.shrink * abs(ds) * (direction if first else 1.0)
        if abs(ds) < cfg.ds_min:
            record.stalled = True
            return record
    return record
