"""Torus actions, reflection conjugacy, extra-symmetry detection, orbit tests.

The algebraic system is invariant under the three-torus acting on the
coefficients as ahat[m,n] -> exp(i(alpha + m s + n tau)) ahat[m,n]; two
states solving it are "the same solution" when they lie on one torus orbit.
The spatial reflection x -> -x maps a solution to a conjugate one with
S -> Lx - S; solutions may additionally be invariant under rotated copies of
that reflection (even/odd about a centre, possibly combined with a half-period
time shift), and under l-fold shift-rotate symmetries that leave only every
l-th spatial mode populated.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .spectral import SpectralField, TWO_PI
from .system import GroupShift, StatePoint, modes_at_times

CONJUGATE_DROP_TOL = 1e-10
DISTINCT_POINT_TOL = 0.05

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def torus_act(f: SpectralField, alpha: float, s: float, tau: float) -> SpectralField:
    """Multiply ahat[m,n] by exp(i(alpha + m*s + n*tau))."""
    g = f.grid
    phase = np.exp(1j * (alpha + np.add.outer(g.ms * s, g.ns * tau)))
    return SpectralField(g, phase * f.coef)


def conjugate(s: StatePoint) -> StatePoint:
    """Spatial-reflection conjugate: ahat[m,n] <- ahat[-m,n-m], S <- Lx - S.

    The temporal shift compensates the wavenumber-dependent prefactor picked
    up when the reflected solution is rewritten with the complementary space
    translation, so the residual norm is preserved exactly.  Source entries
    whose shifted index leaves the retained range must be below 1e-10.
    """
    g = s.grid
    coef = s.field.coef
    Mt = g.Nt // 2 - 1
    mm, nn = np.meshgrid(g.ms, g.ns, indexing="ij")
    lost = np.abs(nn - mm) > Mt
    bad = np.abs(coef[lost])
    if bad.size and bad.max() > CONJUGATE_DROP_TOL:
        raise ValueError(
            f"conjugate would drop coefficient of magnitude {bad.max():.3e} "
            f"(> {CONJUGATE_DROP_TOL:g}); refine the grid first")
    out = np.zeros_like(coef)
    src_n = nn - mm
    valid = np.abs(src_n) <= Mt
    out[valid] = coef[-mm[valid] + (g.Nx // 2 - 1), src_n[valid] + Mt]
    sh = s.shift
    return StatePoint(SpectralField(g, out),
                      GroupShift(sh.phi, g.Lx - sh.S, sh.T), s.params)


def detect_l_symmetry(f: SpectralField, tol: float = 1e-6) -> int | None:
    """Largest l >= 2 with the mode power confined to m = -1 (mod l)."""
    spatial = (np.abs(f.coef) ** 2).sum(axis=1)
    total = spatial.sum()
    if total == 0.0:
        raise ValueError("l-symmetry undefined for the zero field")
    ms = f.grid.ms
    for l in range(f.grid.Nx // 2, 1, -1):
        off = spatial[(ms + 1) % l != 0].sum()
        if off <= tol * total:
            return l
    return None


@dataclass
class SymmetryReport:
    """Extra symmetries verified on the collocation grid at ``tol``."""

    l_symmetry: int | None = None
    even_center: float | None = None
    odd_center: float | None = None
    reflect_shift: tuple[float, float, float] | None = None
    tol: float = 1e-6

    def any(self) -> bool:
        return any(v is not None for v in
                   (self.l_symmetry, self.even_center, self.odd_center, self.reflect_shift))


def _golden_min(fun, lo, hi, iters=60):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
    x = (a + b) / 2
    return x, fun(x)


def detect_reflection(s: StatePoint, tol: float = 1e-6) -> SymmetryReport:
    """Search for even/odd centres and the reflect-with-time-shift symmetry.

    The mode functions a_m(t) are sampled over one period; a candidate
    reflection about x = c' with time shift Tt maps them to
    exp(-2 i k_m c') a_{-m}(t + Tt).  Centres are scanned on the Nx
    collocation offsets and refined by golden section; the phase of the
    general form is fitted by least squares.  Detection applies on the
    invariant subspaces S = 0 or Lx/2 (mod Lx); outside them the report is
    empty, as is it for fields with no symmetry at ``tol``.
    """
    report = SymmetryReport(tol=tol)
    g, sh = s.grid, s.shift
    s_red = sh.S % g.Lx
    dist = min(s_red, abs(s_red - g.Lx / 2), abs(s_red - g.Lx))
    if dist > tol:
        return report
    if s.field.norm() == 0.0:
        return report

    nt = 2 * (g.Nx + g.Nt)
    ts = sh.T * np.arange(nt) / nt
    U = modes_at_times(s, ts)
    unorm = np.linalg.norm(U)
    V_by_shift = {0.0: U[::-1, :], 0.5: modes_at_times(s, ts + sh.T / 2)[::-1, :]}

    def reflected(c_half, half_period):
        # target row m reads a_{-m}(t + Tt) with phase exp(-2 i k_m c')
        phase = np.exp(-2j * g.ks * c_half)[:, None]
        return phase * V_by_shift[half_period]

    def mismatch(c_half, half_period, mode):
        V = reflected(c_half, half_period)
        if mode == "even":
            return np.linalg.norm(U - V) / unorm, 0.0
        if mode == "odd":
            return np.linalg.norm(U + V) / unorm, np.pi
        ip = np.vdot(V, U)
        ph = ip / abs(ip) if abs(ip) > 0 else 1.0
        return np.linalg.norm(U - ph * V) / unorm, float(np.angle(ph))

    centers = g.Lx * np.arange(g.Nx) / g.Nx
    half = g.Lx / g.Nx

    def best_center(half_period, mode):
        coarse = [mismatch(c, half_period, mode)[0] for c in centers]
        c0 = centers[int(np.argmin(coarse))]
        c, val = _golden_min(lambda cc: mismatch(cc, half_period, mode)[0],
                             c0 - half, c0 + half)
        return c, val

    def reduce_center(c, period):
        r = c % period
        return 0.0 if min(r, period - r) < 1e-9 else r

    c_even, v_even = best_center(0.0, "even")
    if v_even <= tol:
        report.even_center = reduce_center(c_even, g.Lx / 2)
    c_odd, v_odd = best_center(0.0, "odd")
    if v_odd <= tol:
        report.odd_center = reduce_center(c_odd, g.Lx / 2)

    # general reflect-shift form, preferring the genuinely new detections
    for half_period in (0.5, 0.0):
        c_gen, v_gen = best_center(half_period, "free")
        if v_gen > tol:
            continue
        _, phase = mismatch(c_gen, half_period, "free")
        if half_period == 0.0:
            ang = abs((phase + np.pi) % TWO_PI - np.pi)
            if ang < 1e-3 or abs(ang - np.pi) < 1e-3:
                continue  # already covered by even/odd
        report.reflect_shift = (phase % TWO_PI, reduce_center(2 * c_gen, g.Lx),
                                half_period * sh.T)
        break
    return report


def flags_string(report: SymmetryReport) -> str:
    """Compact path-record rendering, e.g. ``l=2,even@0.785,odd@2.356``."""
    parts = []
    if report.l_symmetry is not None:
        parts.append(f"l={report.l_symmetry}")
    if report.even_center is not None:
        parts.append(f"even@{report.even_center:.4g}")
    if report.odd_center is not None:
        parts.append(f"odd@{report.odd_center:.4g}")
    if report.reflect_shift is not None:
        ph, c, tt = report.reflect_shift
        parts.append(f"refl(phi={ph:.4g},c={c:.4g},dT={tt:.4g})")
    return ",".join(parts)


@dataclass
class OrbitRelation:
    """Outcome of a torus-orbit comparison between two states."""

    verdict: str  # same_orbit | conjugate_orbits | distinct
    element: tuple[float, float, float] | None
    mismatch: float


def _act_flat(flat, ms, ns, g):
    alpha, s, tau = g
    return np.exp(1j * (alpha + ms * s + ns * tau)) * flat


def _align_fields(f1: SpectralField, f2: SpectralField, tol: float):
    """Find (alpha, s, tau) with act(f1) = f2, or None.

    Primary: phases of three large-magnitude anchors whose index vectors
    (1, m, n) are independent, enumerating the 2 pi lattice classes of the
    integer system.  Fallback for degenerate supports: torus grid scan plus
    a phase-unwrapped least-squares polish.
    """
    g = f1.grid
    c1, c2 = f1.flat(), f2.flat()
    ms = np.repeat(g.ms[:, None], g.n_n, axis=1).ravel(order="F")
    ns = np.repeat(g.ns[None, :], g.n_m, axis=0).ravel(order="F")
    scale = max(np.linalg.norm(c1), np.linalg.norm(c2))
    if scale == 0.0:
        return (0.0, 0.0, 0.0), 0.0
    if abs(np.linalg.norm(c1) - np.linalg.norm(c2)) > tol * scale:
        return None

    def verify(el):
        return np.linalg.norm(_act_flat(c1, ms, ns, el) - c2) / scale

    mag = np.minimum(np.abs(c1), np.abs(c2))
    anchors = [int(i) for i in np.argsort(-mag, kind="stable")[:12]
               if mag[i] > 0.05 * mag.max()]
    d = np.angle(c2[anchors]) - np.angle(c1[anchors]) if anchors else np.zeros(0)

    best = None
    triples = []
    for tri in combinations(range(len(anchors)), 3):
        B = np.array([[1.0, ms[anchors[i]], ns[anchors[i]]] for i in tri])
        det = round(np.linalg.det(B))
        if det != 0:
            triples.append((abs(det), tri, B))
    triples.sort(key=lambda t: t[0])
    for adet, tri, B in triples[:6]:
        rhs = d[list(tri)]
        for k1 in range(adet):
            for k2 in range(adet):
                for k3 in range(adet):
                    el = np.linalg.solve(B, rhs + TWO_PI * np.array([k1, k2, k3]))
                    mis = verify(el)
                    if best is None or mis < best[1]:
                        best = (tuple(el % TWO_PI), mis)
        if best is not None and best[1] <= tol:
            return best

    # grid fallback: coarse (s, tau) scan, alpha by least-squares phase,
    # then unwrapped linear polish over the anchor phases
    weights = np.abs(c1) * np.abs(c2)
    for si in range(2 * g.Nx):
        for ti in range(2 * g.Nt):
            sv = TWO_PI * si / (2 * g.Nx)
            tv = TWO_PI * ti / (2 * g.Nt)
            rot = _act_flat(c1, ms, ns, (0.0, sv, tv))
            ip = np.vdot(rot, c2)
            al = float(np.angle(ip)) if abs(ip) > 0 else 0.0
            mis = verify((al, sv, tv))
            if best is None or mis < best[1]:
                best = ((al % TWO_PI, sv, tv), mis)
    if best is not None and anchors:
        el0 = np.array(best[0])
        pred = el0[0] + ms[anchors] * el0[1] + ns[anchors] * el0[2]
        resid = (d - pred + np.pi) % TWO_PI - np.pi
        A = np.column_stack([np.ones(len(anchors)), ms[anchors], ns[anchors]])
        w = weights[anchors] ** 0.5
        delta = np.linalg.lstsq(A * w[:, None], resid * w, rcond=None)[0]
        el = tuple((el0 + delta) % TWO_PI)
        mis = verify(el)
        if mis < best[1]:
            best = (el, mis)
    if best is not None and best[1] <= tol:
        return best
    return None


def _shifts_match(a: GroupShift, b: GroupShift, Lx: float, tol: float) -> bool:
    dphi = abs((a.phi - b.phi + np.pi) % TWO_PI - np.pi)
    dS = abs((a.S - b.S + Lx / 2) % Lx - Lx / 2)
    return dphi <= tol and dS <= tol and abs(a.T - b.T) <= tol


def same_orbit(s1: StatePoint, s2: StatePoint, tol: float = 1e-6) -> OrbitRelation:
    """Classify two states as one orbit, conjugate orbits, or distinct."""
    if s1.grid != s2.grid:
        raise ValueError("states live on different grids")
    Lx = s1.grid.Lx
    if _shifts_match(s1.shift, s2.shift, Lx, tol):
        hit = _align_fields(s1.field, s2.field, tol)
        if hit is not None:
            return OrbitRelation("same_orbit", hit[0], hit[1])
    try:
        sc = conjugate(s2)
    except ValueError:
        sc = None
    if sc is not None and _shifts_match(s1.shift, sc.shift, Lx, tol):
        hit = _align_fields(s1.field, sc.field, tol)
        if hit is not None:
            return OrbitRelation("conjugate_orbits", hit[0], hit[1])
    return OrbitRelation("distinct", None, float("inf"))


def count_distinct(points, threshold: float = DISTINCT_POINT_TOL) -> int:
    """Greedy count of parameter triples separated by at least ``threshold``."""
    reps: list[np.ndarray] = []
    for p in points:
        p = np.asarray(p, dtype=float)
        if all(np.linalg.norm(p - r) >= threshold for r in reps):
            reps.append(p)
    return len(reps)
