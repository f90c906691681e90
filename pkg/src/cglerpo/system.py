"""Residual, Jacobian actions, and unknown-vector layout of the algebraic system.

A group-invariant solution A(x,t) = e^{i phi} A(x+S, t+T) of

    dA/dt = R A + (1 + i nu) A_xx - (1 + i mu) A |A|^2

is, after the space-time Galerkin projection, a root of

    F[m,n] = (i (2 pi n - phi - k_m S)/T - R + k_m^2 (1 + i nu)) ahat[m,n]
             + (1 + i mu) * conv3(ahat)[m,n]  = 0,

where conv3 is the triple convolution of :func:`cglerpo.spectral.cubic_conv`.
F has p = 2*(Nx-1)*(Nt-1) real components; the real unknown vector

    x = (Re a_0, Im a_0, Re a_1, Im a_1, ..., phi, S, T)

has q = p + 3 entries (coefficients in canonical order, m fastest).  The
system is underdetermined by exactly the dimension of its torus symmetry
group, whose infinitesimal generators supply three kernel vectors of the
Jacobian at any root.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .spectral import Grid, SpectralField, TWO_PI, _cubic_coef, unflatten

PRECOND_CLAMP = 1e-10
# Relative threshold below which a torus generator counts as linearly
# dependent on the previous ones.  Near-dependent generators poison the
# generator-peak column swap twice over: the square block's smallest
# singular value scales with the dependence residual, and the group columns
# it inserts are then nearly parallel vectors concentrated on the dominant
# modes, which scatters the preconditioned spectrum and stalls GMRES.  Such
# states are routed to the parameter-slot partition well before the
# dependence reaches round-off.
GENERATOR_DEP_TOL = 0.15

PHI_SLOT, S_SLOT, T_SLOT = 0, 1, 2  # offsets of the group unknowns past 2K


@dataclass(frozen=True)
class Parameters:
    """Equation parameters (R, nu, mu); R > 0 is the regime of interest."""

    R: float
    nu: float
    mu: float

    def __post_init__(self) -> None:
        if self.R <= 0:
            raise ValueError("R must be positive")

    def get(self, name: str) -> float:
        return getattr(self, _check_param(name))

    def with_value(self, name: str, value: float) -> "Parameters":
        return replace(self, **{_check_param(name): value})


def _check_param(name: str) -> str:
    if name not in ("R", "nu", "mu"):
        raise ValueError(f"unknown parameter {name!r} (expected R, nu or mu)")
    return name


@dataclass(frozen=True)
class GroupShift:
    """Generator (phi, S, T) of the invariance subgroup.

    phi is not wrapped to [0, 2 pi) during solves and S may drift outside
    [0, Lx); both are reduced only when reporting.
    """

    phi: float
    S: float
    T: float

    def __post_init__(self) -> None:
        if self.T <= 0:
            raise ValueError("T must be positive")


@dataclass
class StatePoint:
    """One candidate or converged solution: field + group element + parameters."""

    field: SpectralField
    shift: GroupShift
    params: Parameters

    @property
    def grid(self) -> Grid:
        return self.field.grid

    def copy(self) -> "StatePoint":
        return StatePoint(self.field.copy(), self.shift, self.params)


# ---------------------------------------------------------------------------
# real <-> complex packing

def interleave(z: np.ndarray) -> np.ndarray:
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def deinterleave(x: np.ndarray) -> np.ndarray:
    return x[0::2] + 1j * x[1::2]


def pack_state(s: StatePoint) -> np.ndarray:
    """StatePoint -> real unknown vector of length q = 2K + 3."""
    sh = s.shift
    return np.concatenate([interleave(s.field.flat()), [sh.phi, sh.S, sh.T]])


def unpack_state(x: np.ndarray, template: StatePoint) -> StatePoint:
    """Real unknown vector -> StatePoint with the template's grid/parameters."""
    grid = template.grid
    k2 = 2 * grid.n_modes
    coef = unflatten(grid, deinterleave(x[:k2]))
    phi, S, T = x[k2], x[k2 + 1], x[k2 + 2]
    return StatePoint(SpectralField(grid, coef), GroupShift(phi, S, T), template.params)


def apply_step(s: StatePoint, z: np.ndarray) -> StatePoint:
    return unpack_state(pack_state(s) + z, s)


# ---------------------------------------------------------------------------
# residual and Jacobian actions

def linear_multipliers(grid: Grid, shift: GroupShift, params: Parameters) -> np.ndarray:
    """Complex diagonal c[m,n] of the linear part (also the preconditioner blocks)."""
    if shift.T <= 0:
        raise ValueError("T must be positive")
    ks = grid.ks[:, None]
    ns = grid.ns[None, :]
    omega = (TWO_PI * ns - shift.phi - ks * shift.S) / shift.T
    return 1j * omega - params.R + ks**2 * (1.0 + 1j * params.nu)


def residual_complex(s: StatePoint) -> np.ndarray:
    a = s.field.coef
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite coefficients")
    c = linear_multipliers(s.grid, s.shift, s.params)
    return c * a + (1.0 + 1j * s.params.mu) * _cubic_coef(a, a, a, s.grid)


def residual(s: StatePoint) -> np.ndarray:
    """Real residual vector of length p = 2*(Nx-1)*(Nt-1)."""
    return interleave(residual_complex(s).ravel(order="F"))


def residual_norm(s: StatePoint) -> float:
    return float(np.linalg.norm(residual(s)))


def jvp(s: StatePoint, v: np.ndarray) -> np.ndarray:
    """Jacobian-vector product J(s) @ v for a full-length direction v.

    The coefficient block acts as the linear multiplier on vhat plus the
    variational cubic term (1 + i mu)(A^2 conj(V) + 2 |A|^2 V); the phi, S, T
    columns are analytic derivatives of the linear part.
    """
    grid, sh, p = s.grid, s.shift, s.params
    k2 = 2 * grid.n_modes
    if v.shape != (k2 + 3,):
        raise ValueError(f"direction length {v.shape} != ({k2 + 3},)")
    vhat = unflatten(grid, deinterleave(v[:k2]))
    dphi, dS, dT = v[k2], v[k2 + 1], v[k2 + 2]

    a = s.field.coef
    c = linear_multipliers(grid, sh, p)
    out = c * vhat
    out += (1.0 + 1j * p.mu) * (
        _cubic_coef(a, a, vhat, grid) + 2.0 * _cubic_coef(a, vhat, a, grid)
    )

    ks = grid.ks[:, None]
    ns = grid.ns[None, :]
    if dphi != 0.0:
        out += dphi * (-1j / sh.T) * a
    if dS != 0.0:
        out += dS * (-1j * ks / sh.T) * a
    if dT != 0.0:
        out += dT * (-1j * (TWO_PI * ns - sh.phi - ks * sh.S) / sh.T**2) * a
    return interleave(out.ravel(order="F"))


def param_column(s: StatePoint, which: str) -> np.ndarray:
    """Derivative of the residual with respect to one equation parameter."""
    _check_param(which)
    a = s.field.coef
    if which == "R":
        col = -a
    elif which == "nu":
        col = 1j * s.grid.ks[:, None] ** 2 * a
    else:
        col = 1j * _cubic_coef(a, a, a, s.grid)
    return interleave(col.ravel(order="F"))


def kernel_generators(s: StatePoint) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Torus-symmetry kernel vectors v1 = (i a), v2 = (i m a), v3 = (i n a).

    Split into real parts and padded with zero phi/S/T entries; they span
    ker J at a converged state (fewer dimensions at degenerate states such
    as single-mode fields, where v2 and v3 collapse onto v1 or vanish).
    """
    a = s.field.coef
    out = []
    for weight in (np.ones_like(a), s.grid.ms[:, None] + 0j, s.grid.ns[None, :] + 0j):
        gen = interleave((1j * weight * a).ravel(order="F"))
        out.append(np.concatenate([gen, np.zeros(3)]))
    return tuple(out)


def precond_apply(s: StatePoint, r: np.ndarray) -> np.ndarray:
    """Apply the inverse of the block-diagonal linear-part Jacobian.

    Each mode's 2x2 real block is multiplication by the complex multiplier
    c[m,n], so the inverse is complex division.  Blocks smaller than
    1e-10 of the largest are clamped in magnitude before inversion.
    """
    grid = s.grid
    c = linear_multipliers(grid, s.shift, s.params).ravel(order="F")
    mags = np.abs(c)
    floor = PRECOND_CLAMP * mags.max()
    small = mags < floor
    if np.any(small):
        c = c.copy()
        # keep phase where available; exact zeros clamp to the real floor
        phases = np.divide(c[small], mags[small],
                           out=np.ones(int(small.sum()), dtype=complex),
                           where=mags[small] > 0.0)
        c[small] = phases * floor
    return interleave(deinterleave(r) / c)


def modes_at_times(s: StatePoint, ts: np.ndarray) -> np.ndarray:
    """Evaluate the spatial-mode functions a_m(t) at arbitrary times.

    Returns an (Nx-1, len(ts)) array of
    a_m(t) = exp(-i (phi + k_m S) t / T) * sum_n ahat[m,n] exp(i 2 pi n t / T).
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    g, sh = s.grid, s.shift
    osc = np.exp(2j * np.pi * np.outer(g.ns, ts) / sh.T)
    inner = s.field.coef @ osc
    pref = np.exp(-1j * np.outer(sh.phi + g.ks * sh.S, ts) / sh.T)
    return pref * inner


# The coefficient block acts on the torus generators as J_a v1 = i F,
# J_a v2 = (i m F), J_a v3 = (i n F), so it is only near-singular when the
# residual is small.  Above this relative residual level the group columns
# themselves are excluded (the coefficient block is kept whole, which keeps
# the preconditioned spectrum clustered); below it the generator-peak swap
# takes over to cover the emerging kernel.
KERNEL_SWAP_TOL = 1e-3


@dataclass(frozen=True)
class SwapColumns:
    """Columns to exclude from the square Jacobian block.

    ``indices`` address the real unknown vector: values < 2K are coefficient
    columns, 2K/2K+1/2K+2 are the phi/S/T columns.  ``degenerate`` marks
    states where fewer than three independent torus-generator directions
    exist (single-mode or m=0-supported fields).
    """

    indices: tuple[int, int, int]
    degenerate: bool


def _greedy_peak(vec: np.ndarray, taken: set) -> int:
    order = np.argsort(-np.abs(vec), kind="stable")
    for idx in order:
        if int(idx) not in taken:
            return int(idx)
    raise RuntimeError("no free column left")


def select_swap_columns(s: StatePoint) -> SwapColumns:
    """Choose the three columns whose exclusion keeps the square block invertible.

    Far from a solution the excluded columns are phi, S, T (the coefficient
    block is safely nonsingular there).  Near a solution the torus generators
    span the emerging kernel of the coefficient block, and the columns at
    their largest-magnitude entries are excluded, greedily skipping
    already-chosen indices; the group columns take their places.  When a
    generator is linearly dependent on the previous ones, the matching group
    column is itself dependent (the translation/time columns are scalar
    multiples of v2/v3 combinations) and stays excluded instead.
    """
    a = s.field.flat()
    scale = np.abs(a).max()
    if scale == 0.0:
        raise ValueError("swap selection undefined for the zero field")
    k2 = 2 * a.size

    c = linear_multipliers(s.grid, s.shift, s.params).ravel(order="F")
    fnorm = np.linalg.norm(residual_complex(s))
    gap = fnorm / (np.linalg.norm(a) * np.median(np.abs(c)))
    if gap > KERNEL_SWAP_TOL:
        return SwapColumns((k2 + PHI_SLOT, k2 + S_SLOT, k2 + T_SLOT), False)

    gens = [1j * a,
            1j * (s.grid.ms[:, None] + 0j).repeat(s.grid.n_n, axis=1).ravel(order="F") * a,
            1j * (s.grid.ns[None, :] + 0j).repeat(s.grid.n_m, axis=0).ravel(order="F") * a]

    taken: set = set()
    indices: list[int] = []
    degenerate = False
    basis: list[np.ndarray] = []
    param_slot = {1: k2 + S_SLOT, 2: k2 + T_SLOT}
    for j, g in enumerate(gens):
        perp = g.copy()
        for b in basis:
            perp -= np.vdot(b, perp) * b
        nrm = np.linalg.norm(perp)
        if nrm > GENERATOR_DEP_TOL * max(np.linalg.norm(g), np.linalg.norm(a)):
            basis.append(perp / nrm)
            indices.append(_greedy_peak(interleave(g), taken))
        else:
            # generator adds no direction; keep its group column excluded
            degenerate = True
            indices.append(param_slot[j])
        taken.add(indices[-1])
    return SwapColumns(tuple(indices), degenerate)
