"""Time integration of the truncated mode ODEs, closure checks, monodromy.

The spatial Galerkin truncation turns the PDE into

    da_m/dt = R a_m - k_m^2 (1 + i nu) a_m
              - (1 + i mu) sum_{m1+m2-m3=m} a_{m1} a_{m2} conj(a_{m3}),

whose invariant solutions close after one period up to the group element:
a_m(0) = e^{i phi} e^{i k_m S} a_m(T).  The integrator is fourth-order
exponential time differencing with the stiff diagonal linear part handled by
its exact exponential; the phi-function coefficients are evaluated by
contour averaging, which is stable for small |L h| (mean over a circle of an
analytic function equals its centre value).

The relative monodromy composes the linearized time-T flow with the group
action; eigenvalues of magnitude above one count the unstable dimension, and
each continuous symmetry direction of the orbit contributes a unit-magnitude
eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import Grid, SpectralField, TWO_PI
from .system import GroupShift, Parameters, StatePoint, modes_at_times

BLOWUP_NORM = 1e8
UNIT_EIG_TOL = 1e-6
_CONTOUR_POINTS = 32


@dataclass
class OdeState:
    """Spatial-mode vector a_m at one instant; modes ordered by m ascending."""

    values: np.ndarray
    t: float = 0.0
    Lx: float = TWO_PI

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 1 or self.values.size % 2 == 0:
            raise ValueError("mode vector must have odd length Nx-1")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("mode vector must be finite")

    @property
    def ks(self) -> np.ndarray:
        half = self.values.size // 2
        return TWO_PI * np.arange(-half, half + 1) / self.Lx


@dataclass
class MonodromyResult:
    eigenvalues: np.ndarray
    unstable_dimension: int
    unit_count: int
    matrix: np.ndarray | None = None


def _spatial_cubic(values: np.ndarray) -> np.ndarray:
    """Triple convolution sum a a conj(a) over retained spatial modes."""
    n = values.size
    half = n // 2
    P = 2 * (n + 1)
    pad = np.zeros(P, dtype=complex)
    idx = np.arange(-half, half + 1) % P
    pad[idx] = values
    phys = np.fft.ifft(pad) * P
    prod = phys * phys * np.conj(phys)
    return (np.fft.fft(prod) / P)[idx]


def ode_rhs(a: OdeState, p: Parameters) -> np.ndarray:
    ks = a.ks
    lin = (p.R - ks**2 * (1.0 + 1j * p.nu)) * a.values
    return lin - (1.0 + 1j * p.mu) * _spatial_cubic(a.values)


def _etdrk4_coeffs(L: np.ndarray, h: float):
    """Exponential factors and phi-function weights for step size h."""
    z0 = h * L
    # full unit circle: the linear part is complex, so the half-circle trick
    # for real spectra does not apply
    pts = np.exp(2j * np.pi * (np.arange(_CONTOUR_POINTS) + 0.5) / _CONTOUR_POINTS)
    z = z0[:, None] + pts[None, :]
    ez = np.exp(z)
    f0 = h * ((np.exp(z / 2.0) - 1.0) / z).mean(axis=1)
    f1 = h * ((-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z**3).mean(axis=1)
    f2 = h * ((2.0 + z + ez * (z - 2.0)) / z**3).mean(axis=1)
    f3 = h * ((-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z**3).mean(axis=1)
    return np.exp(z0), np.exp(z0 / 2.0), f0, f1, f2, f3


def integrate(a0: OdeState, p: Parameters, t_end: float, steps: int = 2048) -> OdeState:
    """ETDRK4 integration of the truncated mode system over t_end."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    ks = a0.ks
    L = p.R - ks**2 * (1.0 + 1j * p.nu)
    h = t_end / steps
    E, E2, f0, f1, f2, f3 = _etdrk4_coeffs(L, h)
    w = 1.0 + 1j * p.mu

    def nl(u):
        return -w * _spatial_cubic(u)

    u = a0.values.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(steps):
            n0 = nl(u)
            ua = E2 * u + f0 * n0
            na = nl(ua)
            ub = E2 * u + f0 * na
            nb = nl(ub)
            uc = E2 * ua + f0 * (2.0 * nb - n0)
            nc = nl(uc)
            u = E * u + f1 * n0 + 2.0 * f2 * (na + nb) + f3 * nc
            nrm = np.linalg.norm(u)
            if not np.isfinite(nrm) or nrm > BLOWUP_NORM:
                raise RuntimeError(f"integration blew up (norm > {BLOWUP_NORM:g})")
    return OdeState(u, a0.t + t_end, a0.Lx)


def closure_residual(s: StatePoint, steps: int = 2048) -> float:
    """Relative gap between rho(g) a(T) and a(0) for the reconstructed orbit.

    a_m(0) is the sum over n of the space-time coefficients; the state is
    integrated over one period and pulled back by the group action
    a_m -> e^{i phi} e^{i k_m S} a_m.
    """
    a0 = s.field.coef.sum(axis=1)
    start = OdeState(a0, 0.0, s.grid.Lx)
    end = integrate(start, s.params, s.shift.T, steps)
    pulled = np.exp(1j * (s.shift.phi + start.ks * s.shift.S)) * end.values
    denom = np.linalg.norm(a0)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(pulled - a0) / denom)


def relative_monodromy(s: StatePoint, steps: int = 2048) -> MonodromyResult:
    """Eigenvalues of the group action composed with the linearized flow.

    The variational equation
        dV_m/dt = (R - k_m^2 (1 + i nu)) V_m
                  - (1 + i mu) (A^2 conj(V) + 2 |A|^2 V)_m
    is integrated along the exactly reconstructed orbit for the 2*(Nx-1)
    real basis directions (batched as matrix columns; the flow is linear so
    columns evolve independently).  Unstable dimension counts |lambda| >
    1 + 1e-6; unit eigenvalues lie within 1e-6 of magnitude one.
    """
    g = s.grid
    nm = g.n_m
    T = s.shift.T
    h = T / steps

    # orbit samples at all half-steps, in physical space on the padded grid
    ts = h * np.arange(2 * steps + 1) / 2.0
    modes = modes_at_times(s, ts)
    P = 2 * (nm + 1)
    idx = np.arange(-(nm // 2), nm // 2 + 1) % P
    pad = np.zeros((P, ts.size), dtype=complex)
    pad[idx, :] = modes
    orbit = np.fft.ifft(pad, axis=0) * P
    orbit_sq = orbit * orbit
    orbit_abs2 = (orbit * np.conj(orbit)).real

    ks = TWO_PI * np.arange(-(nm // 2), nm // 2 + 1) / g.Lx
    L = s.params.R - ks**2 * (1.0 + 1j * s.params.nu)
    E, E2, f0, f1, f2, f3 = _etdrk4_coeffs(L, h)
    w = 1.0 + 1j * s.params.mu

    def nl(V, j):
        # j indexes the half-step time grid
        padv = np.zeros((P, V.shape[1]), dtype=complex)
        padv[idx, :] = V
        phys = np.fft.ifft(padv, axis=0) * P
        prod = orbit_sq[:, j:j + 1] * np.conj(phys) + 2.0 * orbit_abs2[:, j:j + 1] * phys
        return -w * (np.fft.fft(prod, axis=0) / P)[idx, :]

    V = np.hstack([np.eye(nm, dtype=complex), 1j * np.eye(nm, dtype=complex)])
    Ec, E2c, f0c = E[:, None], E2[:, None], f0[:, None]
    f1c, f2c, f3c = f1[:, None], f2[:, None], f3[:, None]
    for k in range(steps):
        j = 2 * k
        n0 = nl(V, j)
        Va = E2c * V + f0c * n0
        na = nl(Va, j + 1)
        Vb = E2c * V + f0c * na
        nb = nl(Vb, j + 1)
        Vc = E2c * Va + f0c * (2.0 * nb - n0)
        nc = nl(Vc, j + 2)
        V = Ec * V + f1c * n0 + 2.0 * f2c * (na + nb) + f3c * nc
        if not np.all(np.isfinite(V)):
            raise RuntimeError("variational integration failed")

    rho = np.exp(1j * (s.shift.phi + ks * s.shift.S))
    V = rho[:, None] * V
    M = np.empty((2 * nm, 2 * nm))
    M[:nm, :nm] = V[:, :nm].real
    M[nm:, :nm] = V[:, :nm].imag
    M[:nm, nm:] = V[:, nm:].real
    M[nm:, nm:] = V[:, nm:].imag
    eig = np.linalg.eigvals(M)
    eig = eig[np.argsort(-np.abs(eig), kind="stable")]
    mags = np.abs(eig)
    unstable = int(np.sum(mags > 1.0 + UNIT_EIG_TOL))
    unit = int(np.sum(np.abs(mags - 1.0) <= UNIT_EIG_TOL))
    return MonodromyResult(eig, unstable, unit, M)


def plane_wave(k: int, p: Parameters, T: float, S: float, grid: Grid) -> StatePoint:
    """Exact single-mode solution sqrt(R - k^2) e^{i(k x - omega t)}.

    omega = mu (R - k^2) + nu k^2.  The rotation angle is reduced to
    [0, 2 pi) by shifting the temporal mode index, which keeps the residual
    exactly zero.
    """
    kk = TWO_PI * k / grid.Lx
    amp2 = p.R - kk**2
    if amp2 <= 0:
        raise ValueError(f"no plane wave: R = {p.R} <= k^2 = {kk**2}")
    omega = p.mu * amp2 + p.nu * kk**2
    phi_raw = omega * T - kk * S
    n0 = -int(np.floor(phi_raw / TWO_PI))
    phi = phi_raw + TWO_PI * n0
    if abs(k) > grid.Nx // 2 - 1 or abs(n0) > grid.Nt // 2 - 1:
        raise ValueError(f"mode ({k}, {n0}) outside the retained grid")
    f = SpectralField.from_modes(grid, {(k, n0): np.sqrt(amp2)})
    return StatePoint(f, GroupShift(phi, S, T), p)
