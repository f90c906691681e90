"""Truncated two-index Fourier representation and the dealiased cubic product.

A complex field A(x, t) on the periodic strip [0, Lx) x [0, T) is stored as
coefficients of

    A(x, t) = sum_{m,n} ahat[m, n] * exp(i k_m x) * exp(i 2 pi n theta),

with k_m = 2 pi m / Lx and theta = t / T in [0, 1).  Time enters only through
the scaled variable theta, so the grid is independent of the (unknown) period
T.  Retained indices are m in [-Nx/2+1, Nx/2-1] and n in [-Nt/2+1, Nt/2-1].

Transform convention: synthesis (spectral -> physical) is the plain unnormalized
sum above; analysis divides by the number of collocation points.  The cubic
product A*B*conj(C) is evaluated on a grid padded by a factor of two in each
direction, which makes its Galerkin projection onto the retained modes exact
(a cubic term needs padding >= 2 to be alias-free).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Mode truncation of the space-time Fourier expansion.

    Parameters
    ----------
    Nx, Nt : int
        Even truncation sizes (>= 8).  The retained mode set has
        (Nx-1)*(Nt-1) entries.
    Lx : float
        Spatial period, 2*pi for the standard problem.
    """

    Nx: int
    Nt: int
    Lx: float = TWO_PI

    def __post_init__(self) -> None:
        for name, val in (("Nx", self.Nx), ("Nt", self.Nt)):
            if val < 8 or val % 2 != 0:
                raise ValueError(f"{name} must be even and >= 8, got {val}")
        if self.Lx <= 0:
            raise ValueError("Lx must be positive")

    @property
    def n_m(self) -> int:
        return self.Nx - 1

    @property
    def n_n(self) -> int:
        return self.Nt - 1

    @property
    def n_modes(self) -> int:
        return self.n_m * self.n_n

    @property
    def n_unknowns(self) -> int:
        """Real unknown count 2*(Nx-1)*(Nt-1) + 3 of the closed system."""
        return 2 * self.n_modes + 3

    @cached_property
    def ms(self) -> np.ndarray:
        return np.arange(-(self.Nx // 2 - 1), self.Nx // 2)

    @cached_property
    def ns(self) -> np.ndarray:
        return np.arange(-(self.Nt // 2 - 1), self.Nt // 2)

    @cached_property
    def ks(self) -> np.ndarray:
        """Spatial wavenumbers k_m = 2*pi*m/Lx (equal to m when Lx = 2*pi)."""
        return TWO_PI * self.ms / self.Lx


@dataclass
class SpectralField:
    """Retained-mode coefficients ahat[m, n] on a :class:`Grid`.

    ``coef`` has shape (Nx-1, Nt-1) with axis 0 indexed by m ascending and
    axis 1 by n ascending.  The canonical flat order (m fastest, then n) is
    ``coef.ravel(order="F")``.
    """

    grid: Grid
    coef: np.ndarray

    def __post_init__(self) -> None:
        self.coef = np.asarray(self.coef, dtype=complex)
        expected = (self.grid.n_m, self.grid.n_n)
        if self.coef.shape != expected:
            raise ValueError(f"coef shape {self.coef.shape} != {expected}")
        if not np.all(np.isfinite(self.coef)):
            raise ValueError("coef entries must be finite")

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros((grid.n_m, grid.n_n), dtype=complex))

    @classmethod
    def from_modes(cls, grid: Grid, entries: dict) -> "SpectralField":
        """Build a field from a {(m, n): value} dictionary."""
        f = cls.zeros(grid)
        for (m, n), val in entries.items():
            f.coef[f.m_index(m), f.n_index(n)] = val
        return f

    def m_index(self, m: int) -> int:
        return int(m) + (self.grid.Nx // 2 - 1)

    def n_index(self, n: int) -> int:
        return int(n) + (self.grid.Nt // 2 - 1)

    def get(self, m: int, n: int) -> complex:
        return self.coef[self.m_index(m), self.n_index(n)]

    def flat(self) -> np.ndarray:
        return self.coef.ravel(order="F")

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coef.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.coef))


def unflatten(grid: Grid, flat: np.ndarray) -> np.ndarray:
    """Inverse of ``SpectralField.flat``: canonical vector -> (m, n) array."""
    return np.asarray(flat, dtype=complex).reshape((grid.n_m, grid.n_n), order="F")


@dataclass
class CollocationField:
    """Samples A(x_j, theta_l) on the uniform Px x Pt collocation grid."""

    grid: Grid
    values: np.ndarray

    @property
    def Px(self) -> int:
        return self.values.shape[0]

    @property
    def Pt(self) -> int:
        return self.values.shape[1]

    @cached_property
    def xs(self) -> np.ndarray:
        return self.grid.Lx * np.arange(self.Px) / self.Px

    @cached_property
    def thetas(self) -> np.ndarray:
        return np.arange(self.Pt) / self.Pt


def _check_padding(grid: Grid, Px: int, Pt: int) -> None:
    if Px < grid.Nx or Pt < grid.Nt or Px % 2 or Pt % 2:
        raise ValueError(
            f"collocation sizes ({Px}, {Pt}) must be even and >= ({grid.Nx}, {grid.Nt})"
        )


def _phys_values(coef: np.ndarray, grid: Grid, Px: int, Pt: int) -> np.ndarray:
    # Zero-pad retained modes into DFT bins (negative indices wrap) and run
    # the unnormalized synthesis.
    pad = np.zeros((Px, Pt), dtype=complex)
    pad[np.ix_(grid.ms % Px, grid.ns % Pt)] = coef
    return np.fft.ifft2(pad) * (Px * Pt)


def _spec_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    Px, Pt = values.shape
    spec = np.fft.fft2(values) / (Px * Pt)
    return spec[np.ix_(grid.ms % Px, grid.ns % Pt)]


def to_physical(f: SpectralField, Px: int | None = None, Pt: int | None = None) -> CollocationField:
    """Evaluate the truncated expansion on the Px x Pt collocation grid."""
    g = f.grid
    Px = 2 * g.Nx if Px is None else Px
    Pt = 2 * g.Nt if Pt is None else Pt
    _check_padding(g, Px, Pt)
    return CollocationField(g, _phys_values(f.coef, g, Px, Pt))


def to_spectral(c: CollocationField, grid: Grid) -> SpectralField:
    """Galerkin truncation of the discrete transform of collocation samples."""
    _check_padding(grid, c.Px, c.Pt)
    return SpectralField(grid, _spec_values(c.values, grid))


def _cubic_coef(a: np.ndarray, b: np.ndarray, c: np.ndarray, grid: Grid) -> np.ndarray:
    """Retained modes of A*B*conj(C) for coefficient arrays a, b, c.

    Equals the triple convolution
    sum_{m1+m2-m3=m, n1+n2-n3=n} a[m1,n1] b[m2,n2] conj(c[m3,n3])
    because the 2x padded pointwise product is alias-free on retained modes.
    """
    Px, Pt = 2 * grid.Nx, 2 * grid.Nt
    A = _phys_values(a, grid, Px, Pt)
    B = A if b is a else _phys_values(b, grid, Px, Pt)
    C = A if c is a else (B if c is b else _phys_values(c, grid, Px, Pt))
    return _spec_values(A * B * np.conj(C), grid)


def cubic_conv(a: SpectralField, b: SpectralField, c: SpectralField) -> SpectralField:
    """Galerkin coefficients of the cubic product A*B*conj(C)."""
    if not (a.grid == b.grid == c.grid):
        raise ValueError("cubic_conv requires identical grids")
    return SpectralField(a.grid, _cubic_coef(a.coef, b.coef, c.coef, a.grid))


def power_spectra(f: SpectralField) -> tuple[np.ndarray, np.ndarray]:
    """Spatial and temporal power: sum_n |ahat|^2 over m, sum_m |ahat|^2 over n."""
    p = np.abs(f.coef) ** 2
    return p.sum(axis=1), p.sum(axis=0)


def decay_ratio(f: SpectralField) -> float:
    """Max power in the outermost mode bands relative to the peak power.

    A converged, well-resolved solution should show a ratio <= 1e-6; larger
    values call for increasing Nx or Nt.
    """
    spatial, temporal = power_spectra(f)
    peak = max(spatial.max(), temporal.max())
    if peak == 0.0:
        return 0.0
    boundary = max(spatial[0], spatial[-1], temporal[0], temporal[-1])
    return float(boundary / peak)
