import numpy as np
import pytest

from cglerpo import Grid, Parameters, SpectralField, StatePoint
from cglerpo.dynamics import plane_wave


@pytest.fixture
def params():
    return Parameters(16.0, -7.0, 5.0)


def noisy_plane_wave(grid, params, k=1, T=0.1, S=1.0, scale=1e-3, seed=0):
    """Plane-wave state with coefficientwise complex Gaussian noise."""
    rng = np.random.default_rng(seed)
    pw = plane_wave(k, params, T, S, grid)
    noise = scale * (rng.normal(size=pw.field.coef.shape)
                     + 1j * rng.normal(size=pw.field.coef.shape))
    return StatePoint(SpectralField(grid, pw.field.coef + noise), pw.shift, pw.params)


def dft_synthesis(coef, grid, Px, Pt):
    """Direct-summation transform oracle (no FFT)."""
    Em = np.exp(2j * np.pi * np.outer(np.arange(Px), grid.ms) / Px)
    En = np.exp(2j * np.pi * np.outer(np.arange(Pt), grid.ns) / Pt)
    return Em @ coef @ En.T


def dft_analysis(values, grid):
    Px, Pt = values.shape
    Em = np.exp(-2j * np.pi * np.outer(grid.ms, np.arange(Px)) / Px)
    En = np.exp(-2j * np.pi * np.outer(grid.ns, np.arange(Pt)) / Pt)
    return (Em @ values @ En.T) / (Px * Pt)


def cubic_brute(a, b, c, grid, conj_third=True):
    """O(M^3) triple-sum oracle over the retained modes.

    conj_third=True: coefficients of A*B*conj(C), indices m1+m2-m3 = m.
    conj_third=False: coefficients of the plain product A*B*C, m1+m2+m3 = m.
    """
    Mx, Mt = grid.Nx // 2 - 1, grid.Nt // 2 - 1
    entries = []
    for arr in (a, b, c):
        nz = np.argwhere(arr != 0)
        entries.append([(mi - Mx, ni - Mt, arr[mi, ni]) for mi, ni in nz])
    sign = -1 if conj_third else 1
    out = np.zeros_like(a)
    for m1, n1, v1 in entries[0]:
        for m2, n2, v2 in entries[1]:
            for m3, n3, v3 in entries[2]:
                m = m1 + m2 + sign * m3
                n = n1 + n2 + sign * n3
                if abs(m) <= Mx and abs(n) <= Mt:
                    w = np.conj(v3) if conj_third else v3
                    out[m + Mx, n + Mt] += v1 * v2 * w
    return out
