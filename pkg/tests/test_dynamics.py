import numpy as np
import pytest

from cglerpo.spectral import Grid, SpectralField
from cglerpo.system import GroupShift, Parameters, StatePoint, residual_norm
from cglerpo.symmetry import torus_act
from cglerpo.dynamics import (MonodromyResult, OdeState, closure_residual,
                              integrate, ode_rhs, plane_wave,
                              relative_monodromy)


def stokes_sideband_multipliers(params, T, S, n_modes):
    """Analytic per-sideband multipliers of the k=0 wave's relative monodromy.

    In the co-rotating frame the pair (W_m, conj(W_-m)) evolves under the
    constant matrix [[alpha_m, beta], [conj(beta), conj(alpha_m)]] with
    alpha_m = -R - m^2 - i (m^2 nu + mu R) and beta = -(1 + i mu) R; the
    group action contributes the phase e^{i m S}.
    """
    R, nu, mu = params.R, params.nu, params.mu
    half = n_modes // 2
    beta = -(1 + 1j * mu) * R
    out = []
    for m in range(-half, half + 1):
        alpha = -R - m**2 - 1j * (m**2 * nu + mu * R)
        C = np.array([[alpha, beta], [np.conj(beta), np.conj(alpha)]])
        out.extend(np.exp(1j * m * S) * np.exp(np.linalg.eigvals(C) * T))
    return np.array(out)


class TestPlaneWave:
    def test_k1_reference_values(self, params):
        g = Grid(8, 8)
        s = plane_wave(1, params, 0.1, 1.0, g)
        assert s.shift.phi == pytest.approx(5.8)
        assert abs(s.field.get(1, 0)) == pytest.approx(np.sqrt(15.0))
        assert residual_norm(s) <= 1e-12

    def test_k0_reference_values(self, params):
        g = Grid(8, 8)
        s = plane_wave(0, params, 0.05, 1.0, g)
        assert s.shift.phi == pytest.approx(4.0)
        assert s.field.get(0, 0) == pytest.approx(4.0)
        assert residual_norm(s) <= 1e-12

    def test_wrapped_rotation_shifts_temporal_index(self, params):
        g = Grid(8, 8)
        s = plane_wave(0, params, 0.1, 0.0, g)  # omega T = 8.0 > 2 pi
        assert 0.0 <= s.shift.phi < 2 * np.pi
        assert s.shift.phi == pytest.approx(8.0 - 2 * np.pi)
        assert s.field.get(0, -1) == pytest.approx(4.0)
        assert residual_norm(s) <= 1e-12

    def test_amplitude_boundary_rejected(self):
        with pytest.raises(ValueError):
            plane_wave(4, Parameters(16, -7, 5), 0.1, 0.0, Grid(16, 16))


class TestOdeRhs:
    def test_zero(self, params):
        a = OdeState(np.zeros(7, dtype=complex))
        assert np.all(ode_rhs(a, params) == 0)

    def test_stokes_pure_rotation(self, params):
        vals = np.zeros(7, dtype=complex)
        vals[3] = 4.0
        rhs = ode_rhs(OdeState(vals), params)
        assert rhs[3] == pytest.approx(-80j * 4.0)
        assert np.abs(np.delete(rhs, 3)).max() < 1e-12

    def test_matches_direct_triple_sum(self, params):
        rng = np.random.default_rng(1)
        vals = rng.normal(size=7) + 1j * rng.normal(size=7)
        rhs = ode_rhs(OdeState(vals), params)
        conv = np.zeros(7, dtype=complex)
        for m1 in range(-3, 4):
            for m2 in range(-3, 4):
                for m3 in range(-3, 4):
                    m = m1 + m2 - m3
                    if abs(m) <= 3:
                        conv[m + 3] += vals[m1 + 3] * vals[m2 + 3] * np.conj(vals[m3 + 3])
        ks = np.arange(-3, 4)
        expect = ((params.R - ks**2 * (1 + 1j * params.nu)) * vals
                  - (1 + 1j * params.mu) * conv)
        assert np.abs(rhs - expect).max() < 1e-12

    def test_even_length_rejected(self):
        with pytest.raises(ValueError):
            OdeState(np.zeros(6, dtype=complex))


class TestIntegrate:
    def test_stokes_rotation(self, params):
        vals = np.zeros(7, dtype=complex)
        vals[3] = 4.0
        out = integrate(OdeState(vals), params, 0.05, steps=2048)
        expect = np.exp(-1j * 4.0) * vals
        assert np.abs(out.values - expect).max() < 1e-10
        assert out.t == pytest.approx(0.05)

    def test_small_amplitude_linear_decay(self, params):
        eps = 1e-5
        vals = np.full(7, eps, dtype=complex)
        out = integrate(OdeState(vals), params, 0.02, steps=256)
        ks = np.arange(-3, 4)
        lin = eps * np.exp((params.R - ks**2 * (1 + 1j * params.nu)) * 0.02)
        assert np.abs(out.values - lin).max() < 1e-9 * np.abs(lin).max()

    def test_step_halving_richardson(self, params):
        rng = np.random.default_rng(2)
        vals = 0.1 * (rng.normal(size=7) + 1j * rng.normal(size=7))
        e1 = integrate(OdeState(vals), params, 0.05, steps=1024)
        e2 = integrate(OdeState(vals), params, 0.05, steps=2048)
        rel = np.linalg.norm(e1.values - e2.values) / np.linalg.norm(e2.values)
        assert rel < 1e-8

    def test_blowup_reported(self):
        p = Parameters(500.0, 0.0, 0.0)
        with pytest.raises(RuntimeError):
            integrate(OdeState(np.ones(7, dtype=complex)), p, 0.1, steps=1)

    def test_bad_steps(self, params):
        with pytest.raises(ValueError):
            integrate(OdeState(np.zeros(7, dtype=complex)), params, 0.1, steps=0)


class TestClosure:
    def test_plane_wave_closes(self, params):
        g = Grid(8, 8)
        s = plane_wave(0, params, 0.05, 1.0, g)
        assert closure_residual(s, steps=2048) <= 1e-10
        s1 = plane_wave(1, params, 0.1, 1.0, g)
        assert closure_residual(s1, steps=2048) <= 1e-10

    def test_non_solution_fails_loudly(self, params):
        g = Grid(8, 8)
        s = plane_wave(0, params, 0.05, 1.0, g)
        bad = StatePoint(SpectralField(g, 1.2 * s.field.coef), s.shift, params)
        assert closure_residual(bad, steps=512) > 1e-3


class TestMonodromy:
    def test_stokes_benjamin_feir(self, params):
        # 1 + mu nu = -34 < 0: sideband instability
        g = Grid(8, 8)
        s = plane_wave(0, params, 0.05, 1.3, g)
        mono = relative_monodromy(s, steps=1024)
        assert mono.unstable_dimension >= 1
        preds = stokes_sideband_multipliers(params, 0.05, 1.3, g.n_m)
        assert mono.unstable_dimension == int((np.abs(preds) > 1 + 1e-6).sum())
        # greedy complex matching against the analytic multipliers
        pool = list(mono.eigenvalues)
        worst = 0.0
        for pv in preds:
            i = int(np.argmin([abs(z - pv) for z in pool]))
            worst = max(worst, abs(pool.pop(i) - pv) / (1 + abs(pv)))
        assert worst < 1e-4
        # the rotation generator is the single continuous symmetry direction
        assert mono.unit_count == 1

    def test_rotation_generator_has_unit_multiplier(self, params):
        g = Grid(8, 8)
        s = plane_wave(1, params, 0.1, 1.0, g)
        mono = relative_monodromy(s, steps=1024)
        a0 = s.field.coef.sum(axis=1)
        v = 1j * a0
        vec = np.concatenate([v.real, v.imag])
        out = mono.matrix @ vec
        assert np.linalg.norm(out - vec) <= 1e-6 * np.linalg.norm(vec)
        assert mono.unit_count >= 1

    def test_torus_acted_state_same_spectrum(self, params):
        g = Grid(8, 8)
        s = plane_wave(1, params, 0.1, 1.0, g)
        acted = StatePoint(torus_act(s.field, 0.8, 2.0, 1.1), s.shift, params)
        m1 = relative_monodromy(s, steps=512)
        m2 = relative_monodromy(acted, steps=512)
        pool = list(m2.eigenvalues)
        worst = 0.0
        for ev in m1.eigenvalues:
            i = int(np.argmin([abs(z - ev) for z in pool]))
            worst = max(worst, abs(pool.pop(i) - ev) / (1 + abs(ev)))
        assert worst < 1e-8
        assert m1.unstable_dimension == m2.unstable_dimension
