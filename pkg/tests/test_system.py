import numpy as np
import pytest

from cglerpo.spectral import Grid, SpectralField
from cglerpo.system import (GroupShift, Parameters, StatePoint, jvp,
                            kernel_generators, linear_multipliers, modes_at_times,
                            pack_state, param_column, precond_apply, residual,
                            residual_complex, residual_norm, select_swap_columns,
                            unpack_state)
from cglerpo.symmetry import torus_act
from cglerpo.dynamics import plane_wave

from conftest import noisy_plane_wave


def _rand_state(grid, params, seed=1, amp=1.0, shift=None):
    rng = np.random.default_rng(seed)
    env = np.exp(-0.3 * (np.abs(grid.ms)[:, None] + np.abs(grid.ns)[None, :]))
    coef = amp * env * (rng.normal(size=(grid.n_m, grid.n_n))
                        + 1j * rng.normal(size=(grid.n_m, grid.n_n)))
    return StatePoint(SpectralField(grid, coef),
                      shift or GroupShift(0.7, 1.3, 0.09), params)


class TestResidual:
    def test_zero_field_solves(self, params):
        g = Grid(8, 8)
        s = StatePoint(SpectralField.zeros(g), GroupShift(2.0, 1.0, 0.3), params)
        assert residual_norm(s) == 0.0

    def test_plane_wave_k1(self, params):
        g = Grid(32, 32)
        f = SpectralField.from_modes(g, {(1, 0): np.sqrt(15.0)})
        s = StatePoint(f, GroupShift(5.8, 1.0, 0.1), params)
        assert residual_norm(s) <= 1e-12
        c = linear_multipliers(g, s.shift, params)
        assert c[f.m_index(1), f.n_index(0)] == pytest.approx(-15 - 75j)

    def test_plane_wave_cancellation_parts(self, params):
        # linear part (-15-75i)*sqrt(15) cancels nonlinear (1+5i)*15*sqrt(15)
        amp = np.sqrt(15.0)
        lin = (-15 - 75j) * amp
        nonlin = (1 + 5j) * 15.0 * amp
        assert lin + nonlin == pytest.approx(0.0, abs=1e-12)

    def test_stokes_wave(self, params):
        g = Grid(8, 8)
        f = SpectralField.from_modes(g, {(0, 0): 4.0})
        s = StatePoint(f, GroupShift(4.0, 2.2, 0.05), params)
        assert residual_norm(s) <= 1e-12

    def test_bad_period_rejected(self, params):
        with pytest.raises(ValueError):
            GroupShift(0.0, 0.0, 0.0)

    def test_linear_in_R_and_nu(self, params):
        g = Grid(16, 16)
        s = _rand_state(g, params, amp=2.0)
        base = residual(s)
        scale = np.linalg.norm(base)
        for name, delta in (("R", 0.37), ("nu", -0.52)):
            bumped = StatePoint(s.field, s.shift, params.with_value(
                name, params.get(name) + delta))
            diff = residual(bumped) - base - delta * param_column(s, name)
            assert np.linalg.norm(diff) <= 1e-13 * scale

    def test_torus_equivariance(self, params):
        g = Grid(8, 8)
        s = _rand_state(g, params, seed=4)
        acted = StatePoint(torus_act(s.field, 0.4, 1.2, 2.5), s.shift, params)
        # componentwise: F(g a) = g F(a)
        phase = np.exp(1j * (0.4 + np.add.outer(g.ms * 1.2, g.ns * 2.5)))
        lhs = residual_complex(acted)
        rhs = phase * residual_complex(s)
        assert np.abs(lhs - rhs).max() <= 1e-13 * np.abs(rhs).max()
        assert residual_norm(acted) == pytest.approx(residual_norm(s), rel=1e-13)


class TestJacobian:
    def test_jvp_against_finite_differences(self, params):
        g = Grid(16, 16)
        s = _rand_state(g, params, amp=2.0)
        x0 = pack_state(s)
        rng = np.random.default_rng(8)
        q = g.n_unknowns
        dirs = [rng.normal(size=q) for _ in range(4)]
        for k in range(3):  # pure phi, S, T directions
            e = np.zeros(q)
            e[2 * g.n_modes + k] = 1.0
            dirs.append(e)
        eps = 1e-6
        for v in dirs:
            fd = (residual(unpack_state(x0 + eps * v, s))
                  - residual(unpack_state(x0 - eps * v, s))) / (2 * eps)
            an = jvp(s, v)
            assert np.linalg.norm(an - fd) <= 1e-6 * np.linalg.norm(an)

    def test_jvp_zero_direction(self, params):
        g = Grid(8, 8)
        s = _rand_state(g, params)
        assert np.all(jvp(s, np.zeros(g.n_unknowns)) == 0.0)

    def test_jvp_length_check(self, params):
        g = Grid(8, 8)
        s = _rand_state(g, params)
        with pytest.raises(ValueError):
            jvp(s, np.zeros(5))

    def test_kernel_generators_at_solution(self, params):
        g = Grid(16, 16)
        s = plane_wave(1, params, 0.1, 1.0, g)
        rng = np.random.default_rng(3)
        probe = rng.normal(size=g.n_unknowns)
        scale = np.linalg.norm(jvp(s, probe / np.linalg.norm(probe)))
        for v in kernel_generators(s):
            assert np.linalg.norm(jvp(s, v)) <= 1e-10 * scale

    def test_kernel_generator_forms(self, params):
        g = Grid(8, 8)
        f = SpectralField.from_modes(g, {(1, 0): 2.0})
        s = StatePoint(f, GroupShift(5.8, 1.0, 0.1), params)
        v1, v2, v3 = kernel_generators(s)
        k = 2 * (f.m_index(1) + g.n_m * f.n_index(0))
        expect = np.zeros(g.n_unknowns)
        expect[k + 1] = 2.0  # i * 2 has imaginary part 2
        assert np.allclose(v1, expect)
        assert np.allclose(v2, expect)  # m = 1 weight
        assert np.allclose(v3, 0.0)     # n = 0 weight

    def test_param_columns(self, params):
        g = Grid(8, 8)
        f = SpectralField.from_modes(g, {(1, 0): 2.0, (2, 0): 1.0})
        s = StatePoint(f, GroupShift(1.0, 0.5, 0.1), params)
        colR = param_column(s, "R")
        k1 = 2 * (f.m_index(1) + g.n_m * f.n_index(0))
        assert colR[k1] == pytest.approx(-2.0)
        colnu = param_column(s, "nu")
        k2 = 2 * (f.m_index(2) + g.n_m * f.n_index(0))
        assert colnu[k2] == pytest.approx(0.0)
        assert colnu[k2 + 1] == pytest.approx(4.0)  # i k^2 a = 4i

    def test_param_column_mu_finite_difference(self, params):
        g = Grid(8, 8)
        s = _rand_state(g, params, seed=6)
        eps = 1e-6
        up = StatePoint(s.field, s.shift, params.with_value("mu", params.mu + eps))
        dn = StatePoint(s.field, s.shift, params.with_value("mu", params.mu - eps))
        fd = (residual(up) - residual(dn)) / (2 * eps)
        col = param_column(s, "mu")
        assert np.linalg.norm(col - fd) <= 1e-6 * np.linalg.norm(col)

    def test_param_column_name_check(self, params):
        g = Grid(8, 8)
        with pytest.raises(ValueError):
            param_column(_rand_state(g, params), "Lx")


class TestPreconditioner:
    def test_inverse_of_linear_blocks(self, params):
        g = Grid(8, 8)
        s = _rand_state(g, params)
        rng = np.random.default_rng(9)
        x = rng.normal(size=2 * g.n_modes)
        c = linear_multipliers(g, s.shift, params).ravel(order="F")
        fwd = np.empty_like(x)
        z = (x[0::2] + 1j * x[1::2]) * c
        fwd[0::2], fwd[1::2] = z.real, z.imag
        assert np.linalg.norm(precond_apply(s, fwd) - x) <= 1e-12 * np.linalg.norm(x)

    def test_plane_wave_block(self, params):
        g = Grid(8, 8)
        f = SpectralField.from_modes(g, {(1, 0): np.sqrt(15.0)})
        s = StatePoint(f, GroupShift(5.8, 1.0, 0.1), params)
        k = 2 * (f.m_index(1) + g.n_m * f.n_index(0))
        u, w = 0.3, -0.8
        r = np.zeros(2 * g.n_modes)
        # block is multiplication by c = -15 - 75i
        r[k] = -15 * u + 75 * w
        r[k + 1] = -75 * u - 15 * w
        out = precond_apply(s, r)
        assert out[k] == pytest.approx(u)
        assert out[k + 1] == pytest.approx(w)

    def test_resonant_block_clamped(self):
        # R = 4, m = 2, phi = nu*4*T, S = 0 makes c(2,0) exactly zero
        p = Parameters(4.0, -7.0, 5.0)
        g = Grid(8, 8)
        T = 0.1
        s = StatePoint(SpectralField.from_modes(g, {(0, 0): 1.0}),
                       GroupShift(-7.0 * 4.0 * T, 0.0, T), p)
        c = linear_multipliers(g, s.shift, p)
        assert abs(c[5, 3]) < 1e-12  # mode (2, 0)
        r = np.ones(2 * g.n_modes)
        out = precond_apply(s, r)
        assert np.all(np.isfinite(out))


class TestSwapColumns:
    def test_rough_state_excludes_group_columns(self, params):
        g = Grid(8, 8)
        s = _rand_state(g, params, amp=2.0)
        sel = select_swap_columns(s)
        k2 = 2 * g.n_modes
        assert sel.indices == (k2, k2 + 1, k2 + 2)
        assert not sel.degenerate

    def test_plane_wave_peak_and_group_slots(self, params):
        g = Grid(16, 16)
        s = plane_wave(1, params, 0.1, 1.0, g)  # converged: kernel path
        sel = select_swap_columns(s)
        k2 = 2 * g.n_modes
        f = s.field
        im_col = 2 * (f.m_index(1) + g.n_m * f.n_index(0)) + 1
        assert sel.indices == (im_col, k2 + 1, k2 + 2)
        assert sel.degenerate

    def test_stokes_degenerate(self, params):
        g = Grid(8, 8)
        s = plane_wave(0, params, 0.05, 1.0, g)
        sel = select_swap_columns(s)
        assert sel.degenerate
        assert len(set(sel.indices)) == 3

    def test_indices_distinct(self, params):
        g = Grid(8, 8)
        for seed in range(5):
            s = _rand_state(g, params, seed=seed, amp=0.5)
            assert len(set(select_swap_columns(s).indices)) == 3

    def test_zero_field_rejected(self, params):
        g = Grid(8, 8)
        s = StatePoint(SpectralField.zeros(g), GroupShift(0.0, 0.0, 1.0), params)
        with pytest.raises(ValueError):
            select_swap_columns(s)


class TestPacking:
    def test_round_trip(self, params):
        g = Grid(8, 8)
        s = _rand_state(g, params, seed=12)
        x = pack_state(s)
        assert x.shape == (g.n_unknowns,)
        back = unpack_state(x, s)
        assert np.array_equal(back.field.coef, s.field.coef)
        assert back.shift == s.shift

    def test_interleaving_order(self, params):
        g = Grid(8, 8)
        f = SpectralField.zeros(g)
        f.coef[0, 0] = 1.0 + 2.0j   # m = -3, n = -3: first canonical slot
        s = StatePoint(f, GroupShift(0.1, 0.2, 0.3), params)
        x = pack_state(s)
        assert x[0] == 1.0 and x[1] == 2.0
        assert tuple(x[-3:]) == (0.1, 0.2, 0.3)


class TestModesAtTimes:
    def test_matches_pointwise_formula(self, params):
        g = Grid(8, 8)
        s = _rand_state(g, params, seed=13)
        ts = np.array([0.0, 0.013, 0.2])
        out = modes_at_times(s, ts)
        sh = s.shift
        for mi, m in enumerate(g.ms):
            for ti, t in enumerate(ts):
                val = np.exp(-1j * (sh.phi + m * sh.S) * t / sh.T) * sum(
                    s.field.coef[mi, ni] * np.exp(2j * np.pi * n * t / sh.T)
                    for ni, n in enumerate(g.ns))
                assert out[mi, ti] == pytest.approx(val, rel=1e-12)

    def test_period_closure(self, params):
        g = Grid(8, 8)
        s = _rand_state(g, params, seed=14)
        sh = s.shift
        a0 = modes_at_times(s, np.array([0.0]))[:, 0]
        aT = modes_at_times(s, np.array([sh.T]))[:, 0]
        pulled = np.exp(1j * (sh.phi + g.ks * sh.S)) * aT
        assert np.abs(pulled - a0).max() <= 1e-12 * np.abs(a0).max()
