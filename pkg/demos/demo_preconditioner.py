"""Effect of the block-diagonal preconditioner on the square-block solves.

The linear part of the system is diagonal per mode (a 2x2 real block per
complex coefficient), and dividing it out clusters most of the spectrum of
the square Jacobian block near one.  Unpreconditioned GMRES needs close to
one iteration per unknown; preconditioned it needs a small fraction.
"""

import time

import numpy as np

from cglerpo import Grid, SpectralField, StatePoint
from cglerpo.newton import GmresConfig, gmres
from cglerpo.system import (Parameters, jvp, precond_apply, residual,
                            select_swap_columns)
from cglerpo.dynamics import plane_wave

params = Parameters(16.0, -7.0, 5.0)
grid = Grid(16, 16)
rng = np.random.default_rng(42)

pw = plane_wave(1, params, 0.05, 1.0, grid)
coef = pw.field.coef + 1e-3 * (rng.normal(size=pw.field.coef.shape)
                               + 1j * rng.normal(size=pw.field.coef.shape))
s = StatePoint(SpectralField(grid, coef), pw.shift, pw.params)

sel = select_swap_columns(s)
q = grid.n_unknowns
keep = np.array(sorted(set(range(q)) - set(sel.indices)))


def apply_square(y):
    v = np.zeros(q)
    v[keep] = y
    return jvp(s, v)


b = -residual(s)
cfg = GmresConfig(tol=1e-9, max_iter=3000)
print(f"square block: {len(b)} unknowns, excluded columns {sel.indices}\n")

t0 = time.perf_counter()
pre = gmres(apply_square, b, cfg, precond=lambda r: precond_apply(s, r))
t_pre = time.perf_counter() - t0
t0 = time.perf_counter()
unpre = gmres(apply_square, b, cfg)
t_unpre = time.perf_counter() - t0

print(f"preconditioned:   {pre.iters:5d} iterations ({t_pre:.2f} s), converged={pre.converged}")
print(f"unpreconditioned: {unpre.iters:5d} iterations ({t_unpre:.2f} s), converged={unpre.converged}")
print(f"iteration ratio:  {pre.iters / unpre.iters:.3f}")
