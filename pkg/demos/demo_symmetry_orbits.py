"""Symmetry bookkeeping: torus orbits, reflection conjugates, extra symmetries.

Two solutions are "the same" when a torus element e^{i(alpha + m s + n tau)}
maps one coefficient set to the other; the spatial reflection produces a
conjugate partner with S -> Lx - S.  Solutions may carry extra structure:
l-fold shift-rotate symmetry (only every l-th spatial mode populated, offset
by one) and evenness/oddness about a centre.
"""

import numpy as np

from cglerpo import Grid, GroupShift, Parameters, SpectralField, StatePoint
from cglerpo.symmetry import (conjugate, count_distinct, detect_l_symmetry,
                              detect_reflection, flags_string, same_orbit,
                              torus_act)
from cglerpo.system import residual_norm

params = Parameters(16.0, -7.0, 5.0)
grid = Grid(8, 8)
rng = np.random.default_rng(5)

# a generic multi-mode state (not a solution; symmetry machinery is algebraic)
coef = np.zeros((7, 7), complex)
for m in range(-1, 2):
    for n in range(-1, 2):
        coef[m + 3, n + 3] = rng.normal() + 1j * rng.normal()
s = StatePoint(SpectralField(grid, coef), GroupShift(0.9, 1.7, 0.08), params)

print("--- torus orbit identification ---")
moved = StatePoint(torus_act(s.field, 0.7, 1.1, 2.2), s.shift, params)
rel = same_orbit(s, moved)
print(f"verdict: {rel.verdict}, recovered element "
      f"({rel.element[0]:.4f}, {rel.element[1]:.4f}, {rel.element[2]:.4f}) "
      f"vs planted (0.7, 1.1, 2.2), mismatch {rel.mismatch:.1e}")

print("\n--- reflection conjugate ---")
sc = conjugate(s)
print(f"S: {s.shift.S:.4f} -> {sc.shift.S:.4f} (= Lx - S)")
print(f"residual norms match: {residual_norm(s):.6f} vs {residual_norm(sc):.6f}")
print(f"verdict vs original: {same_orbit(s, sc).verdict}")

print("\n--- extra symmetries of a constructed field ---")
sym = SpectralField.zeros(grid)
c1 = np.pi / 2  # even about Lx/4, support on odd m only => l = 2
for m in (1, 3):
    for n in range(-3, 4):
        v = rng.normal() + 1j * rng.normal()
        sym.coef[sym.m_index(m), sym.n_index(n)] = v
        sym.coef[sym.m_index(-m), sym.n_index(n)] = v * np.exp(2j * m * c1)
state = StatePoint(sym, GroupShift(1.2, 0.0, 0.07), params)
report = detect_reflection(state)
report.l_symmetry = detect_l_symmetry(sym)
print(f"l-symmetry: {report.l_symmetry}")
print(f"even centre: {report.even_center:.6f} (planted {c1:.6f})")
print(f"odd centre:  {report.odd_center:.6f} (shift-rotate symmetry implies one)")
print(f"path-record flags: {flags_string(report)!r}")

print("\n--- distinct-parameter-point counting ---")
pts = [(16.0, -7, 5), (16.04, -7, 5), (16.1, -7, 5), (20.0, -7, 5)]
print(f"{pts} -> {count_distinct(pts)} distinct points "
      "(threshold 0.05 in the parameter 2-norm)")
