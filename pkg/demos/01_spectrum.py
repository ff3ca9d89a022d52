"""Dirichlet spectra on an interval and a square, and the resonant splitting.

Run:  python demos/01_spectrum.py
"""
import math

import numpy as np

from resflow import (ModalField, build_eigensystem, decompose, fractional_norm, interval,
                     mode_count_below, project, rectangle)

# On (0, pi) the eigenvalues are the squares, with simple multiplicity.
line = build_eigensystem(interval(math.pi), 8)
print("interval(pi):", [g.value for g in line.distinct])

# The square has repeated eigenvalues j^2 + k^2; grouping uses exact lattice
# keys, so (1,2) and (2,1) land in one group without a float tolerance.
sq = rectangle(math.pi, math.pi)
eig = build_eigensystem(sq, mode_count_below(sq, 20))
for g in eig.distinct:
    print(f"  lambda = {g.value:4g}  modes {[eig.labels[m] for m in g.modes]}")

# Resonance at lambda_2 = 5 splits the modes into X_-, X_0 and X_+.
d = decompose(eig, 2)
print(f"k=2: lambda={d.lam:g}, dim X_- = {d.dim_minus}, dim X_0 = {d.dim_kernel}, d_2 = {d.d_k}")

u = ModalField(eig, np.random.default_rng(1).normal(size=eig.N))
parts = [project(d, u, p) for p in ("minus", "zero", "plus")]
print("parts sum back to u:", np.array_equal((parts[0] + parts[1] + parts[2]).coeffs, u.coeffs))
print("|u|_H =", round(u.norm(), 4), " |u|_0.9 =", round(fractional_norm(eig, u, 0.9), 4))
