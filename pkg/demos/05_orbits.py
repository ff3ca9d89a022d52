"""Equilibria and shooting for the cubic and arctan scenarios.

For f = -s^3 at lam = 2 the origin has one unstable direction and the flow
from it reaches the positive equilibrium. For arctan(4) at resonance the
index verdict guarantees an orbit; the shots are evidence, not proof.

Run:  python demos/05_orbits.py
"""
import math
from collections import Counter

import numpy as np

from resflow import (Scenario, build_eigensystem, build_grid, cubic, find_equilibria, interval,
                     search_connections, shoot_unstable)

eig = build_eigensystem(interval(math.pi), 32)
grid = build_grid(eig.domain, eig)
eqs = find_equilibria(eig, cubic(), grid, 2.0)
for i, e in enumerate(eqs):
    print(f"equilibrium {i}: |u|_H = {e.state.norm():.6f}, residual {e.residual:.1e}, "
          f"unstable {e.unstable_count}")

base = next(e for e in eqs if e.state.norm() == 0.0)
shots, _ = shoot_unstable(eig, cubic(), grid, 2.0, base, eqs, T=40.0)
for s in shots:
    print(f"shot along {np.sign(s.direction[0]):+.0f} phi_1: {s.classification} -> {s.target}, "
          f"distance {s.terminal_distance:.1e}")

rep = search_connections(Scenario(samples=500, bisect=False))
print("arctan(4) heat verdict:", rep.verdict["conclusion"], "case", rep.verdict["case"])
print("shot classes:", dict(Counter(s.classification for s in rep.shots)))
for note in rep.notes:
    print("  note:", note)
