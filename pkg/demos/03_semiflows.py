"""Heat and strongly damped wave flows, and the drift that rules out bounded orbits.

With F equal to a kernel eigenfunction, the kernel coefficient grows exactly
like t for the heat flow and like t/(c mu_k) for the wave flow.

Run:  python demos/03_semiflows.py
"""
import math

import numpy as np

from resflow import (ModalField, WaveState, arctan, build_eigensystem, build_grid, drift_demo,
                     heat_flow, interval, wave_flow)

eig = build_eigensystem(interval(math.pi), 32)
grid = build_grid(eig.domain, eig)

u0 = ModalField.basis(eig, 1) + ModalField.basis(eig, 2, 0.5)
finals = [heat_flow(eig, arctan(1.0), grid, 1.0, u0, dt=h, T=1.0).final for h in (0.05, 0.025, 0.0125)]
rate = math.log2(np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2]))
print(f"ETDRK2 observed order on arctan: {rate:.3f}")

tr = wave_flow(eig, arctan(4.0), grid, 1.0, 1.0, WaveState(u0, ModalField.zeros(eig)), T=5.0)
print(f"wave flow to t=5: status {tr.status}, |(u,v)|_H = {tr.norm_H[-1]:.4f}")

for model in ("heat", "wave"):
    rep = drift_demo(eig, 1, model, T=10.0)
    print(f"{model} drift: final kernel coefficient {rep['final_coefficient']:.6f}, "
          f"closed form {rep['final_exact']:.6f}, max deviation {rep['max_deviation']:.1e}")

# off resonance the same forcing saturates instead of drifting
rep = drift_demo(eig, 1, "heat", T=10.0, source_mode=2)
print(f"phi_2 forcing at lambda_1 saturates at {rep['final_coefficient']:.10f} (1/3)")
