"""From a holding resonance condition to a statement about connecting orbits.

Run:  python demos/04_verdicts.py
"""
import math

from resflow import (ConditionReport, arctan, build_eigensystem, build_grid,
                     check_landesman_lazer, check_strong_resonance, decompose, interval,
                     orbit_verdict, saturating)

eig = build_eigensystem(interval(math.pi), 32)
grid = build_grid(eig.domain, eig)

chains = [
    ("heat", 1, arctan(4.0), lambda f: check_landesman_lazer(f, decompose(eig, 1), grid)),
    ("heat", 2, arctan(-4.0), lambda f: check_landesman_lazer(f, decompose(eig, 2), grid)),
    ("wave", 1, saturating(4.0), lambda f: [check_strong_resonance(f, grid)]),
]
for model, k, f, check in chains:
    v = orbit_verdict(eig, k, f.nu, check(f), model)
    print(f"{model} k={k} {f.name}{f.params}: exponents {v.exponents} -> {v.conclusion}")
    for line in v.narrative:
        print("   ", line)

# equal exponents: the criterion is silent
v = orbit_verdict(eig, 1, -2.0, [ConditionReport("G2", "holds", 1.0)])
print("G2 with lam + nu < lambda_1:", v.exponents, v.conclusion)
