import json

import numpy as np
import pytest

from resflow import (ModalField, Scenario, arctan, constant_mode, cubic, drift_demo,
                     find_equilibria, heat_flow, search_connections, shoot_unstable, zero)
from resflow.orbits import Equilibrium, residual

# Sine coefficients (odd j = 1, 3, ..., 21) of the positive solution of
# u'' + 2u - u^3 = 0, u(0) = u(pi) = 0: scipy solve_ivp shooting (rtol 1e-13)
# projected with quad; solve_bvp (tol 1e-9) agrees to 1e-12.
CUBIC_ORACLE_ODD = [1.4735389049399, 0.056349980175644, 0.0022439886228493, 8.9366526700746e-05,
                    3.5590095286905e-06, 1.4173706200382e-07, 5.6446584038861e-09,
                    2.2479754863136e-10, 8.9531715374846e-12, 3.5575535572985e-13,
                    1.4002687898085e-14]


def cubic_oracle(N):
    c = np.zeros(N)
    c[0:2 * len(CUBIC_ORACLE_ODD):2] = CUBIC_ORACLE_ODD
    return c


@pytest.fixture(scope="module")
def cubic_eq(line):
    eig, grid = line
    return find_equilibria(eig, cubic(), grid, 2.0)


def test_zero_equilibrium_has_zero_residual(line):
    eig, grid = line
    eqs = find_equilibria(eig, arctan(1.0), grid, 0.5, seeds=[np.zeros(eig.N)])
    assert len(eqs) == 1 and eqs[0].residual == 0.0 and eqs[0].state.norm() == 0.0


def test_linear_nondegenerate_only_zero(line):
    eig, grid = line
    eqs = find_equilibria(eig, zero(), grid, 2.5)
    assert len(eqs) == 1 and eqs[0].state.norm() == 0.0


def test_cubic_pair_matches_oracle(line, cubic_eq):
    eig, grid = line
    nonzero = [e for e in cubic_eq if e.state.norm() > 0.1]
    assert len(nonzero) == 2
    ref = cubic_oracle(eig.N)
    for e in nonzero:
        assert e.residual < 1e-10
        sign = np.sign(e.state.coeffs[0])
        assert np.linalg.norm(e.state.coeffs - sign * ref) < 1e-6
        values = grid.synthesize(e.state.coeffs)
        assert np.all(sign * values > 0)
        assert e.unstable_count == 0
    zero_eq = [e for e in cubic_eq if e.state.norm() == 0.0]
    assert len(zero_eq) == 1 and zero_eq[0].unstable_count == 1


def test_shoot_to_positive_cubic_state(line, cubic_eq):
    eig, grid = line
    base = next(e for e in cubic_eq if e.state.norm() == 0.0)
    target = next(i for i, e in enumerate(cubic_eq) if e.state.coeffs[0] > 0.1)
    shots, _ = shoot_unstable(eig, cubic(), grid, 2.0, base, cubic_eq,
                              directions=[np.eye(eig.N)[0]], T=40.0, tol=1e-6)
    (shot,) = shots
    assert shot.classification == "converged-to" and shot.target == target
    assert shot.terminal_distance < 1e-6
    ubar = cubic_eq[target].state
    assert np.linalg.norm(residual(eig, cubic(), grid, 2.0, ubar.coeffs)) < 1e-8


def test_cubic_energy_decreases_along_shot(line):
    eig, grid = line
    lam = 2.0
    tr = heat_flow(eig, cubic(), grid, lam, ModalField.basis(eig, 1, 1e-4), dt=0.01, T=30.0)
    u = tr.states
    # E(u) = 1/2 sum (mu - lam) u_j^2 + int u^4 / 4
    quartic = np.array([grid.integrate(grid.synthesize(c) ** 4) / 4 for c in u])
    energy = 0.5 * ((eig.mu - lam) * u ** 2).sum(axis=1) + quartic
    assert np.all(np.diff(energy) <= 1e-12)


def test_constant_kernel_drifts(line):
    eig, grid = line
    f = constant_mode(eig, 1)
    shots, _ = shoot_unstable(eig, f, grid, eig.eigenvalue(1), ModalField.zeros(eig), (),
                              T=20.0, base_id=-1)
    assert shots and all(s.classification == "drift-linear" for s in shots)
    assert all(abs(s.drift_slope - 1.0) < 1e-6 for s in shots)


def test_attracting_origin(line):
    eig, grid = line
    eqs = find_equilibria(eig, zero(), grid, 0.5)
    shots, notes = shoot_unstable(eig, zero(), grid, 0.5, eqs[0], eqs)
    assert shots == []
    assert any("attracting" in n for n in notes)


def test_drift_demo_heat(line):
    eig, _ = line
    rep = drift_demo(eig, 1, "heat", T=10.0)
    assert rep["max_deviation"] <= 1e-10
    rep = drift_demo(eig, 2, "heat", T=10.0)
    assert rep["max_deviation"] <= 1e-10
    # other modes are not forced, so they stay far below m / dist(lambda_2, rest) = m / 3
    assert rep["max_other_coefficient"] <= np.sqrt(2 / np.pi) / 3


def test_drift_demo_off_resonance_saturates(line):
    eig, _ = line
    # forcing phi_2 with lam = lambda_1: u_2' = (1 - 4) u_2 + 1 -> 1/3
    rep = drift_demo(eig, 1, "heat", T=10.0, source_mode=2)
    assert not rep["resonant"]
    assert abs(rep["final_coefficient"] - 1 / 3) <= 1e-8
    assert rep["kernel_projection_final"] <= 1e-12


def test_drift_demo_lower_mode_above_resonance_grows(line):
    eig, _ = line
    # forcing phi_1 with lam = lambda_2: u_1' = 3 u_1 + 1 -> (e^{3t} - 1)/3, no saturation
    rep = drift_demo(eig, 2, "heat", T=3.0, lam=4.0, source_mode=1)
    assert rep["final_coefficient"] == pytest.approx(np.expm1(9.0) / 3, rel=1e-10)
    assert rep["kernel_projection_final"] <= 1e-12


def test_drift_demo_wave(line):
    eig, _ = line
    rep = drift_demo(eig, 1, "wave", T=20.0, c=1.0)
    assert rep["max_relative_deviation"] <= 1e-10
    assert rep["fitted_slope"] == pytest.approx(rep["expected_slope"], rel=1e-4)


@pytest.fixture(scope="module")
def heat_report():
    return search_connections(Scenario(samples=500))


def test_heat_scenario(heat_report):
    rep = heat_report
    assert rep.verdict["conclusion"] == "orbit-exists" and rep.verdict["case"] == "i"
    assert len(rep.shots) >= 4
    classes = {"converged-to", "drift-linear", "escaped", "bounded-nonconvergent"}
    assert all(s.classification in classes for s in rep.shots)
    json.loads(rep.to_json())


def test_wave_scenario():
    rep = search_connections(Scenario(f="saturating:beta=4", model="wave", samples=500, T=20.0,
                                      bisect=False))
    assert rep.verdict["conclusion"] == "orbit-exists" and rep.verdict["case"] == "i"
    assert rep.verdict["condition"] == "SR1"


def test_constant_kernel_scenario():
    rep = search_connections(Scenario(f="constant_kernel:mode=1", samples=500, T=20.0))
    v = rep.verdict
    assert v["conclusion"] == "no-conclusion"
    conds = {r["condition"]: r["verdict"] for r in rep.conditions}
    assert conds["G1"] == "fails" and conds["G2"] == "fails"
    assert rep.shots and all(s.classification == "drift-linear" for s in rep.shots)


def test_converged_shots_are_validated(heat_report):
    eqs = heat_report.equilibria
    for s in heat_report.shots:
        if s.classification == "converged-to":
            assert s.terminal_distance < heat_report.scenario["tol"]
            assert eqs[s.target]["residual"] < heat_report.scenario["tol"]


def test_equilibrium_to_dict(cubic_eq):
    d = cubic_eq[0].to_dict()
    assert set(d) >= {"coeffs", "residual", "rates", "unstable_count"}
    assert isinstance(cubic_eq[0], Equilibrium)
