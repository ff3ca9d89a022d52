import csv
import math

import numpy as np
import pytest

from resflow import (ModalField, WaveState, arctan, constant_kernel, constant_mode, heat_flow,
                     phi1, phi2, wave_flow, zero)
from resflow.nemytskii import Nonlinearity, linear
from resflow.semiflow import wave_propagators

# mpmath at 40 digits
PHI1_M1E8 = 0.9999999950000000166666666
PHI2_005 = 0.5084385504096158790070545
PHI2_M3 = 0.2277541187075404381088158


def test_phi1_values():
    assert phi1(0.0) == 1.0
    assert phi1(1.0) == pytest.approx(math.e - 1, rel=1e-14)
    assert abs(phi1(-1e-8) - PHI1_M1E8) <= 1e-15
    z = np.array([-1e-6, -1e-5, 1e-5, 0.3, -40.0])
    exact = np.expm1(z) / z
    assert np.allclose(phi1(z), exact, rtol=1e-10, atol=0)


def test_phi2_values():
    assert phi2(0.0) == 0.5
    assert phi2(0.05) == pytest.approx(PHI2_005, rel=1e-14)
    assert phi2(-3.0) == pytest.approx(PHI2_M3, rel=1e-14)
    # continuity across the series switch
    assert phi2(0.1 - 1e-12) == pytest.approx(phi2(0.1 + 1e-12), rel=1e-10)


@pytest.mark.parametrize("scheme", ["expEuler", "ETDRK2"])
@pytest.mark.parametrize("dt", [0.1, 0.013])
def test_linear_decay_is_exact(line, scheme, dt):
    eig, grid = line
    tr = heat_flow(eig, zero(), grid, 0.0, ModalField.basis(eig, 1), dt=dt, T=1.3, scheme=scheme)
    assert abs(tr.final[0] - math.exp(-tr.times[-1])) <= 1e-12


def test_all_modes_match_semigroup(line):
    eig, grid = line
    u0 = ModalField(eig, np.linspace(1.0, 0.1, eig.N))
    tr = heat_flow(eig, zero(), grid, 2.5, u0, dt=0.01, T=1.0)
    exact = np.exp((2.5 - eig.mu) * tr.times[-1]) * u0.coeffs
    assert np.max(np.abs(tr.final - exact)) <= 1e-12


def test_kernel_coefficient_frozen_without_forcing(line):
    eig, grid = line
    tr = heat_flow(eig, zero(), grid, eig.eigenvalue(1), ModalField.basis(eig, 1, 0.7), T=2.0)
    assert np.all(tr.states[:, 0] == 0.7)


@pytest.mark.parametrize("scheme", ["expEuler", "ETDRK2"])
def test_constant_kernel_forcing_drifts_linearly(line, scheme):
    eig, grid = line
    f = constant_mode(eig, 1)
    tr = heat_flow(eig, f, grid, eig.eigenvalue(1), ModalField.zeros(eig), dt=0.01, T=3.0,
                   scheme=scheme)
    assert np.max(np.abs(tr.states[:, 0] - tr.times)) <= 1e-10


def test_one_step_equals_variation_of_constants(line):
    eig, grid = line
    # constant in s, nonconstant in x: every odd mode is forced
    f = constant_kernel(lambda x: np.ones_like(x), 1.0, "one")
    lam, dt = 1.7, 0.3
    F = grid.analyze(np.ones(grid.Q))
    u0 = ModalField(eig, np.full(eig.N, 0.2))
    tr = heat_flow(eig, f, grid, lam, u0, dt=dt, T=dt, scheme="expEuler")
    a = lam - eig.mu
    exact = np.exp(a * dt) * u0.coeffs + np.expm1(a * dt) / a * F
    assert np.max(np.abs(tr.final - exact) / np.maximum(1, np.abs(exact))) <= 1e-14


def _richardson(line, scheme, dts):
    eig, grid = line
    u0 = ModalField.basis(eig, 1) + ModalField.basis(eig, 2, 0.5)
    finals = [heat_flow(eig, arctan(1.0), grid, 1.0, u0, dt=dt, T=1.0, scheme=scheme).final
              for dt in dts]
    return math.log2(np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2]))


def test_etdrk2_second_order(line):
    assert 1.8 <= _richardson(line, "ETDRK2", [0.05, 0.025, 0.0125]) <= 2.2


def test_exp_euler_first_order(line):
    assert 0.8 <= _richardson(line, "expEuler", [0.05, 0.025, 0.0125]) <= 1.2


def test_semigroup_property_bitwise(line):
    eig, grid = line
    u0 = ModalField.basis(eig, 1, 2.0) + ModalField.basis(eig, 3, -1.0)
    whole = heat_flow(eig, arctan(4.0), grid, 1.0, u0, dt=0.01, T=1.5)
    first = heat_flow(eig, arctan(4.0), grid, 1.0, u0, dt=0.01, T=1.0)
    rest = heat_flow(eig, arctan(4.0), grid, 1.0, first.final_state(), dt=0.01, T=0.5, t0=1.0)
    assert np.array_equal(whole.final, rest.final)


def test_dissipativity_bound(line):
    eig, grid = line
    # f == 1: stationary u = x(pi - x)/2 with |u|_H = sqrt(pi^5/120) ~ 1.600
    f = constant_kernel(lambda x: np.ones_like(x), 1.0, "one")
    lam = 0.0
    tr = heat_flow(eig, f, grid, lam, ModalField.basis(eig, 2, 30.0), dt=0.05, T=30.0)
    bound = f.bound * math.sqrt(eig.domain.measure) / (eig.eigenvalue(1) - lam)
    assert tr.norm_H[-1] <= 1.1 * bound
    assert tr.norm_H[-1] == pytest.approx(math.sqrt(math.pi ** 5 / 120), rel=1e-3)
    tr = heat_flow(eig, arctan(3.0), grid, 0.5, ModalField.basis(eig, 1, 50.0), dt=0.05, T=40.0)
    assert tr.norm_H[-1] <= 1.1 * arctan(3.0).bound * math.sqrt(math.pi) / 0.5


def test_harmonic_oscillator(line):
    eig, grid = line
    w0 = WaveState(ModalField.basis(eig, 2), ModalField.zeros(eig))
    tr = wave_flow(eig, zero(), grid, 0.0, 0.0, w0, dt=0.01, T=100.0)
    u, v = tr.states[:, 1], tr.states[:, eig.N + 1]
    energy = 4.0 * u ** 2 + v ** 2
    assert np.max(np.abs(energy - energy[0])) <= 1e-10
    assert np.max(np.abs(u - np.cos(2 * tr.times))) <= 1e-10


def test_damped_wave_energy_decreases(line):
    eig, grid = line
    lam, c = 0.5, 0.2
    w0 = WaveState(ModalField(eig, np.linspace(1, 0, eig.N)), ModalField.basis(eig, 1, 1.0))
    tr = wave_flow(eig, zero(), grid, lam, c, w0, dt=0.01, T=20.0)
    N = eig.N
    u, v = tr.states[:, :N], tr.states[:, N:]
    energy = ((eig.mu - lam) * u ** 2 + v ** 2).sum(axis=1)
    assert np.all(np.diff(energy) <= 1e-13 * energy[0])
    assert energy[-1] < 1e-3 * energy[0]


def test_wave_kernel_drift(line):
    eig, grid = line
    c, k = 1.0, 2
    tr = wave_flow(eig, constant_mode(eig, k), grid, eig.eigenvalue(k), c, WaveState.zeros(eig),
                   dt=0.01, T=20.0)
    t, u = tr.times, tr.states[:, k - 1]
    half = t > 10
    slope = np.polyfit(t[half], u[half], 1)[0]
    assert slope == pytest.approx(1 / (c * eig.eigenvalue(k)), rel=1e-6)


def test_wave_propagator_matches_expm_by_hand():
    from scipy.linalg import expm
    mu = np.array([1.0, 4.0, 9.0])
    E, g1, g2 = wave_propagators(mu, 2.0, 0.5, 0.1)
    for j, m in enumerate(mu):
        M = np.array([[0, 1], [2.0 - m, -0.5 * m]])
        assert np.allclose(E[j], expm(0.1 * M), atol=1e-14)
        # dt phi1(M dt) e2 = M^{-1}(e^{M dt} - I) e2 when M is invertible
        assert np.allclose(g1[j], np.linalg.solve(M, expm(0.1 * M) - np.eye(2))[:, 1], atol=1e-13)


def test_refusals(line):
    eig, grid = line
    u0 = ModalField.zeros(eig)
    with pytest.raises(ValueError, match="backward"):
        heat_flow(eig, zero(), grid, 0.0, u0, dt=0.01, T=-1.0)
    with pytest.raises(ValueError):
        heat_flow(eig, zero(), grid, 0.0, u0, dt=0.1, T=0.01)
    with pytest.raises(ValueError):
        heat_flow(eig, zero(), grid, 0.0, u0, scheme="RK4")
    with pytest.raises(ValueError):
        wave_flow(eig, zero(), grid, 0.0, -1.0, WaveState.zeros(eig))


def test_blowup_flag(line):
    eig, grid = line
    tr = heat_flow(eig, linear(5.0), grid, 0.0, ModalField.basis(eig, 1), dt=0.01, T=10.0,
                   guard=1e3)
    assert tr.status == "blowup"
    assert tr.norm_H[-1] > 1e3 and np.all(tr.norm_H[:-1] <= 1e3)


def test_nan_keeps_last_valid_sample(line):
    eig, grid = line
    bad = Nonlinearity("bad", lambda x, s: np.where(np.abs(s) > 1.2, np.nan, 0 * s), nu=0.0,
                       bound=1.0)
    tr = heat_flow(eig, bad, grid, 3.0, ModalField.basis(eig, 1, 0.5), dt=0.01, T=5.0)
    assert tr.status == "nan"
    assert np.all(np.isfinite(tr.states))
    assert np.all(np.diff(tr.times) > 0)


def test_csv_columns(line, tmp_path):
    eig, grid = line
    w0 = WaveState(ModalField.basis(eig, 1), ModalField.zeros(eig))
    tr = wave_flow(eig, zero(), grid, 0.0, 1.0, w0, dt=0.1, T=0.5)
    path = tmp_path / "w.csv"
    tr.write_csv(path)
    rows = list(csv.reader(open(path)))
    N = eig.N
    assert rows[0] == (["t"] + [f"u_{j}" for j in range(1, N + 1)]
                       + [f"v_{j}" for j in range(1, N + 1)]
                       + ["norm_H", "norm_alpha", "norm_kernel"])
    assert len(rows) == len(tr.times) + 1
    assert float(rows[-1][1]) == tr.final[0]
