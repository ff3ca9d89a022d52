import json
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from resflow import (ConditionReport, arctan, check_geometric, check_landesman_lazer,
                     check_strong_resonance, constant_mode, cubic, decompose, saturating)
from resflow.conditions import ConditionInputError, kernel_directions

# quad of (pi/2)|phi_1| over (0, pi); equals sqrt(2 pi)
LL_ORACLE = 2.5066282746310002


def test_ll_arctan(line):
    eig, grid = line
    ll1, ll2 = check_landesman_lazer(arctan(1.0), decompose(eig, 1), grid)
    assert ll1.verdict == "holds" and ll2.verdict == "fails"
    assert abs(ll1.margin - LL_ORACLE) <= 1e-6
    assert ll1.parameters["min_I"] == pytest.approx(LL_ORACLE, abs=1e-6)
    assert ll1.parameters["max_I"] == pytest.approx(LL_ORACLE, abs=1e-6)


def test_ll_sign_flip(line):
    eig, grid = line
    d = decompose(eig, 1)
    ll1, ll2 = check_landesman_lazer(arctan(-1.0), d, grid)
    assert ll1.verdict == "fails" and ll2.verdict == "holds"
    assert ll2.parameters["max_I"] == pytest.approx(-LL_ORACLE, abs=1e-6)
    # the negated f swaps the roles exactly
    m1, m2 = check_landesman_lazer(arctan(1.0).negated(), d, grid)
    assert (m1.margin, m2.margin) == (ll1.margin, ll2.margin)


def test_ll_second_mode_uses_nodal_split(line):
    eig, grid = line
    # phi_2 changes sign at pi/2; (pi/2) int |phi_2| is again sqrt(2 pi)
    ll1, _ = check_landesman_lazer(arctan(1.0), decompose(eig, 2), grid)
    assert ll1.margin == pytest.approx(LL_ORACLE, abs=1e-6)


def test_ll_saturating_zero_limits(line):
    eig, grid = line
    ll1, ll2 = check_landesman_lazer(saturating(4.0), decompose(eig, 1), grid)
    assert ll1.verdict == ll2.verdict == "fails"
    assert ll1.margin == 0.0 and ll2.margin == 0.0


def test_ll_on_square_kernel_circle(square):
    eig, grid = square
    ll1, _ = check_landesman_lazer(arctan(1.0), decompose(eig, 2), grid, sphere_samples=32)
    assert ll1.verdict == "holds"
    assert ll1.parameters["directions"] >= 32


@pytest.mark.parametrize("beta, cond", [(4.0, "SR1"), (-4.0, "SR2")])
def test_strong_resonance_saturating(line, beta, cond):
    _, grid = line
    rep = check_strong_resonance(saturating(beta), grid)
    assert rep.condition == cond and rep.verdict == "holds"
    assert rep.parameters["integral_f_inf"] == pytest.approx(math.copysign(4 * math.pi, beta),
                                                             rel=1e-12)


def test_strong_resonance_needs_f_inf(line):
    _, grid = line
    with pytest.raises(ConditionInputError, match="f_inf required"):
        check_strong_resonance(arctan(1.0), grid)


def test_unbounded_f_refused(line):
    eig, grid = line
    d = decompose(eig, 1)
    with pytest.raises(ConditionInputError):
        check_geometric(cubic(), d, grid)
    with pytest.raises(ConditionInputError):
        check_landesman_lazer(cubic(), d, grid)


@pytest.mark.parametrize("k", [1, 2])
def test_constant_kernel_violates_both(line, k):
    eig, grid = line
    d = decompose(eig, k)
    f = constant_mode(eig, k)
    for which, sign in (("G1", -1.0), ("G2", 1.0)):
        rep = check_geometric(f, d, grid, which, samples=300)
        assert rep.verdict == "fails"
        probes = [w for w in rep.witnesses if w["axis_probe"]]
        R = rep.parameters["R_final"]
        assert any(w["x_kernel"] == [sign * R] for w in probes)
        # the slack of x = -+R phi_k is exactly -R (left side linear, right side zero)
        w = next(w for w in probes if w["rho"] == R)
        assert w["slack"] == pytest.approx(-R, rel=1e-12)


def _dense_slack(beta, R, n, seed):
    """<F(x+y), x+z> on a uniform trapezoid grid, independent of the library quadrature."""
    x = np.linspace(0.0, math.pi, 4001)
    modes = np.sqrt(2 / math.pi) * np.sin(np.outer(np.arange(1, 33), x))
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(n):
        xk = R * (2.0 ** rng.integers(0, 3)) * rng.choice([-1.0, 1.0])
        y = rng.normal(size=31)
        y *= rng.uniform() ** (1 / 31) / np.linalg.norm(np.arange(2, 33) ** 1.8 * y)
        z = rng.uniform(-1, 1)
        u = xk * modes[0] + y @ modes[1:]
        val = trapezoid(beta * np.arctan(u) * modes[0], x) * (xk + z)
        worst = min(worst, val)
    return worst


def test_arctan_g1_holds_and_dense_oracle_agrees(line):
    eig, grid = line
    rep = check_geometric(arctan(1.0), decompose(eig, 1), grid, "G1", samples=2000)
    assert rep.holds and rep.parameters["R_final"] <= 64
    assert rep.parameters["qualifier"] == "sampled"
    assert _dense_slack(1.0, 64.0, 3000, seed=11) > 0


def test_saturating_g1_holds(line):
    eig, grid = line
    rep = check_geometric(saturating(4.0), decompose(eig, 1), grid, "G1", samples=2000)
    assert rep.holds


def test_sampled_holds_records_coverage(line):
    eig, grid = line
    rep = check_geometric(arctan(1.0), decompose(eig, 1), grid, "G1", samples=300)
    for key in ("samples_per_R", "seed", "R_schedule", "B1_radius", "B2_radius", "history"):
        assert key in rep.parameters


def test_fails_iff_violating_witness(line):
    eig, grid = line
    d = decompose(eig, 1)
    for f in (arctan(1.0), saturating(4.0), constant_mode(eig, 1)):
        for which in ("G1", "G2"):
            rep = check_geometric(f, d, grid, which, samples=200)
            assert (rep.verdict == "fails") == any(w["slack"] <= 0 for w in rep.witnesses)


def test_report_roundtrip(line):
    eig, grid = line
    rep = check_landesman_lazer(arctan(1.0), decompose(eig, 1), grid)[0]
    back = ConditionReport.from_dict(json.loads(rep.to_json()))
    assert back == rep


def test_kernel_directions_unit():
    for dim in (1, 2, 3):
        d = kernel_directions(dim, 16, seed=0)
        assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
    assert kernel_directions(1, 16).tolist() == [[1.0], [-1.0]]
