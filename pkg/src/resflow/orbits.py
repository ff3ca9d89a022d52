"""Numerical witnesses for connecting orbits.

Equilibria come from damped Newton on the Galerkin residual. Orbits leaving
an equilibrium are approximated by forward shooting along its unstable (and
center) eigendirections; nothing is ever integrated backward in time.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .conditions import check_geometric, check_landesman_lazer, check_strong_resonance
from .conley import ResonantAtZeroError, orbit_verdict
from .nemytskii import Nonlinearity, QuadratureGrid, build_grid, nemytskii_coeffs, parse_nonlinearity
from .semiflow import (DEFAULT_ALPHA, DEFAULT_DT, DEFAULT_GUARD, WaveState, heat_flow,
                       kernel_indices, wave_flow)
from .spectral_core import EigenSystem, ModalField, build_eigensystem, decompose, parse_domain

CONVERGENCE_TOL = 1e-6
DRIFT_R2 = 0.999
CENTER_TOL = 1e-9


@dataclass
class Equilibrium:
    state: ModalField
    residual: float
    rates: np.ndarray  # eigenvalues of the Galerkin Jacobian, ascending
    vectors: np.ndarray  # matching eigenvectors as columns
    iterations: int = 0

    @property
    def unstable_count(self) -> int:
        return int(np.sum(self.rates > CENTER_TOL))

    def to_dict(self) -> dict:
        return {"coeffs": self.state.coeffs.tolist(), "norm_H": self.state.norm(),
                "residual": self.residual, "unstable_count": self.unstable_count,
                "rates": self.rates.tolist(), "iterations": self.iterations}


def residual(eigsys: EigenSystem, f: Nonlinearity, grid: QuadratureGrid, lam: float,
             u: np.ndarray) -> np.ndarray:
    """G(u)_j = (lam - mu_j) u_j + F_j(u)."""
    return (lam - eigsys.mu) * u + nemytskii_coeffs(f, grid, u)


def jacobian(eigsys, f, grid, lam, u, h: float = 1e-7) -> np.ndarray:
    """Forward-difference Jacobian of the residual, symmetrized."""
    N = eigsys.N
    g0 = residual(eigsys, f, grid, lam, u)
    step = h * max(1.0, float(np.linalg.norm(u)))
    probes = u + step * np.eye(N)
    J = (((lam - eigsys.mu) * probes + nemytskii_coeffs(f, grid, probes)) - g0).T / step
    return 0.5 * (J + J.T)


def _newton(eigsys, f, grid, lam, u, tol, max_iter):
    """Damped Newton. Converged means residual < tol and the next Newton step is
    below 10 * tol * max(1, |u|). The step test rejects spurious roots at
    infinity, where a bounded F decays and the residual is small only because
    u is huge, and unresolvable points near degenerate roots."""
    r = residual(eigsys, f, grid, lam, u)
    rn = float(np.linalg.norm(r))
    for it in range(max_iter + 1):
        J = jacobian(eigsys, f, grid, lam, u)
        try:
            du = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            du = np.linalg.lstsq(J, -r, rcond=None)[0]
        if rn < tol and np.linalg.norm(du) <= 10 * tol * max(1.0, float(np.linalg.norm(u))):
            return u, rn, it, True
        if it == max_iter:
            break
        t = 1.0
        while t > 1e-4:
            cand = u + t * du
            rc = residual(eigsys, f, grid, lam, cand)
            rcn = float(np.linalg.norm(rc))
            if np.isfinite(rcn) and rcn < (1 - 1e-4 * t) * rn:
                break
            t *= 0.5
        else:
            break
        u, r, rn = cand, rc, rcn
    return u, rn, it, False


def default_seeds(eigsys: EigenSystem, n_modes: int = 3, amplitudes=(0.5, 1.0, 2.0, 4.0)):
    seeds = [np.zeros(eigsys.N)]
    for j in range(min(n_modes, eigsys.N)):
        for a in amplitudes:
            for sgn in (1.0, -1.0):
                s = np.zeros(eigsys.N)
                s[j] = sgn * a
                seeds.append(s)
    return seeds


def linearize(eigsys, f, grid, lam, u) -> tuple[np.ndarray, np.ndarray]:
    J = jacobian(eigsys, f, grid, lam, np.asarray(u, dtype=float))
    rates, vecs = np.linalg.eigh(J)
    return rates, vecs


def find_equilibria(eigsys: EigenSystem, f: Nonlinearity, grid: QuadratureGrid, lam: float,
                    seeds: Optional[Sequence] = None, tol: float = 1e-10,
                    max_iter: int = 50) -> list[Equilibrium]:
    """Stationary points of the Galerkin system reached by damped Newton from ``seeds``.

    Seeds that fail to converge are dropped. Results within 10 * tol of each
    other are merged; output is sorted by (norm, first nonzero coefficient).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    seeds = default_seeds(eigsys) if seeds is None else seeds
    if len(seeds) == 0:
        raise ValueError("at least one seed is required")
    found: list[Equilibrium] = []
    for seed in seeds:
        u0 = seed.coeffs if isinstance(seed, ModalField) else np.asarray(seed, dtype=float)
        try:
            u, rn, it, ok = _newton(eigsys, f, grid, lam, u0.copy(), tol, max_iter)
        except FloatingPointError:
            continue
        if not ok:
            continue
        if any(np.linalg.norm(e.state.coeffs - u) < 10 * tol for e in found):
            continue
        rates, vecs = linearize(eigsys, f, grid, lam, u)
        found.append(Equilibrium(ModalField(eigsys, u), rn, rates, vecs, it))

    def key(e):
        c = e.state.coeffs
        nz = c[np.abs(c) > 1e-12]
        return (round(e.state.norm(), 9), -float(nz[0]) if len(nz) else 0.0)

    found.sort(key=key)
    return found


@dataclass
class Shot:
    base: int
    direction: list
    classification: str  # converged-to | bounded-nonconvergent | escaped | drift-linear
    target: Optional[int]
    terminal_distance: Optional[float]
    t_final: float
    status: str
    drift_slope: Optional[float] = None
    drift_r2: Optional[float] = None
    refined_distance: Optional[float] = None
    final_norm_H: float = 0.0
    kind: str = "terminal"  # terminal | closest-approach


@dataclass
class ConnectionReport:
    scenario: dict
    equilibria: list
    shots: list
    notes: list = field(default_factory=list)
    verdict: Optional[dict] = None
    conditions: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "equilibria": self.equilibria,
                "shots": [asdict(s) for s in self.shots], "notes": self.notes,
                "verdict": self.verdict, "conditions": self.conditions}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _linear_fit(t: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    A = np.column_stack([t, np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 0.0
    return float(coef[0]), r2


def shoot_unstable(eigsys: EigenSystem, f: Nonlinearity, grid: QuadratureGrid, lam: float,
                   base: Equilibrium | ModalField, equilibria: Sequence[Equilibrium] = (),
                   model: str = "heat", c: float = 1.0, eps: float = 1e-4,
                   directions: Optional[Sequence] = None, T: float = 40.0, dt: float = DEFAULT_DT,
                   tol: float = CONVERGENCE_TOL, guard: float = DEFAULT_GUARD,
                   scheme: str = "ETDRK2", base_id: int = 0,
                   ) -> tuple[list[Shot], list[str]]:
    """Integrate base + eps * d forward for every direction d and classify the endpoints.

    Default directions are +-eigenvectors of the Jacobian at ``base`` with
    rate >= -1e-9 (unstable and center). For the wave model the position is
    perturbed and the velocity starts at zero.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    u_base = base.state.coeffs if isinstance(base, Equilibrium) else np.asarray(base.coeffs)
    notes = []
    if directions is None:
        if isinstance(base, Equilibrium):
            rates, vecs = base.rates, base.vectors
        else:
            rates, vecs = linearize(eigsys, f, grid, lam, u_base)
        idx = np.flatnonzero(rates >= -CENTER_TOL)[::-1]
        directions = []
        for i in idx:
            v = vecs[:, i] * np.sign(vecs[np.argmax(np.abs(vecs[:, i])), i])
            directions += [v, -v]
        if not directions:
            notes.append(f"equilibrium {base_id} is attracting: no unstable or center directions")
    ker = kernel_indices(eigsys, lam)
    shots = []
    for d in directions:
        d = np.asarray(d.coeffs if isinstance(d, ModalField) else d, dtype=float)
        d = d / np.linalg.norm(d)
        u0 = ModalField(eigsys, u_base + eps * d)
        if model == "heat":
            tr = heat_flow(eigsys, f, grid, lam, u0, dt=dt, T=T, scheme=scheme, guard=guard)
            terminal = tr.final
        else:
            tr = wave_flow(eigsys, f, grid, lam, c, WaveState(u0, ModalField.zeros(eigsys)),
                           dt=dt, T=T, scheme=scheme, guard=guard)
            terminal = tr.final[:eigsys.N]
        shots.append(_classify(eigsys, f, grid, lam, tr, terminal, equilibria, ker, tol, base_id,
                               d, model))
    return shots, notes


def _classify(eigsys, f, grid, lam, tr, terminal, equilibria, ker, tol, base_id, d, model):
    shot = Shot(base_id, d.tolist(), "bounded-nonconvergent", None, None, float(tr.times[-1]),
                tr.status, final_norm_H=float(tr.norm_H[-1]))
    if tr.status != "ok":
        shot.classification = "escaped"
        return shot
    N = eigsys.N
    if equilibria:
        dists = [float(np.linalg.norm(terminal - e.state.coeffs)) for e in equilibria]
        j = int(np.argmin(dists))
        shot.target, shot.terminal_distance = j, dists[j]
        n = len(tr.times)
        ref = tr.states[max(0, n - 1 - n // 10), :N]
        earlier = float(np.linalg.norm(ref - equilibria[j].state.coeffs))
        if model == "wave":
            moving = float(np.linalg.norm(tr.final[N:]))
        else:
            moving = 0.0
        if dists[j] < tol and dists[j] <= earlier and moving < tol:
            u, *_ = _newton(eigsys, f, grid, lam, terminal.copy(), 1e-10, 20)
            shot.refined_distance = float(np.linalg.norm(u - equilibria[j].state.coeffs))
            if shot.refined_distance < 10 * tol:
                shot.classification = "converged-to"
                return shot
    if len(ker):
        half = len(tr.times) // 2
        t, y = tr.times[half:], tr.norm_kernel[half:]
        if len(t) >= 3:
            slope, r2 = _linear_fit(t, y)
            shot.drift_slope, shot.drift_r2 = slope, r2
            if r2 > DRIFT_R2 and slope > 1e-8:
                shot.classification = "drift-linear"
    return shot


def _fate(tr, N: int, lead: int) -> float:
    return float(np.sign(tr.final[lead]))


def bisect_connection(eigsys: EigenSystem, f: Nonlinearity, grid: QuadratureGrid, lam: float,
                      base: Equilibrium, equilibria: Sequence[Equilibrium], model: str = "heat",
                      c: float = 1.0, eps: float = 0.1, n_angles: int = 8, T: float = 20.0,
                      dt: float = DEFAULT_DT, tol: float = CONVERGENCE_TOL, max_bisect: int = 60,
                      scheme: str = "ETDRK2", base_id: int = 0) -> list[Shot]:
    """Shots on the circle spanned by the two leading unstable directions of ``base``.

    Where the sign of the terminal leading coefficient flips between
    neighbouring angles, the circle crosses the stable set of another
    equilibrium; bisection on the angle steers the shot onto it. Each result
    is reported at its closest approach to a nonzero equilibrium and counts
    as converged-to only if Newton started there lands on that equilibrium.

    A fairly large ``eps`` is deliberate: when the weak unstable rate at the
    base is much smaller than the strong one, rounding in the angle is
    amplified during the slow departure and limits how close a shot gets.
    """
    unstable = np.flatnonzero(base.rates > CENTER_TOL)[::-1]
    targets = [(i, e) for i, e in enumerate(equilibria) if i != base_id]
    if len(unstable) < 2 or not targets:
        return []
    V1, V2 = base.vectors[:, unstable[0]], base.vectors[:, unstable[1]]
    N = eigsys.N
    lead = int(np.argmax(np.abs(V1)))

    def run(theta):
        d = math.cos(theta) * V1 + math.sin(theta) * V2
        u0 = ModalField(eigsys, base.state.coeffs + eps * d)
        if model == "heat":
            tr = heat_flow(eigsys, f, grid, lam, u0, dt=dt, T=T, scheme=scheme)
        else:
            tr = wave_flow(eigsys, f, grid, lam, c, WaveState(u0, ModalField.zeros(eigsys)),
                           dt=dt, T=T, scheme=scheme)
        return d, tr

    def closest(tr):
        best = (math.inf, None, None)
        for i, e in targets:
            dist = np.linalg.norm(tr.states[:, :N] - e.state.coeffs, axis=1)
            r = int(np.argmin(dist))
            if dist[r] < best[0]:
                best = (float(dist[r]), i, r)
        return best

    angles = 2 * np.pi * np.arange(n_angles) / n_angles
    fates = [_fate(run(a)[1], N, lead) for a in angles]
    shots = []
    for a_idx in range(n_angles):
        lo, hi = angles[a_idx], angles[a_idx] + 2 * np.pi / n_angles
        f_lo, f_hi = fates[a_idx], fates[(a_idx + 1) % n_angles]
        if f_lo == f_hi:
            continue
        best = None
        for _ in range(max_bisect):
            mid = 0.5 * (lo + hi)
            d, tr = run(mid)
            dist, target, r = closest(tr)
            if best is None or dist < best[0]:
                best = (dist, target, r, d, tr)
            if dist < tol or hi - lo < 1e-15:
                break
            if _fate(tr, N, lead) == f_lo:
                lo = mid
            else:
                hi = mid
        dist, target, r, d, tr = best
        shot = Shot(base_id, d.tolist(), "bounded-nonconvergent", target, dist,
                    float(tr.times[r]), tr.status, final_norm_H=float(tr.norm_H[r]),
                    kind="closest-approach")
        u, *_ = _newton(eigsys, f, grid, lam, tr.states[r, :N].copy(), 1e-10, 20)
        shot.refined_distance = float(np.linalg.norm(u - equilibria[target].state.coeffs))
        if dist < tol and shot.refined_distance < 10 * tol:
            shot.classification = "converged-to"
        shots.append(shot)
    return shots


def drift_demo(eigsys: EigenSystem, k: int, model: str = "heat", T: float = 10.0,
               dt: float = DEFAULT_DT, lam: Optional[float] = None, source_mode: Optional[int] = None,
               c: float = 1.0) -> dict:
    """Flow with F identically y0 = phi_m from 0, compared with its closed form.

    By default y0 is the first mode of the distinct eigenvalue lambda_k and
    lam = lambda_k, so the kernel coefficient of the heat flow equals t and
    the wave kernel position equals t/(c mu) - (1 - exp(-c mu t))/(c mu)^2.
    Off resonance every coefficient follows its scalar ODE.
    """
    from .nemytskii import constant_mode

    decomp = decompose(eigsys, k)
    lam = decomp.lam if lam is None else float(lam)
    m = int(decomp.zero[0]) + 1 if source_mode is None else int(source_mode)
    j = m - 1
    f = constant_mode(eigsys, m)
    grid = build_grid(eigsys.domain, eigsys)
    a = lam - eigsys.mu[j]
    if model == "heat":
        tr = heat_flow(eigsys, f, grid, lam, ModalField.zeros(eigsys), dt=dt, T=T,
                       scheme="expEuler", guard=math.inf)
        coef = tr.states[:, j]
        t = tr.times
        exact = t if a == 0 else np.expm1(a * t) / a
    elif model == "wave":
        tr = wave_flow(eigsys, f, grid, lam, c, WaveState.zeros(eigsys), dt=dt, T=T,
                       scheme="expEuler", guard=math.inf)
        coef = tr.states[:, j]
        t = tr.times
        exact = _wave_forced_position(a, c * eigsys.mu[j], t)
    else:
        raise ValueError("model must be 'heat' or 'wave'")
    others = np.delete(tr.states[:, :eigsys.N], j, axis=1)
    ker = decomp.zero
    report = {
        "model": model, "k": k, "lambda": lam, "source_mode": m, "T": T, "dt": dt,
        "resonant": bool(a == 0), "max_deviation": float(np.max(np.abs(coef - exact))),
        "max_relative_deviation": float(np.max(np.abs(coef - exact) / np.maximum(1.0, np.abs(exact)))),
        "final_coefficient": float(coef[-1]), "final_exact": float(exact[-1]),
        "max_other_coefficient": float(np.abs(others).max()) if others.size else 0.0,
        "kernel_projection_final": float(np.linalg.norm(tr.states[-1, ker])),
    }
    if model == "heat":
        increments = np.diff(coef)
        report["max_increment_defect"] = float(np.max(np.abs(increments - dt))) if a == 0 else None
    else:
        half = len(t) // 2
        slope, r2 = _linear_fit(t[half:], coef[half:])
        report["fitted_slope"] = slope
        report["expected_slope"] = float(1.0 / (c * eigsys.mu[j])) if a == 0 else None
        report["fit_r2"] = r2
    return report


def _wave_forced_position(a: float, d: float, t: np.ndarray) -> np.ndarray:
    """Position of u'' = a u - d u' + 1 from rest, via the 2x2 eigen-decomposition."""
    if a == 0:
        if d == 0:
            return 0.5 * t ** 2
        return t / d - (-np.expm1(-d * t)) / d ** 2
    # particular solution -1/a plus homogeneous part matching u(0) = u'(0) = 0
    disc = complex(d * d + 4 * a) ** 0.5
    r1, r2 = (-d + disc) / 2, (-d - disc) / 2
    if abs(r1 - r2) < 1e-12:
        r = r1
        A = 1 / a
        B = -r / a
        return np.real(-1 / a + (A + B * t) * np.exp(r * t))
    # u = -1/a + C1 e^{r1 t} + C2 e^{r2 t}, C1 + C2 = 1/a, r1 C1 + r2 C2 = 0
    C1 = (r2 / a) / (r2 - r1)
    C2 = 1 / a - C1
    return np.real(-1 / a + C1 * np.exp(r1 * t) + C2 * np.exp(r2 * t))


@dataclass
class Scenario:
    domain: str = "interval:pi"
    N: int = 32
    f: str = "arctan:beta=4"
    k: int = 1
    model: str = "heat"
    c: float = 1.0
    dt: float = DEFAULT_DT
    T: float = 40.0
    alpha: float = DEFAULT_ALPHA
    B1_radius: float = 1.0
    B2_radius: float = 1.0
    samples: int = 2000
    sphere_samples: int = 64
    seed: int = 0
    eps: float = 1e-4
    tol: float = CONVERGENCE_TOL
    guard: float = DEFAULT_GUARD
    route: str = "auto"  # auto | LL | SR | G
    bisect: bool = True
    bisect_eps: float = 0.1
    lam: Optional[float] = None  # defaults to lambda_k; other values skip the index verdict


def run_condition_checks(f, decomp, grid, route="auto", alpha=DEFAULT_ALPHA, B1_radius=1.0,
                         B2_radius=1.0, samples=2000, sphere_samples=64, seed=0) -> list:
    reports = []
    if route in ("auto", "LL") and f.f_plus is not None and f.f_minus is not None:
        reports += list(check_landesman_lazer(f, decomp, grid, sphere_samples, seed))
    if route in ("auto", "SR") and f.f_inf is not None and f.envelope is not None:
        reports.append(check_strong_resonance(f, grid))
    if route in ("auto", "G") and f.is_bounded:
        for which in ("G1", "G2"):
            reports.append(check_geometric(f, decomp, grid, which, B1_radius, B2_radius,
                                           samples=samples, seed=seed, alpha=alpha))
    return reports


def search_connections(scenario: Scenario) -> ConnectionReport:
    """Condition checks, index verdict, equilibria and shooting for one scenario."""
    domain = parse_domain(scenario.domain)
    eig = build_eigensystem(domain, scenario.N)
    grid = build_grid(domain, eig)
    f = parse_nonlinearity(scenario.f, eig)
    decomp = decompose(eig, scenario.k)
    lam = decomp.lam
    notes = []
    reports = []
    verdict = None
    if scenario.lam is not None and abs(scenario.lam - lam) > 1e-9 * max(1.0, abs(lam)):
        lam = scenario.lam
        notes.append(f"lam = {lam:g} is not the resonant eigenvalue lambda_{scenario.k}; "
                     "no resonance checks or index verdict")
    elif f.is_bounded:
        reports = run_condition_checks(f, decomp, grid, scenario.route, scenario.alpha,
                                       scenario.B1_radius, scenario.B2_radius, scenario.samples,
                                       scenario.sphere_samples, scenario.seed)
        try:
            verdict = orbit_verdict(eig, scenario.k, f.nu, reports, scenario.model).to_dict()
        except (ResonantAtZeroError, ValueError) as exc:
            notes.append(f"verdict engine: {exc}")
    else:
        notes.append(f"{f.name} is unbounded: resonance conditions and index formulas do not "
                     "apply; shooting only")

    equilibria = find_equilibria(eig, f, grid, lam)
    shots: list[Shot] = []
    zero_eq = [i for i, e in enumerate(equilibria) if e.state.norm() < 10 * 1e-10]
    if zero_eq:
        bases = [(i, equilibria[i]) for i in zero_eq]
    else:
        notes.append("0 is not an equilibrium; shooting from the state 0 as a base point")
        bases = [(-1, ModalField.zeros(eig))]
    bases += [(i, e) for i, e in enumerate(equilibria) if i not in zero_eq]
    for bid, base in bases:
        s, n = shoot_unstable(eig, f, grid, lam, base, equilibria, scenario.model, scenario.c,
                              scenario.eps, None, scenario.T, scenario.dt, scenario.tol,
                              scenario.guard, base_id=bid)
        shots += s
        notes += n
        if isinstance(base, Equilibrium) and scenario.bisect:
            shots += bisect_connection(eig, f, grid, lam, base, equilibria, scenario.model,
                                       scenario.c, scenario.bisect_eps, T=min(scenario.T, 20.0),
                                       dt=scenario.dt, tol=scenario.tol, base_id=bid)
    if verdict and verdict["conclusion"] == "orbit-exists":
        notes.append("the index criterion guarantees a nonzero compact orbit tending to 0 in "
                     "forward or backward time; the shots are numerical evidence only")
    notes.append(f"guard radius {scenario.guard:g} is a heuristic stand-in for the isolating "
                 "neighborhood, not the set whose index was computed")
    return ConnectionReport(asdict(scenario), [e.to_dict() for e in equilibria], shots, notes,
                            verdict, [r.to_dict() for r in reports])
