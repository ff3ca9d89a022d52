"""Checks of the resonance conditions on a nonlinearity.

Landesman-Lazer (LL1/LL2) and strong resonance (SR1/SR2) are evaluated by
quadrature over the kernel sphere and an s-grid. The geometric conditions
(G1/G2) quantify over unbounded sets, so :func:`check_geometric` is a
seeded falsifier: a "holds" verdict means no violation among the recorded
samples and nothing more.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .nemytskii import Nonlinearity, QuadratureGrid, nemytskii_coeffs
from .semiflow import DEFAULT_ALPHA
from .spectral_core import SpectralDecomposition

CONDITIONS = ("LL1", "LL2", "SR1", "SR2", "G1", "G2")
DEFAULT_R_SCHEDULE = tuple(2.0 ** i for i in range(9))  # 1 .. 256
BATCH = 512


class ConditionInputError(ValueError):
    """The nonlinearity lacks what the requested check needs."""


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    verdict: str  # holds | fails | inconclusive
    margin: float
    witnesses: list = field(default_factory=list)
    parameters: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ConditionReport":
        if d.get("condition") not in CONDITIONS:
            raise ValueError(f"unknown condition {d.get('condition')!r}")
        return cls(d["condition"], d["verdict"], float(d["margin"]), list(d.get("witnesses", [])),
                   dict(d.get("parameters", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def kernel_directions(dim: int, samples: int, seed: int = 0) -> np.ndarray:
    """Unit vectors in R^dim covering the kernel sphere.

    dim 1: exactly +1, -1. dim 2: ``samples`` equally spaced angles.
    Higher: +-basis vectors followed by seeded Gaussian directions.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        n = max(samples, 4)
        th = 2 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(th), np.sin(th)])
    eye = np.eye(dim)
    fixed = np.concatenate([eye, -eye])
    rng = np.random.default_rng(seed)
    extra = rng.standard_normal((max(samples - len(fixed), 0), dim))
    extra /= np.linalg.norm(extra, axis=1, keepdims=True)
    return np.concatenate([fixed, extra])


def _require_resonance(decomp: SpectralDecomposition):
    if decomp.dim_kernel < 1:
        raise ConditionInputError("the kernel X_0 is trivial")


def ll_integral(f: Nonlinearity, grid: QuadratureGrid, coeffs: np.ndarray) -> np.ndarray:
    """int_{u>0} f_+ u + int_{u<0} f_- u for a stack of kernel fields (..., N)."""
    u = grid.synthesize(coeffs)
    fp = f.f_plus(grid.nodes)
    fm = f.f_minus(grid.nodes)
    integrand = np.where(u > 0, fp * u, 0.0) + np.where(u < 0, fm * u, 0.0)
    return grid.integrate(integrand)


def check_landesman_lazer(f: Nonlinearity, decomp: SpectralDecomposition, grid: QuadratureGrid,
                          sphere_samples: int = 64, seed: int = 0
                          ) -> tuple[ConditionReport, ConditionReport]:
    """Reports for (LL1, LL2) over sampled unit kernel directions.

    LL1 margin is min I, LL2 margin is -max I (positive slack when the
    condition holds). I <= 0 violates LL1, I >= 0 violates LL2.
    """
    if f.f_plus is None or f.f_minus is None:
        raise ConditionInputError(f"{f.name}: limits f_+ and f_- must be declared")
    _require_resonance(decomp)
    dirs = kernel_directions(decomp.dim_kernel, sphere_samples, seed)
    coeffs = np.zeros((len(dirs), decomp.eigsys.N))
    coeffs[:, decomp.zero] = dirs
    I = ll_integral(f, grid, coeffs)
    params = {"k": decomp.k, "lambda": decomp.lam, "dim_kernel": decomp.dim_kernel,
              "directions": int(len(dirs)), "sphere_samples": sphere_samples, "seed": seed,
              "nonlinearity": f.name, "f_params": f.params, "min_I": float(I.min()),
              "max_I": float(I.max())}

    def report(name, slack):
        bad = np.flatnonzero(slack <= 0)
        order = bad[np.argsort(slack[bad], kind="stable")][:5]
        witnesses = [{"kernel_direction": dirs[i].tolist(), "I": float(I[i])} for i in order]
        if len(dirs) == 0:
            verdict = "inconclusive"
        else:
            verdict = "fails" if len(bad) else "holds"
        return ConditionReport(name, verdict, float(slack.min()), witnesses, dict(params))

    return report("LL1", I), report("LL2", -I)


def strong_resonance_s_grid(s_probe: float, samples: int) -> np.ndarray:
    half = max(samples // 2, 1)
    pos = np.geomspace(1e-3, s_probe, half)
    return np.concatenate([-pos[::-1], [0.0], pos])


def check_strong_resonance(f: Nonlinearity, grid: QuadratureGrid, s_probe: float = 1e6,
                           samples: int = 401) -> ConditionReport:
    """SR1 (lower envelope) or SR2 (upper envelope), as declared by ``f``.

    Part (a): f(x, s) s against h(x) on nodes x sampled s. Part (b): sign of
    int f_inf. Margin is the smaller of the two directed slacks.
    """
    if f.f_inf is None:
        raise ConditionInputError(f"{f.name}: f_inf required for strong resonance")
    if f.envelope is None:
        raise ConditionInputError(f"{f.name}: envelope h with direction required")
    name = "SR1" if f.envelope_dir == "lower" else "SR2"
    sign = 1.0 if name == "SR1" else -1.0
    s = strong_resonance_s_grid(s_probe, samples)
    Q = len(grid.weights)
    S = np.broadcast_to(s[:, None], (len(s), Q))
    fs = np.asarray(f.func(grid.nodes, S), dtype=float) * S
    h = f.envelope(grid.nodes)
    env_slack = sign * (fs - h)
    integral = float(grid.integrate(f.f_inf(grid.nodes)))
    int_slack = sign * integral
    witnesses = []
    bad = np.argwhere(env_slack < 0)
    if len(bad):
        flat = env_slack[bad[:, 0], bad[:, 1]]
        for i, q in bad[np.argsort(flat, kind="stable")][:5]:
            witnesses.append({"part": "envelope", "x": np.atleast_1d(grid.nodes[q]).tolist(),
                              "s": float(s[i]), "f_s": float(fs[i, q]), "h": float(h[q])})
    if int_slack <= 0:
        witnesses.append({"part": "integral", "integral_f_inf": integral})
    margin = min(float(env_slack.min()), int_slack)
    verdict = "fails" if witnesses else "holds"
    params = {"s_probe": s_probe, "samples": int(len(s)), "n_nodes": Q,
              "envelope_dir": f.envelope_dir, "integral_f_inf": integral,
              "envelope_slack_min": float(env_slack.min()), "nonlinearity": f.name,
              "f_params": f.params}
    return ConditionReport(name, verdict, margin, witnesses, params)


def _ball(rng, n: int, dim: int, radius: float) -> np.ndarray:
    """Uniform samples in the Euclidean ball of R^dim."""
    if dim == 0:
        return np.zeros((n, 0))
    g = rng.standard_normal((n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / dim)
    return g * r[:, None]


def geometric_slack(f: Nonlinearity, grid: QuadratureGrid, x: np.ndarray, y: np.ndarray,
                    z: np.ndarray) -> np.ndarray:
    """<F(x + y), x>_H + <F(x + y), z>_H for stacks of coefficient vectors."""
    out = np.empty(len(x))
    for start in range(0, len(x), BATCH):
        sl = slice(start, start + BATCH)
        F = nemytskii_coeffs(f, grid, x[sl] + y[sl])
        out[sl] = np.einsum("ij,ij->i", F, x[sl] + z[sl])
    return out


def check_geometric(f: Nonlinearity, decomp: SpectralDecomposition, grid: QuadratureGrid,
                    which: str = "G1", B1_radius: float = 1.0, B2_radius: float = 1.0,
                    R_schedule=DEFAULT_R_SCHEDULE, samples: int = 2000, seed: int = 0,
                    alpha: float = DEFAULT_ALPHA) -> ConditionReport:
    """Sampled falsification of G1 (``<F(x+y), x> > -<F(x+y), z>``) or G2 (reversed).

    For each R: x on kernel spheres of radius rho in {R, 2R, 4R}, y uniform in
    the alpha-norm ball of radius B1_radius in X_- + X_+, z uniform in the
    H-ball of radius B2_radius in X_0. The first ``2 * dim X_0`` samples of
    every rho are the axis probes x = +-rho e_i with y = z = 0. The verdict
    is "holds" at the first R without violations and "fails" if every R in
    the schedule has one.
    """
    if which not in ("G1", "G2"):
        raise ValueError("which must be 'G1' or 'G2'")
    if not f.is_bounded:
        raise ConditionInputError(f"{f.name} is unbounded; geometric checks need a bounded F")
    _require_resonance(decomp)
    if B1_radius <= 0 or B2_radius <= 0:
        raise ValueError("ball radii must be positive")
    sched = [float(r) for r in R_schedule]
    if not sched or any(b <= a for a, b in zip(sched, sched[1:])) or sched[0] <= 0:
        raise ValueError("R_schedule must be a positive increasing sequence")

    eig = decomp.eigsys
    N = eig.N
    kdim = decomp.dim_kernel
    off = np.concatenate([decomp.minus, decomp.plus]).astype(int)
    sign = 1.0 if which == "G1" else -1.0
    rng = np.random.default_rng(seed)
    eye = np.eye(kdim)
    axes = np.concatenate([eye, -eye])
    rhos_per_R = 3
    per_rho = max(-(-samples // rhos_per_R), len(axes))

    history = []
    witnesses: list = []
    verdict = "fails"
    final_R = sched[-1]
    margin = math.inf
    for R in sched:
        R_min = math.inf
        axis_hits: list = []
        worst = None
        for rho in (R, 2 * R, 4 * R):
            n_rand = per_rho - len(axes)
            g = rng.standard_normal((n_rand, kdim))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            xdir = np.concatenate([axes, g])
            x = np.zeros((per_rho, N))
            x[:, decomp.zero] = rho * xdir
            y = np.zeros((per_rho, N))
            yb = _ball(rng, n_rand, len(off), B1_radius)
            y[len(axes):, off] = yb / eig.mu[off] ** alpha
            z = np.zeros((per_rho, N))
            z[len(axes):, decomp.zero] = _ball(rng, n_rand, kdim, B2_radius)
            slack = sign * geometric_slack(f, grid, x, y, z)
            R_min = min(R_min, float(slack.min()))
            for i in np.flatnonzero(slack[:len(axes)] <= 0):
                axis_hits.append({"R": R, "rho": rho, "slack": float(slack[i]),
                                  "x_kernel": (rho * xdir[i]).tolist(), "axis_probe": True})
            rand = slack[len(axes):]
            if len(rand) and rand.min() <= 0:
                i = int(np.argmin(rand))
                if worst is None or rand[i] < worst["slack"]:
                    worst = {"R": R, "rho": rho, "slack": float(rand[i]),
                             "x_kernel": (rho * xdir[len(axes) + i]).tolist(),
                             "axis_probe": False,
                             "y_alpha_norm": float(np.linalg.norm(yb[i])),
                             "z_norm": float(np.linalg.norm(z[len(axes) + i, decomp.zero]))}
        R_witness = axis_hits + ([worst] if worst else [])
        history.append({"R": R, "min_slack": R_min, "violations": len(R_witness) > 0})
        margin = R_min
        witnesses = R_witness
        final_R = R
        if not R_witness:
            verdict = "holds"
            break

    params = {"k": decomp.k, "lambda": decomp.lam, "dim_kernel": kdim,
              "B1_radius": B1_radius, "B2_radius": B2_radius, "alpha": alpha,
              "R_schedule": sched, "R_final": final_R, "samples_per_R": per_rho * rhos_per_R,
              "seed": seed, "history": history, "nonlinearity": f.name, "f_params": f.params,
              "qualifier": "sampled"}
    return ConditionReport(which, verdict, margin, witnesses, params)
