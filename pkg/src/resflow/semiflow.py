"""Exponential integrators for the heat semiflow

    u' = -A u + lam u + F(u)

and for the strongly damped wave semiflow in first-order form

    (u, v)' = (v, -A(u + c v) + lam u + F(u)).

Both linear parts are diagonal (heat) or 2x2 block diagonal (wave) in the
eigenbasis, so the linear semigroup is applied exactly and F enters through
phi-function weights.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .nemytskii import Nonlinearity, QuadratureGrid, nemytskii_coeffs
from .spectral_core import EigenSystem, ModalField

SCHEMES = ("expEuler", "ETDRK2")
DEFAULT_DT = 1e-2
DEFAULT_GUARD = 1e6
DEFAULT_ALPHA = 0.9


def phi1(z):
    """(e^z - 1) / z, with a Taylor branch for |z| < 1e-5."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-5
    zs = np.where(small, 1.0, z)
    series = 1 + z / 2 * (1 + z / 3 * (1 + z / 4 * (1 + z / 5)))
    out = np.where(small, series, np.expm1(zs) / zs)
    return out if out.ndim else float(out)


def phi2(z):
    """(e^z - 1 - z) / z^2; the series branch is wider because of cancellation."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 0.1
    zs = np.where(small, 1.0, z)
    series = np.zeros_like(z)
    term = np.full_like(z, 0.5)
    for n in range(3, 13):
        series = series + term
        term = term * z / n
    out = np.where(small, series, (np.expm1(zs) - zs) / zs ** 2)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class WaveState:
    u: ModalField
    v: ModalField

    def __post_init__(self):
        if not self.u.eigsys.compatible(self.v.eigsys):
            raise ValueError("position and velocity use different eigensystems")

    @classmethod
    def zeros(cls, eigsys: EigenSystem) -> "WaveState":
        return cls(ModalField.zeros(eigsys), ModalField.zeros(eigsys))

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.u.coeffs, self.v.coeffs])


@dataclass
class Trajectory:
    """Sampled orbit. ``states`` rows hold u (heat) or [u, v] (wave).

    Diagnostics: heat reports |u|_H, |u|_alpha, |P u|_H. Wave reports the
    H x H norm of (u, v), the E-norm sqrt(|u|_alpha^2 + |v|^2) and |P u|_H,
    where P projects onto Ker(lam I - A) (zero if lam is not an eigenvalue).
    """
    model: str
    params: dict
    times: np.ndarray
    states: np.ndarray
    norm_H: np.ndarray
    norm_alpha: np.ndarray
    norm_kernel: np.ndarray
    status: str = "ok"  # ok | blowup | nan
    message: str = ""
    eigsys: Optional[EigenSystem] = field(default=None, repr=False)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def final_state(self):
        N = self.eigsys.N
        if self.model == "heat":
            return ModalField(self.eigsys, self.states[-1])
        return WaveState(ModalField(self.eigsys, self.states[-1, :N]),
                         ModalField(self.eigsys, self.states[-1, N:]))

    def summary(self) -> dict:
        return {
            "model": self.model,
            "params": self.params,
            "status": self.status,
            "message": self.message,
            "n_samples": int(len(self.times)),
            "t_final": float(self.times[-1]),
            "final_state": self.states[-1].tolist(),
            "final_norm_H": float(self.norm_H[-1]),
            "final_norm_alpha": float(self.norm_alpha[-1]),
            "final_norm_kernel": float(self.norm_kernel[-1]),
            "max_norm_H": float(self.norm_H.max()),
        }

    def write_csv(self, path) -> None:
        N = self.eigsys.N
        header = ["t"] + [f"u_{j}" for j in range(1, N + 1)]
        if self.model == "wave":
            header += [f"v_{j}" for j in range(1, N + 1)]
        header += ["norm_H", "norm_alpha", "norm_kernel"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in range(len(self.times)):
                row = [self.times[r], *self.states[r], self.norm_H[r], self.norm_alpha[r],
                       self.norm_kernel[r]]
                w.writerow([repr(float(v)) for v in row])


def kernel_indices(eigsys: EigenSystem, lam: float, tol: float = 1e-9) -> np.ndarray:
    """Modes with mu_j == lam (relative tolerance ``tol``)."""
    return np.flatnonzero(np.abs(eigsys.mu - lam) <= tol * max(1.0, abs(lam)))


def _steps(dt: float, T: float) -> int:
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"dt must be positive, got {dt}")
    if T < 0:
        raise ValueError("backward-in-time integration is refused (ill-posed)")
    if T < dt:
        raise ValueError(f"T={T} is shorter than one step dt={dt}")
    n = int(round(T / dt))
    return n


class _HeatStepper:
    def __init__(self, eigsys, f, grid, lam, dt, scheme):
        if scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        a = lam - eigsys.mu
        self.E = np.exp(a * dt)
        self.W1 = dt * phi1(a * dt)
        self.W2 = dt * phi2(a * dt)
        self.f, self.grid, self.scheme = f, grid, scheme

    def __call__(self, u):
        Fu = nemytskii_coeffs(self.f, self.grid, u)
        a = self.E * u + self.W1 * Fu
        if self.scheme == "expEuler":
            return a
        return a + self.W2 * (nemytskii_coeffs(self.f, self.grid, a) - Fu)


def wave_propagators(mu: np.ndarray, lam: float, c: float, dt: float):
    """Per-mode exact exponential of M_j dt, M_j = [[0, 1], [lam - mu_j, -c mu_j]].

    Returns (E, g1, g2): E (N, 2, 2) = exp(M dt); g1, g2 (N, 2) are
    dt*phi1(M dt) e2 and dt*phi2(M dt) e2, obtained from one augmented
    4x4 exponential per mode.
    """
    N = len(mu)
    aug = np.zeros((N, 4, 4))
    aug[:, 0, 1] = dt
    aug[:, 1, 0] = (lam - mu) * dt
    aug[:, 1, 1] = -c * mu * dt
    aug[:, 1, 2] = 1.0
    aug[:, 2, 3] = 1.0
    X = expm(aug)
    return X[:, :2, :2], dt * X[:, :2, 2], dt * X[:, :2, 3]


class _WaveStepper:
    def __init__(self, eigsys, f, grid, lam, c, dt, scheme):
        if scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        self.E, self.g1, self.g2 = wave_propagators(eigsys.mu, lam, c, dt)
        self.N = eigsys.N
        self.f, self.grid, self.scheme = f, grid, scheme

    def _lin(self, w):
        u, v = w[:self.N], w[self.N:]
        return (self.E[:, 0, 0] * u + self.E[:, 0, 1] * v,
                self.E[:, 1, 0] * u + self.E[:, 1, 1] * v)

    def __call__(self, w):
        N = self.N
        Fu = nemytskii_coeffs(self.f, self.grid, w[:N])
        lu, lv = self._lin(w)
        a = np.concatenate([lu + self.g1[:, 0] * Fu, lv + self.g1[:, 1] * Fu])
        if self.scheme == "expEuler":
            return a
        dF = nemytskii_coeffs(self.f, self.grid, a[:N]) - Fu
        return a + np.concatenate([self.g2[:, 0] * dF, self.g2[:, 1] * dF])


def _integrate(model, stepper, eigsys, w0, dt, n, params, alpha, guard, t0, save_every, lam):
    ker = kernel_indices(eigsys, lam)
    N = eigsys.N
    weight = eigsys.mu ** alpha

    def diag(w):
        if model == "heat":
            return (np.linalg.norm(w), np.linalg.norm(weight * w), np.linalg.norm(w[ker]))
        u, v = w[:N], w[N:]
        return (math.hypot(np.linalg.norm(u), np.linalg.norm(v)),
                math.hypot(np.linalg.norm(weight * u), np.linalg.norm(v)),
                np.linalg.norm(u[ker]))

    times, states, diags = [t0], [w0.copy()], [diag(w0)]
    w = w0.copy()
    status, message = "ok", ""
    for i in range(1, n + 1):
        try:
            w_new = stepper(w)
        except FloatingPointError as exc:
            status, message = "nan", str(exc)
            break
        if not np.all(np.isfinite(w_new)):
            status, message = "nan", f"non-finite state at step {i}"
            break
        d = diag(w_new)
        w = w_new
        if d[0] > guard:
            times.append(t0 + i * dt)
            states.append(w.copy())
            diags.append(d)
            status, message = "blowup", f"norm {d[0]:.3e} exceeded guard radius {guard:g} at step {i}"
            break
        if i % save_every == 0 or i == n:
            times.append(t0 + i * dt)
            states.append(w.copy())
            diags.append(d)
    diags = np.array(diags)
    return Trajectory(model, params, np.array(times), np.array(states), diags[:, 0], diags[:, 1],
                      diags[:, 2], status, message, eigsys)


def heat_flow(eigsys: EigenSystem, f: Nonlinearity, grid: QuadratureGrid, lam: float,
              u0: ModalField, dt: float = DEFAULT_DT, T: float = 1.0, scheme: str = "ETDRK2",
              alpha: float = DEFAULT_ALPHA, guard: float = DEFAULT_GUARD, t0: float = 0.0,
              save_every: int = 1) -> Trajectory:
    """Integrate u' = -A u + lam u + F(u) forward from u0 over [t0, t0 + T]."""
    if not eigsys.compatible(u0.eigsys):
        raise ValueError("initial field does not belong to eigsys")
    n = _steps(dt, T)
    stepper = _HeatStepper(eigsys, f, grid, lam, dt, scheme)
    params = {"lambda": lam, "dt": dt, "T": T, "scheme": scheme, "alpha": alpha,
              "f": f.name, "f_params": f.params}
    return _integrate("heat", stepper, eigsys, np.array(u0.coeffs, dtype=float), dt, n, params,
                      alpha, guard, t0, save_every, lam)


def wave_flow(eigsys: EigenSystem, f: Nonlinearity, grid: QuadratureGrid, lam: float, c: float,
              w0: WaveState, dt: float = DEFAULT_DT, T: float = 1.0, scheme: str = "ETDRK2",
              alpha: float = DEFAULT_ALPHA, guard: float = DEFAULT_GUARD, t0: float = 0.0,
              save_every: int = 1) -> Trajectory:
    """Integrate the strongly damped wave equation in first-order form from w0."""
    if c < 0:
        raise ValueError("damping c must be nonnegative")
    if not eigsys.compatible(w0.u.eigsys):
        raise ValueError("initial state does not belong to eigsys")
    n = _steps(dt, T)
    stepper = _WaveStepper(eigsys, f, grid, lam, c, dt, scheme)
    params = {"lambda": lam, "c": c, "dt": dt, "T": T, "scheme": scheme, "alpha": alpha,
              "f": f.name, "f_params": f.params}
    return _integrate("wave", stepper, eigsys, w0.to_array(), dt, n, params, alpha, guard, t0,
                      save_every, lam)
