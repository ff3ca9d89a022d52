"""Scalar nonlinearities f(x, s), their superposition (Nemytskii) operator in
modal coordinates, and sampled checks of the standing boundedness assumption.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .spectral_core import EigenSystem, ModalField, SpectralDomain, parse_number

ORTHONORMALITY_TOL = 1e-10

XFunc = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Nonlinearity:
    """f(x, s) plus the metadata the condition checkers rely on.

    ``func(x, s)`` must broadcast: ``x`` holds quadrature nodes (shape (Q,)
    or (Q, 2)) and ``s`` has trailing axis Q. The optional limit functions
    take nodes only. ``bound`` is the declared sup |f|, ``None`` when f is
    unbounded. ``envelope`` is h(x) with ``envelope_dir`` "lower"
    (f s >= h) or "upper" (f s <= h).
    """
    name: str
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    nu: float
    bound: Optional[float] = None
    f_plus: Optional[XFunc] = None
    f_minus: Optional[XFunc] = None
    f_inf: Optional[XFunc] = None
    envelope: Optional[XFunc] = None
    envelope_dir: Optional[str] = None
    vanishes_at_zero: bool = True
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.envelope is not None and self.envelope_dir not in ("lower", "upper"):
            raise ValueError("envelope_dir must be 'lower' or 'upper'")

    @property
    def is_bounded(self) -> bool:
        return self.bound is not None

    def __call__(self, x, s):
        return self.func(x, s)

    def negated(self) -> "Nonlinearity":
        """-f, with limits, envelope and its direction flipped accordingly."""
        def neg(g):
            return None if g is None else (lambda *a, _g=g: -_g(*a))
        flip = {"lower": "upper", "upper": "lower", None: None}
        return replace(
            self, name=f"-{self.name}", func=neg(self.func), nu=-self.nu,
            f_plus=neg(self.f_plus), f_minus=neg(self.f_minus), f_inf=neg(self.f_inf),
            envelope=neg(self.envelope), envelope_dir=flip[self.envelope_dir],
            params={**self.params, "negated": not self.params.get("negated", False)},
        )


def _const(value: float) -> XFunc:
    return lambda x: np.full(np.shape(x)[:1], float(value))


def arctan(beta: float = 1.0) -> Nonlinearity:
    """beta * arctan(s): bounded, with limits +-beta*pi/2 (Landesman-Lazer regime)."""
    beta = float(beta)
    return Nonlinearity(
        name="arctan", func=lambda x, s: beta * np.arctan(s), nu=beta,
        bound=abs(beta) * math.pi / 2,
        f_plus=_const(beta * math.pi / 2), f_minus=_const(-beta * math.pi / 2),
        params={"beta": beta},
    )


def saturating(beta: float = 1.0) -> Nonlinearity:
    """beta * s / (1 + s^2): zero limits, f s -> beta (strong-resonance regime)."""
    beta = float(beta)
    return Nonlinearity(
        name="saturating", func=lambda x, s: beta * s / (1.0 + s * s), nu=beta,
        bound=abs(beta) / 2, f_plus=_const(0.0), f_minus=_const(0.0), f_inf=_const(beta),
        envelope=_const(0.0), envelope_dir="lower" if beta >= 0 else "upper",
        params={"beta": beta},
    )


def constant_kernel(y0: XFunc, sup_norm: float, label: str = "") -> Nonlinearity:
    """f(x, s) = y0(x), independent of s. Used with y0 in the resonant kernel."""
    return Nonlinearity(
        name="constant_kernel",
        func=lambda x, s: np.broadcast_to(y0(x), np.shape(s)).copy(),
        nu=0.0, bound=float(sup_norm), f_plus=y0, f_minus=y0,
        vanishes_at_zero=False, params={"y0": label},
    )


def constant_mode(eigsys: EigenSystem, mode: int = 1, amplitude: float = 1.0) -> Nonlinearity:
    """``constant_kernel`` with y0 = amplitude * phi_mode (mode counted from 1)."""
    j = mode - 1
    sub = _single_mode(eigsys, j)
    y0 = lambda x: amplitude * sub.eval_modes(x)[0]
    L = eigsys.domain.lengths
    sup = abs(amplitude) * math.sqrt(2.0 ** len(L) / math.prod(L))
    f = constant_kernel(y0, sup, label=f"{amplitude}*phi_{mode}")
    return replace(f, params={"mode": mode, "amplitude": amplitude})


def _single_mode(eigsys: EigenSystem, j: int) -> EigenSystem:
    return replace(eigsys, labels=(eigsys.labels[j],), keys=(eigsys.keys[j],),
                   mu=eigsys.mu[j:j + 1], distinct=())


def cubic() -> Nonlinearity:
    """-s^3. Unbounded, so the resonance checkers refuse it."""
    return Nonlinearity(name="cubic", func=lambda x, s: -s ** 3, nu=0.0, bound=None)


def zero() -> Nonlinearity:
    return Nonlinearity(
        name="zero", func=lambda x, s: np.zeros(np.shape(s)), nu=0.0, bound=0.0,
        f_plus=_const(0.0), f_minus=_const(0.0), f_inf=_const(0.0),
    )


def linear(a: float) -> Nonlinearity:
    """a * s, unbounded; handy for exactness probes."""
    a = float(a)
    return Nonlinearity(name="linear", func=lambda x, s: a * s, nu=a, params={"a": a})


def parse_nonlinearity(spec: str, eigsys: Optional[EigenSystem] = None) -> Nonlinearity:
    """Build a builtin from ``name:key=value,...``, e.g. ``arctan:beta=4``.

    A leading ``-`` negates the result. ``constant_kernel`` accepts
    ``mode`` and ``amp`` and needs ``eigsys``.
    """
    spec = spec.strip()
    if spec.startswith("-"):
        return parse_nonlinearity(spec[1:], eigsys).negated()
    name, _, rest = spec.partition(":")
    kw = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ValueError(f"bad parameter {item!r} in {spec!r}")
        kw[key.strip()] = parse_number(value)
    name = name.strip()
    allowed = {"arctan": {"beta"}, "saturating": {"beta"}, "constant_kernel": {"mode", "amp"},
               "cubic": set(), "zero": set(), "linear": {"a"}}
    if name not in allowed:
        raise ValueError(f"unknown nonlinearity {name!r}; choose from {sorted(allowed)}")
    unknown = set(kw) - allowed[name]
    if unknown:
        raise ValueError(f"unknown parameters {sorted(unknown)} for {name}")
    if name == "arctan":
        return arctan(kw.get("beta", 1.0))
    if name == "saturating":
        return saturating(kw.get("beta", 1.0))
    if name == "constant_kernel":
        if eigsys is None:
            raise ValueError("constant_kernel needs an eigensystem")
        return constant_mode(eigsys, int(kw.get("mode", 1)), kw.get("amp", 1.0))
    if name == "linear":
        return linear(kw.get("a", 1.0))
    return {"cubic": cubic, "zero": zero}[name]()


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Composite Gauss-Legendre nodes with the eigenfunction table ``phi`` (N, Q)."""
    eigsys: EigenSystem
    nodes: np.ndarray
    weights: np.ndarray
    phi: np.ndarray = field(repr=False)
    orthonormality_defect: float = 0.0

    @property
    def N(self) -> int:
        return self.phi.shape[0]

    @property
    def Q(self) -> int:
        return self.phi.shape[1]

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        """Nodal values of one or a stack of coefficient vectors (..., N) -> (..., Q)."""
        return np.asarray(coeffs) @ self.phi

    def analyze(self, values: np.ndarray) -> np.ndarray:
        """Discrete H-projection onto the modes: (..., Q) -> (..., N)."""
        return (np.asarray(values) * self.weights) @ self.phi.T

    def integrate(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values) @ self.weights


def _panels_1d(length: float, panels: int, order: int):
    t, w = leggauss(order)
    edges = np.linspace(0.0, length, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return (mid[:, None] + half[:, None] * t).ravel(), (half[:, None] * w).ravel()


def build_grid(domain: SpectralDomain, eigsys: EigenSystem, panels: Optional[int] = None,
               order: int = 8) -> QuadratureGrid:
    """Composite Gauss-Legendre grid on which the modes are discretely orthonormal.

    Default panel count per axis: 4 * (highest mode index) on an interval,
    2 * (highest index along that axis) on a rectangle.
    """
    if domain != eigsys.domain:
        raise ValueError("grid domain differs from the eigensystem's domain")
    if domain.kind == "interval":
        jmax = max(lab[0] for lab in eigsys.labels)
        x, w = _panels_1d(domain.lengths[0], panels or 4 * jmax, order)
    else:
        axes = []
        for a in range(2):
            jmax = max(lab[a] for lab in eigsys.labels)
            axes.append(_panels_1d(domain.lengths[a], panels or 2 * jmax, order))
        (xa, wa), (xb, wb) = axes
        X, Y = np.meshgrid(xa, xb, indexing="ij")
        x = np.column_stack([X.ravel(), Y.ravel()])
        w = np.outer(wa, wb).ravel()
    phi = eigsys.eval_modes(x)
    gram = (phi * w) @ phi.T
    defect = float(np.abs(gram - np.eye(eigsys.N)).max())
    if defect > ORTHONORMALITY_TOL:
        raise ValueError(f"quadrature too coarse: orthonormality defect {defect:.3e}")
    for a in (x, w, phi):
        a.setflags(write=False)
    return QuadratureGrid(eigsys, x, w, phi, defect)


def synthesize(grid: QuadratureGrid, field: ModalField) -> np.ndarray:
    if not grid.eigsys.compatible(field.eigsys):
        raise ValueError("field and grid use different eigensystems")
    return grid.synthesize(field.coeffs)


class NonlinearityEvaluationError(FloatingPointError):
    pass


def nemytskii_coeffs(f: Nonlinearity, grid: QuadratureGrid, coeffs: np.ndarray) -> np.ndarray:
    """Array form of :func:`apply_nemytskii`; accepts a stack (..., N)."""
    u = grid.synthesize(coeffs)
    with np.errstate(all="ignore"):
        fu = np.asarray(f.func(grid.nodes, u), dtype=float)
    if not np.all(np.isfinite(fu)):
        bad = np.argwhere(~np.isfinite(fu))[0]
        q = int(bad[-1])
        raise NonlinearityEvaluationError(
            f"{f.name} is not finite at node {q} (x={grid.nodes[q]}, s={u[tuple(bad)]})")
    return grid.analyze(fu)


def apply_nemytskii(f: Nonlinearity, grid: QuadratureGrid, field: ModalField) -> ModalField:
    """Modal coefficients of x -> f(x, u(x)) projected onto span{phi_j}."""
    if not grid.eigsys.compatible(field.eigsys):
        raise ValueError("field and grid use different eigensystems")
    return ModalField(field.eigsys, nemytskii_coeffs(f, grid, field.coeffs))


@dataclass(frozen=True)
class BoundReport:
    name: str
    declared_bound: Optional[float]
    observed_max: float
    witness_x: list
    witness_s: float
    verdict: str  # pass | fail | undeclared
    s_range: tuple[float, float]
    samples: int
    n_nodes: int
    lipschitz_estimate: float
    nu_declared: float
    nu_estimate: float
    f_at_zero_max: float

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["s_range"] = list(self.s_range)
        return d


def verify_bound(f: Nonlinearity, grid: QuadratureGrid, s_range=(-100.0, 100.0),
                 samples: int = 2001) -> BoundReport:
    """Sampled sup |f| over nodes x s-grid, with Lipschitz and D_s f(x, 0) probes.

    Only the sampled set is covered; a pass says nothing between samples.
    """
    lo, hi = map(float, s_range)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi) or samples < 1:
        raise ValueError("s_range must be finite and ordered, samples >= 1")
    s = np.linspace(lo, hi, samples)
    vals = np.asarray(f.func(grid.nodes, np.broadcast_to(s[:, None], (samples, len(grid.weights)))),
                      dtype=float)
    absv = np.abs(vals)
    i, q = np.unravel_index(int(np.argmax(absv)), absv.shape)
    observed = float(absv[i, q])
    if f.bound is None:
        verdict = "undeclared"
    else:
        verdict = "pass" if observed <= f.bound * (1 + 1e-12) + 1e-300 else "fail"
    if samples > 1:
        lip = float(np.max(np.abs(np.diff(vals, axis=0)) / np.diff(s)[:, None]))
    else:
        lip = 0.0
    h = 1e-6
    Q = len(grid.weights)
    fp = np.asarray(f.func(grid.nodes, np.full(Q, h)), dtype=float)
    fm = np.asarray(f.func(grid.nodes, np.full(Q, -h)), dtype=float)
    f0 = np.asarray(f.func(grid.nodes, np.zeros(Q)), dtype=float)
    nu_est = float(np.median((fp - fm) / (2 * h)))
    x_w = np.atleast_1d(grid.nodes[q]).tolist()
    return BoundReport(f.name, f.bound, observed, x_w, float(s[i]), verdict, (lo, hi), samples, Q,
                       lip, f.nu, nu_est, float(np.abs(f0).max()))
