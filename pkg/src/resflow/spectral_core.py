"""Dirichlet-Laplacian eigensystems on reference domains and the resonant
splitting X = X_- + X_0 + X_+ around a chosen eigenvalue.

Eigenvalues are grouped on their exact lattice value (a ``Fraction``) so
that multiplicities never depend on floating point ties.
"""
from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

PARTS = ("minus", "zero", "plus")


@dataclass(frozen=True)
class SpectralDomain:
    kind: str
    lengths: tuple[float, ...]

    def __post_init__(self):
        expected = {"interval": 1, "rectangle": 2}
        if self.kind not in expected:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if len(self.lengths) != expected[self.kind]:
            raise ValueError(f"{self.kind} needs {expected[self.kind]} length(s)")
        if any(not (L > 0 and math.isfinite(L)) for L in self.lengths):
            raise ValueError(f"domain lengths must be positive, got {self.lengths}")

    @property
    def dim(self) -> int:
        return len(self.lengths)

    @property
    def measure(self) -> float:
        return float(np.prod(self.lengths))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lengths": list(self.lengths)}


def interval(L: float) -> SpectralDomain:
    return SpectralDomain("interval", (float(L),))


def rectangle(Lx: float, Ly: float) -> SpectralDomain:
    return SpectralDomain("rectangle", (float(Lx), float(Ly)))


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub,
           ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: operator.pow}


def parse_number(text: str) -> float:
    """Evaluate a small arithmetic expression such as ``pi``, ``2*pi`` or ``pi/2``."""
    text = text.strip().replace("π", "pi")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ValueError(f"cannot parse number {text!r}")

    return ev(ast.parse(text, mode="eval"))


def parse_domain(spec: str) -> SpectralDomain:
    """``interval:pi`` or ``rectangle:pi,pi``."""
    kind, _, rest = spec.partition(":")
    if not rest:
        raise ValueError(f"domain spec needs lengths: {spec!r}")
    lengths = tuple(parse_number(s) for s in rest.split(","))
    return SpectralDomain(kind.strip(), lengths)


@dataclass(frozen=True)
class DistinctEigenvalue:
    value: float
    multiplicity: int
    modes: tuple[int, ...]  # 0-based mode indices
    key: Fraction


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Truncated eigenbasis of -Laplacian with Dirichlet conditions.

    ``mu[j]`` is the eigenvalue of mode ``j`` (0-based), ``labels[j]`` its
    lattice indices, ``keys[j]`` the exact lattice value with
    ``mu[j] == scale * keys[j]``.
    """
    domain: SpectralDomain
    labels: tuple[tuple[int, ...], ...]
    keys: tuple[Fraction, ...]
    scale: float
    mu: np.ndarray = field(repr=False)
    distinct: tuple[DistinctEigenvalue, ...] = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.labels)

    @property
    def n_distinct(self) -> int:
        return len(self.distinct)

    def eigenvalue(self, k: int) -> float:
        """The k-th distinct eigenvalue, counted from 1."""
        if not 1 <= k <= self.n_distinct:
            raise IndexError(f"distinct index {k} outside 1..{self.n_distinct}")
        return self.distinct[k - 1].value

    def compatible(self, other: "EigenSystem") -> bool:
        return other is self or (other.domain == self.domain and other.labels == self.labels)

    def eval_modes(self, points: np.ndarray) -> np.ndarray:
        """Table of phi_j at the given points, shape (N, Q).

        ``points`` has shape (Q,) for an interval and (Q, 2) for a rectangle.
        """
        pts = np.asarray(points, dtype=float)
        if self.domain.kind == "interval":
            L = self.domain.lengths[0]
            j = np.array([lab[0] for lab in self.labels], dtype=float)
            return math.sqrt(2.0 / L) * np.sin(np.outer(j, pts) * (math.pi / L))
        Lx, Ly = self.domain.lengths
        jx = np.array([lab[0] for lab in self.labels], dtype=float)
        jy = np.array([lab[1] for lab in self.labels], dtype=float)
        sx = np.sin(np.outer(jx, pts[:, 0]) * (math.pi / Lx))
        sy = np.sin(np.outer(jy, pts[:, 1]) * (math.pi / Ly))
        return (2.0 / math.sqrt(Lx * Ly)) * sx * sy

    def to_dict(self) -> dict:
        return {
            "domain": self.domain.to_dict(),
            "N": self.N,
            "distinct": [
                {"index": i + 1, "eigenvalue": d.value, "multiplicity": d.multiplicity,
                 "modes": [list(self.labels[m]) for m in d.modes]}
                for i, d in enumerate(self.distinct)
            ],
            "cumulative_dims": [0] + list(np.cumsum([d.multiplicity for d in self.distinct]).tolist()),
        }


def _scale(domain: SpectralDomain) -> float:
    return math.pi ** 2 / min(domain.lengths) ** 2


def _ratios(domain: SpectralDomain) -> tuple[Fraction, Fraction]:
    """Squared exact ratios (Lmin/Lx)^2, (Lmin/Ly)^2; both 1 on a square."""
    Lx, Ly = (Fraction(v) for v in domain.lengths)
    Lmin = min(Lx, Ly)
    return (Lmin / Lx) ** 2, (Lmin / Ly) ** 2


def _lattice(domain: SpectralDomain, bound: Fraction):
    """All modes with lattice key <= bound, sorted by (key, labels).

    Interval keys are j^2; rectangle keys are j^2 rx + k^2 ry with the
    squared length ratios of ``_ratios`` held as exact fractions.
    """
    if domain.kind == "interval":
        jmax = math.isqrt(math.floor(bound))
        return [(Fraction(j * j), (j,)) for j in range(1, jmax + 1)]
    rx, ry = _ratios(domain)
    jmax = math.isqrt(math.floor(bound / rx)) + 1
    kmax = math.isqrt(math.floor(bound / ry)) + 1
    modes = []
    for j in range(1, jmax + 1):
        for k in range(1, kmax + 1):
            key = j * j * rx + k * k * ry
            if key <= bound:
                modes.append((key, (j, k)))
    modes.sort()
    return modes


def _chain_key(domain: SpectralDomain, n: int) -> Fraction:
    """Key of mode (1, n) (or j = n on an interval); n distinct keys lie at or below it."""
    if domain.kind == "interval":
        return Fraction(n * n)
    rx, ry = _ratios(domain)
    return rx + n * n * ry


def build_eigensystem(domain: SpectralDomain, N: int = 32) -> EigenSystem:
    """First ``N`` Dirichlet modes of ``domain``.

    Raises ``ValueError`` when mode ``N`` and mode ``N+1`` share an
    eigenvalue, since cutting a multiplicity group would corrupt every
    kernel dimension downstream.
    """
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    N = int(N)
    scale = _scale(domain)
    modes = _lattice(domain, _chain_key(domain, N + 1))
    if modes[N][0] == modes[N - 1][0]:
        raise ValueError(
            f"N={N} splits the multiplicity group of eigenvalue "
            f"{float(modes[N - 1][0]) * scale:.12g}; use mode_count_below()")
    modes = modes[:N]
    keys = tuple(m[0] for m in modes)
    labels = tuple(m[1] for m in modes)
    mu = np.array([float(k) * scale for k in keys])
    mu.setflags(write=False)
    groups: list[DistinctEigenvalue] = []
    start = 0
    for j in range(1, N + 1):
        if j == N or keys[j] != keys[start]:
            groups.append(DistinctEigenvalue(float(keys[start]) * scale, j - start,
                                             tuple(range(start, j)), keys[start]))
            start = j
    return EigenSystem(domain, labels, keys, scale, mu, tuple(groups))


def mode_count_below(domain: SpectralDomain, cutoff: float) -> int:
    """Number of modes with eigenvalue <= cutoff; always a full-group count."""
    scale = _scale(domain)
    bound = Fraction(cutoff / scale) * Fraction(1000000001, 1000000000)
    return sum(1 for key, _ in _lattice(domain, bound) if float(key) * scale <= cutoff * (1 + 1e-12))


def mode_count_for_groups(domain: SpectralDomain, n_groups: int) -> int:
    """Number of modes spanning exactly the first ``n_groups`` distinct eigenvalues."""
    keys = sorted({key for key, _ in _lattice(domain, _chain_key(domain, n_groups))})
    cut = keys[n_groups - 1]
    return sum(1 for key, _ in _lattice(domain, cut))


@dataclass(frozen=True, eq=False)
class ModalField:
    """A function in span{phi_1..phi_N}, stored by its coefficients."""
    eigsys: EigenSystem
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.eigsys.N,):
            raise ValueError(f"expected {self.eigsys.N} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, eigsys: EigenSystem) -> "ModalField":
        return cls(eigsys, np.zeros(eigsys.N))

    @classmethod
    def basis(cls, eigsys: EigenSystem, j: int, amplitude: float = 1.0) -> "ModalField":
        """Field ``amplitude * phi_j`` with j counted from 1."""
        c = np.zeros(eigsys.N)
        c[j - 1] = amplitude
        return cls(eigsys, c)

    def _check(self, other: "ModalField"):
        if not self.eigsys.compatible(other.eigsys):
            raise ValueError("fields belong to different eigensystems")

    def __add__(self, other: "ModalField") -> "ModalField":
        self._check(other)
        return ModalField(self.eigsys, self.coeffs + other.coeffs)

    def __sub__(self, other: "ModalField") -> "ModalField":
        self._check(other)
        return ModalField(self.eigsys, self.coeffs - other.coeffs)

    def __mul__(self, a: float) -> "ModalField":
        return ModalField(self.eigsys, a * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self) -> "ModalField":
        return ModalField(self.eigsys, -self.coeffs)

    def inner(self, other: "ModalField") -> float:
        self._check(other)
        return float(self.coeffs @ other.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Index partition of the modes around the resonant eigenvalue lambda_k."""
    eigsys: EigenSystem
    k: int
    minus: np.ndarray
    zero: np.ndarray
    plus: np.ndarray

    @property
    def lam(self) -> float:
        return self.eigsys.eigenvalue(self.k)

    @property
    def dim_minus(self) -> int:
        return len(self.minus)

    @property
    def dim_kernel(self) -> int:
        return len(self.zero)

    @property
    def d_k(self) -> int:
        return self.dim_minus + self.dim_kernel

    def indices(self, part: str) -> np.ndarray:
        if part not in PARTS:
            raise ValueError(f"part must be one of {PARTS}, got {part!r}")
        return getattr(self, part)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "lambda": self.lam,
            "modes_minus": [int(i) + 1 for i in self.minus],
            "modes_zero": [int(i) + 1 for i in self.zero],
            "modes_plus": [int(i) + 1 for i in self.plus],
            "d_k_minus_1": self.dim_minus,
            "dim_kernel": self.dim_kernel,
            "d_k": self.d_k,
        }


def decompose(eigsys: EigenSystem, k: int) -> SpectralDecomposition:
    if not 1 <= k <= eigsys.n_distinct:
        raise ValueError(f"k={k} outside 1..{eigsys.n_distinct}")
    groups = eigsys.distinct
    zero = np.array(groups[k - 1].modes, dtype=int)
    minus = np.array([m for g in groups[:k - 1] for m in g.modes], dtype=int)
    plus = np.array([m for g in groups[k:] for m in g.modes], dtype=int)
    for a in (minus, zero, plus):
        a.setflags(write=False)
    return SpectralDecomposition(eigsys, k, minus, zero, plus)


def project(decomp: SpectralDecomposition, field: ModalField, part: str) -> ModalField:
    """Orthogonal projection onto X_-, X_0 or X_+ (``minus``/``zero``/``plus``)."""
    if not decomp.eigsys.compatible(field.eigsys):
        raise ValueError("field does not belong to the decomposition's eigensystem")
    idx = decomp.indices(part)
    out = np.zeros(field.eigsys.N)
    out[idx] = field.coeffs[idx]
    return ModalField(field.eigsys, out)


def fractional_norm(eigsys: EigenSystem, field: ModalField, alpha: float) -> float:
    """Norm of X^alpha = D(A^alpha): (sum mu_j^(2 alpha) u_j^2)^(1/2)."""
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    if not eigsys.compatible(field.eigsys):
        raise ValueError("field does not belong to this eigensystem")
    return float(np.linalg.norm(eigsys.mu ** alpha * field.coeffs))
