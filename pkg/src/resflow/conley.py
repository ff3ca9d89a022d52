"""Integer bookkeeping for Conley indices of pointed-sphere type.

An index Sigma^m is stored as its exponent m. The connecting-orbit
criterion compares the index of the large invariant set K (fixed by which
geometric condition holds at infinity) with the index of the equilibrium 0
(fixed by where lam + nu falls in the spectrum); different exponents force a
nonzero orbit that tends to 0 in forward or backward time.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .conditions import ConditionReport
from .spectral_core import EigenSystem, SpectralDecomposition, decompose

SPECTRUM_TOL = 1e-9
AMBIGUITY_TOL = 1e-6

# condition -> (route, geometric condition it implies)
_ROUTES = {"LL1": ("LL", "G1"), "LL2": ("LL", "G2"), "SR1": ("SR", "G1"),
           "SR2": ("SR", "G2"), "G1": ("G", "G1"), "G2": ("G", "G2")}
_ROUTE_TEXT = {
    "LL": "Landesman-Lazer sign condition on the limits f_+ and f_- along the kernel",
    "SR": "strong resonance condition (one-sided envelope of f(x,s)s and sign of the integral of f_inf)",
    "G": "geometric condition checked directly by sampling",
}


class ResonantAtZeroError(ValueError):
    """lam + nu is an eigenvalue, so the index of the equilibrium 0 is undetermined."""


def cumulative_dims(eigsys: EigenSystem, l: int) -> int:
    """d_l: total multiplicity of the first ``l`` distinct eigenvalues (d_0 = 0)."""
    if not 0 <= l <= eigsys.n_distinct:
        raise ValueError(f"l={l} outside 0..{eigsys.n_distinct}")
    return sum(g.multiplicity for g in eigsys.distinct[:l])


def _bracket(eigsys: EigenSystem, s: float) -> int:
    """Number l of distinct eigenvalues below s, refusing s on the spectrum."""
    values = np.array([g.value for g in eigsys.distinct])
    hit = np.abs(values - s) <= SPECTRUM_TOL * np.maximum(1.0, np.abs(values))
    if hit.any():
        i = int(np.flatnonzero(hit)[0])
        raise ResonantAtZeroError(
            f"lam + nu = {s:.12g} equals eigenvalue lambda_{i + 1} = {values[i]:.12g}")
    l = int(np.sum(values < s))
    if l == len(values):
        raise ValueError(f"lam + nu = {s:.12g} lies above the truncated spectrum "
                         f"(max {values[-1]:.12g}); increase N")
    return l


def equilibrium_exponent(eigsys: EigenSystem, lam: float, nu: float) -> int:
    """b_l for the equilibrium 0: 0 if lam + nu < lambda_1, else d_l with
    lambda_l < lam + nu < lambda_{l+1}. Raises ResonantAtZeroError on the spectrum."""
    return cumulative_dims(eigsys, _bracket(eigsys, lam + nu))


def invariant_set_exponent(decomp: SpectralDecomposition, which: str) -> int:
    """d_k under G1, d_{k-1} under G2; the same for the heat and wave semiflows."""
    if which == "G1":
        return decomp.d_k
    if which == "G2":
        return decomp.dim_minus
    raise ValueError("which must be 'G1' or 'G2'")


@dataclass(frozen=True)
class ConleyVerdict:
    model: str
    k: int
    lam: float
    nu: float
    condition: Optional[str]
    route: Optional[str]
    geometric: Optional[str]
    exponent_K: Optional[int]
    exponent_zero: Optional[int]
    resonant_at_zero: bool
    trivial_index: bool
    case: str  # i | ii | iii | iv | none
    conclusion: str  # orbit-exists | no-conclusion
    narrative: list = field(default_factory=list)

    @property
    def exponents(self) -> tuple:
        return (self.exponent_K, self.exponent_zero)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _holding(reports: Sequence[ConditionReport]) -> list[ConditionReport]:
    return [r for r in reports if r.holds]


def _select_condition(reports: Sequence[ConditionReport]) -> Optional[str]:
    held = {r.condition for r in _holding(reports)}
    implied = {_ROUTES[c][1] for c in held}
    if len(implied) > 1:
        raise ValueError(f"inconsistent inputs: {sorted(held)} imply both G1 and G2")
    for r in reports:
        if r.condition in ("G1", "G2") and r.verdict == "fails" and r.condition in implied:
            raise ValueError(f"inconsistent inputs: {r.condition} is violated by a sampled "
                             f"witness while {sorted(held)} holds")
    for c in ("LL1", "LL2", "SR1", "SR2", "G1", "G2"):
        if c in held:
            return c
    return None


def orbit_verdict(eigsys: EigenSystem, k: int, nu: float,
                  condition_outcome: Sequence[ConditionReport] | ConditionReport,
                  model: str = "heat", lam: Optional[float] = None) -> ConleyVerdict:
    """Case analysis for a nonzero orbit connecting to the equilibrium 0.

    ``lam`` defaults to the resonant eigenvalue lambda_k. The cases are:
    (i) G1-route, lambda_l < lam+nu < lambda_{l+1}, lambda_l != lam;
    (ii) G1-route, lam+nu < lambda_1;
    (iii) G2-route, lambda_{l-1} < lam+nu < lambda_l, lambda_l != lam, l >= 2;
    (iv) G2-route, lam+nu < lambda_1, lam != lambda_1.
    """
    if model not in ("heat", "wave"):
        raise ValueError("model must be 'heat' or 'wave'")
    if isinstance(condition_outcome, ConditionReport):
        condition_outcome = [condition_outcome]
    decomp = decompose(eigsys, k)
    lam_k = decomp.lam
    if lam is None:
        lam = lam_k
    elif abs(lam - lam_k) > SPECTRUM_TOL * max(1.0, abs(lam_k)):
        raise ValueError(f"lam={lam} is not the resonant eigenvalue lambda_{k}={lam_k}")
    flow = "heat semiflow" if model == "heat" else "strongly damped wave semiflow"
    cond = _select_condition(condition_outcome)
    s = lam + nu
    narrative = [f"model: {flow}; resonance at lambda_{k} = {lam_k:.12g} "
                 f"(dim Ker = {decomp.dim_kernel}, d_{k - 1} = {decomp.dim_minus}, d_{k} = {decomp.d_k})"]
    common = dict(model=model, k=k, lam=lam, nu=nu, trivial_index=False)

    if cond is None:
        narrative.append("no resonance condition holds: the index of the invariant set at "
                         "infinity is not determined, no conclusion")
        try:
            b = equilibrium_exponent(eigsys, lam, nu)
            rz = False
        except ResonantAtZeroError as exc:
            b, rz = None, True
            narrative.append(str(exc))
        return ConleyVerdict(condition=None, route=None, geometric=None, exponent_K=None,
                             exponent_zero=b, resonant_at_zero=rz, case="none",
                             conclusion="no-conclusion", narrative=narrative, **common)

    route, geo = _ROUTES[cond]
    qualifier = " (sampled)" if route == "G" else ""
    narrative.append(f"{cond} holds{qualifier}: {_ROUTE_TEXT[route]}")
    if route != "G":
        narrative.append(f"{cond} implies the geometric condition {geo} for the Nemytskii operator")
    eK = invariant_set_exponent(decomp, geo)
    dname = f"d_{k}" if geo == "G1" else f"d_{k - 1}"
    narrative.append(f"index formula for the {flow}: h(K) = Sigma^{dname} = Sigma^{eK} "
                     f"for the maximal invariant set K of a large isolating neighborhood")
    try:
        l = _bracket(eigsys, s)
    except ResonantAtZeroError as exc:
        narrative.append(f"{exc}: the index of the equilibrium 0 is undetermined, no conclusion")
        return ConleyVerdict(condition=cond, route=route, geometric=geo, exponent_K=eK,
                             exponent_zero=None, resonant_at_zero=True, case="none",
                             conclusion="no-conclusion", narrative=narrative, **common)
    b = cumulative_dims(eigsys, l)
    values = [g.value for g in eigsys.distinct]
    if l == 0:
        where = f"lam + nu = {s:.12g} < lambda_1 = {values[0]:.12g}"
    else:
        where = (f"lambda_{l} = {values[l - 1]:.12g} < lam + nu = {s:.12g} "
                 f"< lambda_{l + 1} = {values[l]:.12g}")
    narrative.append(f"linearization at 0 is hyperbolic ({where}): "
                     f"h({{0}}) = Sigma^b_{l} = Sigma^{b}, a nontrivial index")
    near = [i + 1 for i, v in enumerate(values) if abs(v - s) <= AMBIGUITY_TOL * max(1.0, abs(v))]
    if near:
        narrative.append(f"warning: lam + nu is within {AMBIGUITY_TOL:g} of lambda_{near[0]}; "
                         "the bracket and hence the case are sensitive to nu")

    lam_is = lambda i: abs(values[i - 1] - lam) <= SPECTRUM_TOL * max(1.0, abs(lam))
    case = "none"
    if geo == "G1":
        if l == 0:
            case = "ii"
        elif not lam_is(l):
            case = "i"
    else:
        if l == 0:
            if not lam_is(1):
                case = "iv"
        elif not lam_is(l + 1):
            case = "iii"
    differ = eK != b
    if case != "none" and differ:
        conclusion = "orbit-exists"
        narrative.append(f"case ({case}) matches: h({{0}}) = Sigma^{b} differs from "
                         f"h(K) = Sigma^{eK}, so the connection criterion yields a nonzero "
                         f"compact orbit u with u(t) -> 0 as t -> -inf or as t -> +inf")
    else:
        conclusion = "no-conclusion"
        narrative.append(f"no case matches: h({{0}}) = Sigma^{b} and h(K) = Sigma^{eK} "
                         "coincide, the connection criterion does not apply")
    if (case != "none") != differ:
        raise AssertionError("case analysis disagrees with exponent comparison")
    return ConleyVerdict(condition=cond, route=route, geometric=geo, exponent_K=eK,
                         exponent_zero=b, resonant_at_zero=False, case=case,
                         conclusion=conclusion, narrative=narrative, **common)
