"""Graded left-symmetric products compatible with the loop bracket.

The product is fixed by five structure functions of (α, i, β, j):

    L(α,i)∘L(β,j) = a·L(α+β, i+j)      L(α,i)∘H(β,j) = b·H(α+β, i+j)
    H(α,i)∘L(β,j) = c·H(α+β, i+j)      H(α,i)∘H(β,j) = d·L(α+β, i+j) + e·H(α+β, i+j)

The one-parameter family built here is

    a = -β(1+εβ)/(1+ε(α+β))
    b = -β(1+(1-εβ)·m·δ_{α+β,0})
    c = ±β(1+εβ)·m·δ_{α+β,0}
    d = e = 0

and only the ``plus`` sign is compatible with the bracket when ``m ≠ 0``;
:func:`resolve_c_sign` decides this by computation rather than by fiat.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .algebra import (
    BasisIndex,
    BracketConvention,
    Element,
    Kind,
    Window,
    _as_element,
    enumerate_basis,
)
from .checks import CheckResult
from .exact import ZERO, ONE, GaussianRational, SparseEchelon, as_scalar, validate_epsilon

__all__ = [
    "LsaParams",
    "WittLsaParams",
    "StructureFunctions",
    "LsaDenominatorError",
    "graded_family",
    "lsa_product",
    "associator",
    "left_symmetry_residual",
    "compatibility_residual",
    "verify_left_symmetry",
    "verify_compatibility",
    "EQUATIONS",
    "structure_equation_residuals",
    "SignResolution",
    "resolve_c_sign",
    "ReplayStep",
    "Transcript",
    "replay_c_derivation",
    "witt_lsa_product",
    "witt_convention_audit",
    "sample_perturbation",
]

Scalar = GaussianRational
StructureFn = Callable[[Fraction, int, Fraction, int], GaussianRational]


class LsaDenominatorError(ZeroDivisionError):
    pass


def _checked_eps(eps) -> GaussianRational:
    eps = as_scalar(eps)
    verdict = validate_epsilon(eps)
    if not verdict:
        raise ValueError(f"invalid epsilon {eps}: {verdict.reason}")
    return eps


@dataclass(frozen=True)
class LsaParams:
    eps: GaussianRational
    m: GaussianRational = ONE
    c_sign: str = "plus"
    convention: BracketConvention = BracketConvention.PAPER

    def __post_init__(self):
        object.__setattr__(self, "eps", _checked_eps(self.eps))
        object.__setattr__(self, "m", as_scalar(self.m))
        if self.c_sign not in ("plus", "minus"):
            raise ValueError(f"c_sign must be 'plus' or 'minus', got {self.c_sign!r}")

    def describe(self) -> dict:
        return {"eps": str(self.eps), "m": str(self.m), "c_sign": self.c_sign,
                "convention": self.convention.value}


@dataclass(frozen=True)
class WittLsaParams:
    alpha_param: GaussianRational
    eps: GaussianRational

    def __post_init__(self):
        object.__setattr__(self, "alpha_param", as_scalar(self.alpha_param))
        object.__setattr__(self, "eps", _checked_eps(self.eps))


# structure functions -------------------------------------------------------


def _zero_fn(alpha, i, beta, j):
    return ZERO


@dataclass(frozen=True)
class StructureFunctions:
    a: StructureFn
    b: StructureFn
    c: StructureFn
    d: StructureFn = _zero_fn
    e: StructureFn = _zero_fn
    label: str = "custom"

    def get(self, name: str) -> StructureFn:
        return getattr(self, name)

    def perturbed(self, name: str, key: tuple, delta) -> "StructureFunctions":
        """Copy with ``delta`` added to function ``name`` at the single argument ``key``."""
        if name not in "abcde" or len(name) != 1:
            raise ValueError(f"unknown structure function {name!r}")
        base = self.get(name)
        alpha, i, beta, j = key
        k = (Fraction(alpha), int(i), Fraction(beta), int(j))
        delta = as_scalar(delta)

        def fn(a1, i1, b1, j1, _base=base):
            v = _base(a1, i1, b1, j1)
            return v + delta if (a1, i1, b1, j1) == k else v

        return replace(self, **{name: fn}, label=f"{self.label}+δ{name}{_key_text(k)}")

    def table(self, w: Window) -> list[tuple]:
        """Golden-file rows ``(name, α, i, β, j, value)`` over window index pairs."""
        rows = []
        for name in "abcde":
            fn = self.get(name)
            for a1, b1 in itertools.product(w.degrees, repeat=2):
                for i, j in itertools.product(w.loops, repeat=2):
                    rows.append((name, str(a1), i, str(b1), j, str(fn(a1, i, b1, j))))
        return rows


def _key_text(k) -> str:
    return "(" + ",".join(str(v) for v in k) + ")"


def graded_family(p: LsaParams) -> StructureFunctions:
    """Structure functions of the one-parameter family at ``p``."""
    eps, m = p.eps, p.m
    sign = 1 if p.c_sign == "plus" else -1

    @lru_cache(maxsize=None)
    def a(alpha, i, beta, j):
        den = 1 + eps * (alpha + beta)
        if not den:
            raise LsaDenominatorError(f"1+ε(α+β) vanishes at α+β={alpha + beta}")
        return (-beta) * (1 + eps * beta) / den

    @lru_cache(maxsize=None)
    def b(alpha, i, beta, j):
        if alpha + beta:
            return GaussianRational(-beta)
        return (1 + (1 - eps * beta) * m) * (-beta)

    @lru_cache(maxsize=None)
    def c(alpha, i, beta, j):
        if alpha + beta:
            return ZERO
        return (1 + eps * beta) * m * (sign * beta)

    return StructureFunctions(a, b, c, label=f"family(eps={eps},m={m},{p.c_sign})")


def _as_sf(p) -> StructureFunctions:
    return p if isinstance(p, StructureFunctions) else graded_family(p)


def _basis_product(sf: StructureFunctions, x: BasisIndex, y: BasisIndex):
    a1, i, b1, j = x.degree, x.loop, y.degree, y.loop
    s, l = a1 + b1, i + j
    if x.kind is Kind.L:
        if y.kind is Kind.L:
            return ((sf.a(a1, i, b1, j), BasisIndex(Kind.L, s, l)),)
        return ((sf.b(a1, i, b1, j), BasisIndex(Kind.H, s, l)),)
    if y.kind is Kind.L:
        return ((sf.c(a1, i, b1, j), BasisIndex(Kind.H, s, l)),)
    return ((sf.d(a1, i, b1, j), BasisIndex(Kind.L, s, l)),
            (sf.e(a1, i, b1, j), BasisIndex(Kind.H, s, l)))


def _accumulate(out: dict, idx, v):
    if not v:
        return
    w = out.get(idx)
    w = v if w is None else w + v
    if w:
        out[idx] = w
    else:
        out.pop(idx, None)


def lsa_product(x, y, p) -> Element:
    """Bilinear product ``x∘y``; ``p`` is LsaParams or StructureFunctions."""
    sf = _as_sf(p)
    x, y = _as_element(x), _as_element(y)
    out: dict = {}
    for bx, cx in x._terms.items():
        for by, cy in y._terms.items():
            for coef, idx in _basis_product(sf, bx, by):
                if coef:
                    _accumulate(out, idx, cx * cy * coef)
    return Element._wrap(out)


def associator(x, y, z, p) -> Element:
    """``(x∘y)∘z - x∘(y∘z)``."""
    sf = _as_sf(p)
    return lsa_product(lsa_product(x, y, sf), z, sf) - lsa_product(x, lsa_product(y, z, sf), sf)


def left_symmetry_residual(x, y, z, p) -> Element:
    sf = _as_sf(p)
    return associator(x, y, z, sf) - associator(y, x, z, sf)


def compatibility_residual(x, y, p, convention: BracketConvention | None = None) -> Element:
    """``x∘y - y∘x - [x,y]``."""
    from .algebra import bracket

    sf = _as_sf(p)
    if convention is None:
        convention = p.convention if isinstance(p, LsaParams) else BracketConvention.PAPER
    return lsa_product(x, y, sf) - lsa_product(y, x, sf) - bracket(x, y, convention)


# sweeps ---------------------------------------------------------------------


def _pair_guard(w: Window, x: BasisIndex, y: BasisIndex) -> bool:
    return w.has_degree(x.degree + y.degree) and w.has_loop(x.loop + y.loop)


def _fast_ls_residual(sf, x, y, z) -> dict:
    out: dict = {}
    for (u, v), sgn in (((x, y), 1), ((y, x), -1)):
        for c1, t1 in _basis_product(sf, u, v):
            if c1:
                for c2, t2 in _basis_product(sf, t1, z):
                    if c2:
                        _accumulate(out, t2, c1 * c2 * sgn)
        for c1, t1 in _basis_product(sf, v, z):
            if c1:
                for c2, t2 in _basis_product(sf, u, t1):
                    if c2:
                        _accumulate(out, t2, -(c1 * c2) * sgn)
    return out


def verify_left_symmetry(p, w: Window, name: str = "left_symmetry") -> CheckResult:
    """Left symmetry over x < y and every z, with all pairwise sums in ``w``."""
    sf = _as_sf(p)
    basis = enumerate_basis(w)
    res = CheckResult(name)
    for x, y in itertools.combinations(basis, 2):
        if not _pair_guard(w, x, y):
            continue
        for z in basis:
            if not (_pair_guard(w, y, z) and _pair_guard(w, x, z)):
                continue
            r = _fast_ls_residual(sf, x, y, z)
            if r:
                res.record(Element._wrap(r), (x, y, z))
            else:
                res.domain_size += 1
    return res


def verify_compatibility(p, w: Window, convention: BracketConvention | None = None,
                         name: str = "compatibility") -> CheckResult:
    sf = _as_sf(p)
    if convention is None:
        convention = p.convention if isinstance(p, LsaParams) else BracketConvention.PAPER
    res = CheckResult(name)
    for x, y in itertools.combinations(enumerate_basis(w), 2):
        res.record(compatibility_residual(x, y, sf, convention), (x, y))
    return res


# the twelve structure equations --------------------------------------------

# Each equation maps (sf, A, B, C, σ) to lhs - rhs, where A = (α, i),
# B = (β, j), C = (γ, k) and σ = ±1 is the bracket convention sign.


def _s(p, q):
    return (p[0] + q[0], p[1] + q[1])


def _f(fn, p, q):
    return fn(p[0], p[1], q[0], q[1])


def _eq_a_antisymmetry(sf, A, B, sg):
    return _f(sf.a, A, B) - _f(sf.a, B, A) - sg * (A[0] - B[0])


def _eq_b_minus_c(sf, A, B, sg):
    return _f(sf.b, A, B) - _f(sf.c, B, A) + sg * B[0]


def _eq_de_symmetry(sf, A, B, sg):
    # both parts at once: a nonzero value of either difference fails
    dd = _f(sf.d, A, B) - _f(sf.d, B, A)
    ee = _f(sf.e, A, B) - _f(sf.e, B, A)
    return dd if dd else ee


def _eq_aa(sf, A, B, C, sg):
    a = sf.a
    return (_f(a, B, C) * _f(a, A, _s(B, C)) - _f(a, A, C) * _f(a, B, _s(A, C))
            - _f(a, _s(A, B), C) * (sg * (A[0] - B[0])))


def _eq_bb(sf, A, B, C, sg):
    b = sf.b
    return (_f(b, B, C) * _f(b, A, _s(B, C)) - _f(b, A, C) * _f(b, B, _s(A, C))
            - _f(b, _s(A, B), C) * (sg * (A[0] - B[0])))


def _eq_bb_printed(sf, A, B, C, sg):
    a, b = sf.a, sf.b
    return (_f(b, B, C) * _f(b, A, _s(B, C)) - _f(a, A, C) * _f(a, B, _s(A, C))
            - _f(b, _s(A, B), C) * (sg * (A[0] - B[0])))


def _eq_cb_ac(sf, A, B, C, sg):
    return (_f(sf.c, B, C) * _f(sf.b, A, _s(B, C)) - _f(sf.a, A, C) * _f(sf.c, B, _s(A, C))
            + _f(sf.c, _s(A, B), C) * (sg * B[0]))


def _eq_da_bd(sf, A, B, C, sg):
    return (_f(sf.d, B, C) * _f(sf.a, A, _s(B, C)) - _f(sf.b, A, C) * _f(sf.d, B, _s(A, C))
            + _f(sf.d, _s(A, B), C) * (sg * B[0]))


def _eq_eb_be(sf, A, B, C, sg):
    return (_f(sf.e, B, C) * _f(sf.b, A, _s(B, C)) - _f(sf.b, A, C) * _f(sf.e, B, _s(A, C))
            + _f(sf.e, _s(A, B), C) * (sg * B[0]))


def _eq_cd(sf, A, B, C, sg):
    return _f(sf.c, B, C) * _f(sf.d, A, _s(B, C)) - _f(sf.c, A, C) * _f(sf.d, B, _s(A, C))


def _eq_ce(sf, A, B, C, sg):
    return _f(sf.c, B, C) * _f(sf.e, A, _s(B, C)) - _f(sf.c, A, C) * _f(sf.e, B, _s(A, C))


def _eq_ee_dc(sf, A, B, C, sg):
    return (_f(sf.d, B, C) * _f(sf.c, A, _s(B, C)) + _f(sf.e, B, C) * _f(sf.e, A, _s(B, C))
            - _f(sf.d, A, C) * _f(sf.c, B, _s(A, C)) - _f(sf.e, A, C) * _f(sf.e, B, _s(A, C)))


def _eq_ee_dc_printed(sf, A, B, C, sg):
    return (_f(sf.e, B, C) * _f(sf.e, A, _s(B, C)) + _f(sf.d, A, C) * _f(sf.c, B, _s(A, C))
            - _f(sf.d, B, C) * _f(sf.c, A, _s(B, C)) - _f(sf.e, A, C) * _f(sf.e, B, _s(A, C)))


def _eq_ed(sf, A, B, C, sg):
    return _f(sf.e, B, C) * _f(sf.d, A, _s(B, C)) - _f(sf.e, A, C) * _f(sf.d, B, _s(A, C))


# (name, arity, derived form, printed form)
EQUATIONS: tuple = (
    ("a_antisymmetry", 2, _eq_a_antisymmetry, _eq_a_antisymmetry),
    ("b_minus_c", 2, _eq_b_minus_c, _eq_b_minus_c),
    ("de_symmetry", 2, _eq_de_symmetry, _eq_de_symmetry),
    ("aa", 3, _eq_aa, _eq_aa),
    ("bb", 3, _eq_bb, _eq_bb_printed),
    ("cb_ac", 3, _eq_cb_ac, _eq_cb_ac),
    ("da_bd", 3, _eq_da_bd, _eq_da_bd),
    ("eb_be", 3, _eq_eb_be, _eq_eb_be),
    ("cd", 3, _eq_cd, _eq_cd),
    ("ce", 3, _eq_ce, _eq_ce),
    ("ee_dc", 3, _eq_ee_dc, _eq_ee_dc_printed),
    ("ed", 3, _eq_ed, _eq_ed),
)


def _index_points(w: Window):
    return [(d, i) for d in w.degrees for i in w.loops]


def _in_window(w: Window, p) -> bool:
    return w.has_degree(p[0]) and w.has_loop(p[1])


def structure_equation_residuals(p, w: Window, transcription: str = "derived",
                                 convention: BracketConvention = BracketConvention.PAPER) -> list[CheckResult]:
    """Evaluate the twelve equations over window index pairs and guarded triples.

    ``transcription="printed"`` swaps in two alternative forms of the b·b and
    e·e/d·c equations for comparison; ``"derived"`` is the form obtained by
    expanding left symmetry directly.
    """
    if transcription not in ("derived", "printed"):
        raise ValueError(f"unknown transcription {transcription!r}")
    sf = _as_sf(p)
    sg = 1 if convention is BracketConvention.PAPER else -1
    pts = _index_points(w)
    results = []
    for name, arity, derived, printed in EQUATIONS:
        fn = derived if transcription == "derived" else printed
        res = CheckResult(name)
        worst = None
        if arity == 2:
            instances = itertools.product(pts, repeat=2)
        else:
            instances = (
                t for t in itertools.product(pts, repeat=3)
                if _in_window(w, _s(t[0], t[1])) and _in_window(w, _s(t[1], t[2]))
                and _in_window(w, _s(t[0], t[2]))
            )
        for inst in instances:
            r = fn(sf, *inst, sg)
            if not res.record(r, [_key_text(sum(inst, ()))]):
                n = as_scalar(r).norm()
                if worst is None or n > worst[0]:
                    worst = (n, _key_text(sum(inst, ())), str(r))
        if worst is not None:
            res.detail = {"max_witness": worst[1], "max_residual": worst[2]}
        results.append(res)
    return results


# sign resolution -----------------------------------------------------------


@dataclass
class SignResolution:
    verdict: str  # "plus" | "minus" | "both" | "neither"
    passing: list[str]
    witnesses: dict[str, dict]

    @property
    def winner(self) -> str | None:
        return self.passing[0] if len(self.passing) == 1 else None

    def to_dict(self) -> dict:
        return {"name": "c_sign", "verdict": self.verdict, "passing": list(self.passing),
                "winner": self.winner, "rejected_witnesses": self.witnesses}


def resolve_c_sign(eps, m_samples: Sequence, w: Window,
                   convention: BracketConvention = BracketConvention.PAPER) -> SignResolution:
    """Run the equation system and both sweeps for each sign; keep the survivors."""
    if not m_samples:
        raise ValueError("m_samples must be nonempty")
    passing, witnesses = [], {}
    for sign in ("plus", "minus"):
        bad = None
        for m in m_samples:
            p = LsaParams(eps, m, sign, convention)
            checks = structure_equation_residuals(p, w, convention=convention)
            checks.append(verify_left_symmetry(p, w))
            checks.append(verify_compatibility(p, w))
            failing = [c for c in checks if not c.passed]
            if failing:
                probe_at = (Fraction(1), 0, Fraction(-1), 0)
                probe = _eq_b_minus_c(graded_family(p), probe_at[:2], probe_at[2:], 1 if convention is BracketConvention.PAPER else -1)
                first = failing[0]
                bad = {"m": str(as_scalar(m)), "failing_checks": [c.name for c in failing],
                       "identity": first.name, "witness": list(first.first_witness),
                       "residual": first.residual,
                       "probe": {"identity": "b_minus_c", "at": _key_text(probe_at), "residual": str(probe)}}
                break
        if bad is None:
            passing.append(sign)
        else:
            witnesses[sign] = bad
    verdict = {0: "neither", 2: "both"}.get(len(passing)) or passing[0]
    return SignResolution(verdict, passing, witnesses)


# replay of the c/b uniqueness derivation -----------------------------------


@dataclass
class ReplayStep:
    label: str
    claim: str
    check: CheckResult
    gating: bool = True

    @property
    def verdict(self) -> str:
        return "pass" if self.check.passed else "fail"

    def to_dict(self) -> dict:
        d = self.check.to_dict()
        d.update({"label": self.label, "claim": self.claim, "verdict": self.verdict,
                  "gating": self.gating})
        return d


@dataclass
class Transcript:
    steps: list[ReplayStep]
    m_target: GaussianRational
    m_raw: GaussianRational  # C(1,1,-1,-1) as read off the rescaled table
    recovered_m: GaussianRational

    @property
    def passed(self) -> bool:
        return all(s.check.passed for s in self.steps if s.gating)

    def step(self, label: str) -> ReplayStep:
        for s in self.steps:
            if s.label == label:
                return s
        raise KeyError(label)

    def failing(self) -> list[str]:
        return [s.label for s in self.steps if not s.check.passed]

    def to_dict(self) -> dict:
        return {"m_target": str(self.m_target), "m_raw": str(self.m_raw),
                "recovered_m": str(self.recovered_m), "passed": self.passed,
                "steps": [s.to_dict() for s in self.steps]}


def replay_c_derivation(w: Window, eps, m_target, perturb_C: dict | None = None) -> Transcript:
    """Replay the derivation that pins down b and c from a, step by step.

    B(α,β) = (1+ε(α+β))/(1+εβ)·b(α,β) and C(x,y) = (1+ε(x+y))/(1+εy)·c(x,y)
    are built from the plus family at ``m_target``; ``perturb_C`` maps
    ``(x, i, y, j)`` to a delta added to C before the replay.
    """
    eps = _checked_eps(eps)
    m_target = as_scalar(m_target)
    sf = graded_family(LsaParams(eps, m_target, "plus"))
    perturb = {(Fraction(k[0]), int(k[1]), Fraction(k[2]), int(k[3])): as_scalar(v)
               for k, v in (perturb_C or {}).items()}

    def den(x):
        v = 1 + eps * x
        if not v:
            raise LsaDenominatorError(f"1+ε·{x} vanishes")
        return v

    def Bf(a1, i, b1, j):
        return sf.b(a1, i, b1, j) * den(a1 + b1) / den(b1)

    def Cf(x, i, y, j):
        v = sf.c(x, i, y, j) * den(x + y) / den(y)
        return v + perturb.get((x, i, y, j), ZERO)

    pts = _index_points(w)
    degs = w.degrees
    steps: list[ReplayStep] = []

    def add(label, claim, chk, gating=True):
        steps.append(ReplayStep(label, claim, chk, gating))

    def guarded_triples():
        for A, B, C in itertools.product(pts, repeat=3):
            if _in_window(w, _s(A, B)) and _in_window(w, _s(B, C)) and _in_window(w, _s(A, C)):
                yield A, B, C

    # the three rescaled relations
    r1 = CheckResult("rescaled_b_c")
    for (a1, i), (b1, j) in itertools.product(pts, repeat=2):
        lhs = den(b1) * Bf(a1, i, b1, j) - den(a1) * Cf(b1, j, a1, i)
        r1.record(lhs + b1 * den(a1 + b1), [_key_text((a1, i, b1, j))])
    add("rescaled b-c relation", "(1+εβ)B(α,β) - (1+εα)C(β,α) = -β(1+ε(α+β))", r1)

    r2, r3 = CheckResult("rescaled_b_b"), CheckResult("rescaled_c_b")
    for A, B, C in guarded_triples():
        key = [_key_text(A + B + C)]
        lhs = (Bf(*B, *C) * Bf(*A, *_s(B, C)) - Bf(*A, *C) * Bf(*B, *_s(A, C)))
        r2.record(lhs - (A[0] - B[0]) * Bf(*_s(A, B), *C), key)
        lhs = Cf(*B, *C) * Bf(*A, *_s(B, C)) + C[0] * Cf(*B, *_s(A, C))
        r3.record(lhs + B[0] * Cf(*_s(A, B), *C), key)
    add("rescaled b-b relation", "B(β,γ)B(α,β+γ) - B(α,γ)B(β,α+γ) = (α-β)B(α+β,γ)", r2)
    add("rescaled c-b relation", "C(β,γ)B(α,β+γ) + γC(β,α+γ) = -βC(α+β,γ)", r3)

    zero = Fraction(0)
    r = CheckResult("origin_vanishing")
    r.record(Bf(zero, 0, zero, 0), ["B(0,0,0,0)"])
    r.record(Cf(zero, 0, zero, 0), ["C(0,0,0,0)"])
    add("B(0,0,0,0) = C(0,0,0,0) = 0", "B(0,0,0,0) = C(0,0,0,0) = 0", r)

    r = CheckResult("c_product_vanishing")
    for (b1, j), (g, k) in itertools.product(pts, repeat=2):
        if _in_window(w, (b1 + g, j + k)):
            r.record(Cf(b1, j, g, k) * Cf(b1 + g, j + k, zero, 0), [_key_text((b1, j, g, k))])
    add("C(β,j,γ,k)·C(β+γ,j+k,0,0) = 0", "C(β,j,γ,k)·C(β+γ,j+k,0,0) = 0", r)

    r = CheckResult("c_right_zero")
    for b1, j in pts:
        v = Cf(b1, j, zero, 0)
        # a square vanishing in a field forces the base to vanish
        r.record_bool(not (v * v) and not v, [_key_text((b1, j, 0, 0))], v)
    add("C(β,j,0,0) = 0", "C(β,j,0,0)^2 = 0 hence C(β,j,0,0) = 0", r)

    r = CheckResult("b_left_zero")
    for b1, j in pts:
        r.record(Bf(zero, 0, b1, j) + b1, [_key_text((0, 0, b1, j))])
    add("B(0,0,β,j) = -β", "B(0,0,β,j) = -β", r)

    ints = sorted({int(q) for q in _window_ratio_set(degs)})
    ra, rb = CheckResult("chain_minus"), CheckResult("chain_plus")
    for g in degs:
        if not g:
            continue
        for k in w.loops:
            for a in ints:
                if a != 1 and w.has_degree(-a * g) and w.has_loop(-a * k):
                    ra.record(Cf(-a * g, -a * k, g, k), [_key_text((-a * g, -a * k, g, k))])
                if a != -1 and w.has_degree(a * g) and w.has_loop(a * k):
                    rb.record(Cf(a * g, a * k, g, k), [_key_text((a * g, a * k, g, k))])
    add("C(-aγ,-ak,γ,k) = 0 for a ≠ 1", "C(-aγ,-ak,γ,k) = 0 for window integers a ≠ 1", ra)
    add("C(aγ,ak,γ,k) = 0 for a ≠ -1", "C(aγ,ak,γ,k) = 0 for window integers a ≠ -1", rb)

    r = CheckResult("c_off_diagonal")
    for (a1, i), (b1, j) in itertools.product(pts, repeat=2):
        if a1 + b1:
            r.record(Cf(a1, i, b1, j), [_key_text((a1, i, b1, j))])
    add("C(α,i,β,j) = 0 for α+β ≠ 0", "C(α,i,β,j) = 0 whenever α+β ≠ 0", r)

    one = Fraction(1)
    m_raw = Cf(one, 1, -one, -1) if w.has_loop(1) and w.has_loop(-1) and w.has_degree(one) else Cf(one, 0, -one, 0)
    r = CheckResult("c_diagonal")
    for g, k in pts:
        if _in_window(w, (-g, -k)):
            r.record(Cf(-g, -k, g, k) + g * m_raw, [_key_text((-g, -k, g, k))])
    add("C(-γ,-k,γ,k) = -γ·m", "C(-γ,-k,γ,k) = -γ·m with m = C(1,1,-1,-1)", r)

    # the derivation's constant is minus the family parameter of the plus family
    recovered = -m_raw
    r = CheckResult("recovered_m")
    r.record(recovered - m_target, ["-C(1,1,-1,-1)", str(m_target)])
    add("recovered m", "-C(1,1,-1,-1) equals the family parameter m", r)

    rb_, rc_ = CheckResult("closing_b"), CheckResult("closing_c")
    for (a1, i), (b1, j) in itertools.product(pts, repeat=2):
        delta = 0 if a1 + b1 else 1
        key = [_key_text((a1, i, b1, j))]
        rb_.record(sf.b(a1, i, b1, j) - (-b1) * (1 + (1 - eps * b1) * recovered * delta), key)
        c_from_C = (Cf(a1, i, b1, j) * den(b1) / den(a1 + b1))
        rc_.record(c_from_C - b1 * (1 + eps * b1) * recovered * delta, key)
    add("closing b formula", "b(α,β) = -β(1+(1-εβ)mδ_{α+β,0})", rb_)
    add("closing c formula", "c(α,β) = β(1+εβ)mδ_{α+β,0}", rc_)

    # d and e at α = i = 0: coefficient of d(β,γ) in the specialized equation
    zr, fd, fe = CheckResult("de_zero_solves"), CheckResult("d_forced"), CheckResult("e_forced")
    zsf = StructureFunctions(sf.a, sf.b, sf.c)
    for B, C in itertools.product(pts, repeat=2):
        if not (_in_window(w, _s(B, C))):
            continue
        A = (zero, 0)
        key = [_key_text(B + C)]
        zr.record(_eq_da_bd(zsf, A, B, C, 1), key)
        zr.record(_eq_eb_be(zsf, A, B, C, 1), key)
        coef_d = sf.a(zero, 0, *_s(B, C)) - sf.b(zero, 0, *C) + B[0]
        coef_e = sf.b(zero, 0, *_s(B, C)) - sf.b(zero, 0, *C) + B[0]
        fd.record_bool(bool(coef_d), key, f"coefficient of d(β,γ) is {coef_d}")
        fe.record_bool(bool(coef_e), key, f"coefficient of e(β,γ) is {coef_e}")
    add("d ≡ e ≡ 0 solves the α=i=0 specializations", "d ≡ e ≡ 0 satisfies the α=i=0 d- and e-equations", zr)
    add("α=i=0 specialization forces d ≡ 0", "the α=i=0 d-equation has a nonzero coefficient on d(β,γ)", fd)
    add("α=i=0 specialization forces e ≡ 0", "the α=i=0 e-equation has a nonzero coefficient on e(β,γ)", fe)

    add("α=i=0 linear d/e system is trivial",
        "all α=i=0 d- and e-linear equations together admit only d ≡ e ≡ 0",
        _de_kernel_check(sf, w, [(zero, 0)], "de_origin_kernel"), gating=False)
    add("window linear d/e system is trivial",
        "the window-guarded d- and e-linear equations admit only d ≡ e ≡ 0",
        _de_kernel_check(sf, w), gating=False)

    return Transcript(steps, m_target, m_raw, recovered)


def _window_ratio_set(degs) -> set:
    out = set()
    for g in degs:
        if not g:
            continue
        for h in degs:
            q = h / g
            if q.denominator == 1:
                out.add(q)
    return out


def _de_kernel_check(sf: StructureFunctions, w: Window, first_points=None,
                     name: str = "de_linear_kernel") -> CheckResult:
    """Rank test: do the guarded linear d- and e-equations force d = e = 0?

    With a, b, c fixed, the equations da_bd, eb_be, cd, ce and d/e symmetry are
    linear in the unknown values of d and e at window index pairs.
    ``first_points`` restricts the first index (α, i) of the equations.
    """
    pts = _index_points(w)
    firsts = pts if first_points is None else list(first_points)
    unknown = {}
    for fn in "de":
        for P, Q in itertools.product(pts, repeat=2):
            if _in_window(w, _s(P, Q)):
                unknown[(fn, P, Q)] = len(unknown)
    eng = SparseEchelon(complex_ring=True)

    def add(row):
        row = {k: v for k, v in row.items() if v}
        if row:
            eng.add(row)

    def col(fn, P, Q):
        return unknown.get((fn, P, Q))

    for A, B, C in itertools.product(firsts, pts, pts):
        if not (_in_window(w, _s(A, B)) and _in_window(w, _s(B, C)) and _in_window(w, _s(A, C))):
            continue
        for fn, partner in (("d", sf.a), ("e", sf.b)):
            row: dict = {}
            terms = ((col(fn, B, C), _f(partner, A, _s(B, C))),
                     (col(fn, B, _s(A, C)), -_f(sf.b, A, C)),
                     (col(fn, _s(A, B), C), GaussianRational(B[0])))
            for cidx, v in terms:
                if cidx is None:
                    break
                row[cidx] = row.get(cidx, ZERO) + v
            else:
                add(row)
            row = {}
            terms = ((col(fn, A, _s(B, C)), _f(sf.c, B, C)),
                     (col(fn, B, _s(A, C)), -_f(sf.c, A, C)))
            for cidx, v in terms:
                if cidx is None:
                    break
                row[cidx] = row.get(cidx, ZERO) + v
            else:
                add(row)
    for (fn, P, Q), n in unknown.items():
        m = unknown[(fn, Q, P)]
        if m != n:
            add({n: ONE, m: -ONE})
    res = CheckResult(name, detail={"unknowns": len(unknown), "rank": eng.rank})
    res.record_bool(eng.rank == len(unknown), ["kernel dimension"], len(unknown) - eng.rank)
    return res


# Witt table audit ------------------------------------------------------------


def witt_lsa_product(mdeg: int, ndeg: int, wp: WittLsaParams) -> GaussianRational:
    """Coefficient of L(m+n) in L(m)∘L(n) for the Witt multiplication table."""
    den = 1 + wp.eps * (mdeg + ndeg)
    if not den:
        raise LsaDenominatorError(f"1+ε(m+n) vanishes at m+n={mdeg + ndeg}")
    return (wp.alpha_param + ndeg + wp.alpha_param * wp.eps * mdeg) / den


def witt_convention_audit(wp: WittLsaParams, degree_bound: int = 3) -> dict:
    """Audit the Witt table: left symmetry and commutator against both conventions."""
    rng = range(-degree_bound, degree_bound + 1)
    f = lambda m, n: witt_lsa_product(m, n, wp)  # noqa: E731
    ls = CheckResult("witt_left_symmetry")
    for m, n, l in itertools.product(rng, repeat=3):
        r = (f(m, n) * f(m + n, l) - f(n, l) * f(m, n + l)
             - f(n, m) * f(m + n, l) + f(m, l) * f(n, m + l))
        ls.record(r, [f"({m},{n},{l})"])
    compat = {}
    for conv in BracketConvention:
        sg = 1 if conv is BracketConvention.PAPER else -1
        chk = CheckResult(f"witt_compatibility_{conv.value}")
        for m, n in itertools.product(rng, repeat=2):
            chk.record(f(m, n) - f(n, m) - sg * (m - n), [f"({m},{n})"])
        compat[conv.value] = chk
    # does the L-L part of the family have this table's shape at this ε?
    sf = graded_family(LsaParams(wp.eps, 0))
    shape = CheckResult("witt_matches_family_restriction")
    for m, n in itertools.product(rng, repeat=2):
        shape.record(f(m, n) - sf.a(Fraction(m), 0, Fraction(n), 0), [f"({m},{n})"])
    return {
        "alpha_param": str(wp.alpha_param),
        "eps": str(wp.eps),
        "degree_bound": degree_bound,
        "left_symmetric": ls.passed,
        "compatible_with": [c for c, chk in compat.items() if chk.passed],
        "matches_family_restriction": shape.passed,
        "checks": [ls.to_dict()] + [compat[c].to_dict() for c in sorted(compat)] + [shape.to_dict()],
    }


# seeded perturbations -------------------------------------------------------


def sample_perturbation(sf: StructureFunctions, w: Window, rng: random.Random) -> tuple[StructureFunctions, dict]:
    """Add a small nonzero rational to one of b, c, d, e at one window index pair
    whose product lands in the window."""
    pts = _index_points(w)
    while True:
        P, Q = rng.choice(pts), rng.choice(pts)
        if _in_window(w, _s(P, Q)):
            break
    name = rng.choice("bcde")
    delta = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.randint(1, 4))
    key = P + Q
    return sf.perturbed(name, key, delta), {"function": name, "at": _key_text(key), "delta": str(delta)}
