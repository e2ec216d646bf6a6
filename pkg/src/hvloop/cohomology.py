"""Second cocycles, coboundaries, normalization and truncated H².

Forms are antisymmetric bilinear pairings on basis vectors.  Everything that
quantifies over a window uses the closure guard: a cocycle-identity instance
``(x, y, z)`` is used only when each pairwise bracket is zero or lands in the
window, so truncation never invents constraints.

Coboundary membership is decided against functionals supported in the window
and extended by zero.  Such a coboundary vanishes on window pairs whose
bracket leaves the window, so a form must vanish there to be a coboundary.
"""

from __future__ import annotations

import itertools
import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .algebra import (
    BasisIndex,
    BracketConvention,
    Kind,
    L,
    H,
    Window,
    _as_element,
    _cached,
    _table_of,
    enumerate_basis,
)
from .checks import CheckResult, select_positions
from .exact import ZERO, ONE, GaussianRational, Matrix, SparseEchelon, as_scalar, rank_and_solve

__all__ = [
    "BilinearForm",
    "SparseForm",
    "CanonicalCocycle",
    "CoboundaryForm",
    "FormCombination",
    "LinearFunctional",
    "canonical_cocycle",
    "coboundary_of",
    "cocycle_residual",
    "guarded_triples",
    "window_pairs",
    "verify_cocycle",
    "normalizing_functional",
    "normalize",
    "anchor_checks",
    "resolve_normalization_sign",
    "NormalFormReport",
    "verify_normal_form",
    "CoboundaryCertificate",
    "is_coboundary",
    "H2Report",
    "truncated_h2",
    "coboundary_space_dimension",
    "sample_cocycle",
    "sample_functional",
]

PAPER = BracketConvention.PAPER


# forms ----------------------------------------------------------------------


class BilinearForm:
    """Antisymmetric bilinear form on basis vectors.

    Subclasses implement :meth:`_raw` for canonically ordered pairs ``x < y``.
    """

    def _raw(self, x: BasisIndex, y: BasisIndex) -> GaussianRational:
        raise NotImplementedError

    def value(self, x: BasisIndex, y: BasisIndex) -> GaussianRational:
        if x == y:
            return ZERO
        if x < y:
            return self._raw(x, y)
        return -self._raw(y, x)

    def __call__(self, u, v) -> GaussianRational:
        u, v = _as_element(u), _as_element(v)
        acc = ZERO
        for bx, cx in u._terms.items():
            for by, cy in v._terms.items():
                val = self.value(bx, by)
                if val:
                    acc = acc + cx * cy * val
        return acc

    # accessor views used by the identity chain
    def A(self, alpha, i, j) -> GaussianRational:
        return self.value(L(alpha, i), L(-Fraction(alpha), j))

    def B(self, alpha, i, j) -> GaussianRational:
        return self.value(L(alpha, i), H(-Fraction(alpha), j))

    def C(self, alpha, i, j) -> GaussianRational:
        return self.value(H(alpha, i), H(-Fraction(alpha), j))

    def __add__(self, other: "BilinearForm") -> "FormCombination":
        return FormCombination(((ONE, self), (ONE, other)))

    def __sub__(self, other: "BilinearForm") -> "FormCombination":
        return FormCombination(((ONE, self), (-ONE, other)))

    def scale(self, c) -> "FormCombination":
        return FormCombination(((as_scalar(c), self),))

    def restrict(self, w: Window) -> "SparseForm":
        """Materialize the form on all canonically ordered window pairs."""
        out = {}
        for x, y in window_pairs(w):
            v = self._raw(x, y)
            if v:
                out[(x, y)] = v
        return SparseForm._wrap(out)


class SparseForm(BilinearForm):
    """Explicitly stored form; only ``x < y`` keys, no zeros."""

    __slots__ = ("pairs",)

    def __init__(self, pairs: Mapping[tuple[BasisIndex, BasisIndex], object] | None = None):
        out: dict = {}
        for (x, y), v in (pairs or {}).items():
            v = as_scalar(v)
            if x == y:
                if v:
                    raise ValueError(f"antisymmetric form cannot pair {x} with itself")
                continue
            if y < x:
                x, y, v = y, x, -v
            w = out.get((x, y), ZERO) + v
            if w:
                out[(x, y)] = w
            else:
                out.pop((x, y), None)
        self.pairs = out

    @classmethod
    def _wrap(cls, pairs: dict) -> "SparseForm":
        obj = object.__new__(cls)
        obj.pairs = pairs
        return obj

    def _raw(self, x, y):
        return self.pairs.get((x, y), ZERO)

    def with_entry(self, x: BasisIndex, y: BasisIndex, delta) -> "SparseForm":
        """Copy with ``delta`` added at ``(x, y)`` (antisymmetrically)."""
        out = dict(self.pairs)
        delta = as_scalar(delta)
        if y < x:
            x, y, delta = y, x, -delta
        v = out.get((x, y), ZERO) + delta
        if v:
            out[(x, y)] = v
        else:
            out.pop((x, y), None)
        return SparseForm._wrap(out)

    def __eq__(self, other) -> bool:
        return isinstance(other, SparseForm) and self.pairs == other.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    def to_list(self) -> list[list[str]]:
        return [[str(x), str(y), str(v)] for (x, y), v in sorted(self.pairs.items())]

    def __repr__(self) -> str:
        return f"SparseForm({len(self.pairs)} entries)"


class CanonicalCocycle(BilinearForm):
    """φ_{k,x}: supported on pairs with opposite degrees and loop sum ``k``."""

    def __init__(self, k: int, family: int):
        if family not in (1, 2, 3):
            raise ValueError(f"cocycle family must be 1, 2 or 3, got {family!r}")
        self.k = int(k)
        self.family = family

    def _raw(self, x, y):
        if x.degree + y.degree != 0 or x.loop + y.loop != self.k:
            return ZERO
        a = x.degree
        if self.family == 1:
            if x.kind is Kind.L and y.kind is Kind.L:
                return GaussianRational((a ** 3 - a) / 12)
        elif self.family == 2:
            if x.kind is Kind.L and y.kind is Kind.H:
                return GaussianRational(a * a - a)
        elif x.kind is Kind.H and y.kind is Kind.H:
            return GaussianRational(a)
        return ZERO

    @property
    def label(self) -> tuple[int, int]:
        return (self.k, self.family)

    def __repr__(self) -> str:
        return f"CanonicalCocycle(k={self.k}, family={self.family})"


def canonical_cocycle(k: int, family: int) -> CanonicalCocycle:
    return CanonicalCocycle(k, family)


@dataclass(frozen=True)
class LinearFunctional:
    """Linear map on the algebra; unstored basis vectors map to zero."""

    values: Mapping[BasisIndex, GaussianRational] = field(default_factory=dict)

    def __post_init__(self):
        clean = {b: as_scalar(v) for b, v in self.values.items()}
        object.__setattr__(self, "values", {b: v for b, v in clean.items() if v})

    def __call__(self, x) -> GaussianRational:
        x = _as_element(x)
        acc = ZERO
        for b, c in x._terms.items():
            v = self.values.get(b)
            if v is not None:
                acc = acc + c * v
        return acc

    def at(self, b: BasisIndex) -> GaussianRational:
        return self.values.get(b, ZERO)

    def restrict(self, w: Window) -> "LinearFunctional":
        return LinearFunctional({b: v for b, v in self.values.items() if b in w})

    def to_list(self) -> list[list[str]]:
        return [[str(b), str(v)] for b, v in sorted(self.values.items())]


class CoboundaryForm(BilinearForm):
    """ψ_f(x, y) = f([x, y])."""

    def __init__(self, f: LinearFunctional, conv=PAPER):
        self.f = f
        self._table = _table_of(conv)

    def _raw(self, x, y):
        t = _cached(self._table, x, y)
        if t is None:
            return ZERO
        v = self.f.values.get(t[1])
        return ZERO if v is None else v * t[0]


def coboundary_of(f: LinearFunctional, conv=PAPER) -> CoboundaryForm:
    return CoboundaryForm(f, conv)


class FormCombination(BilinearForm):
    """Finite linear combination ``Σ c_t · form_t``."""

    def __init__(self, terms: Iterable[tuple[object, BilinearForm]]):
        flat = []
        for c, form in terms:
            c = as_scalar(c)
            if isinstance(form, FormCombination):
                flat.extend((c * c2, f2) for c2, f2 in form.terms)
            else:
                flat.append((c, form))
        self.terms = tuple((c, f) for c, f in flat if c)

    def _raw(self, x, y):
        acc = ZERO
        for c, form in self.terms:
            v = form._raw(x, y)
            if v:
                acc = acc + c * v
        return acc


# window enumeration ---------------------------------------------------------


@lru_cache(maxsize=32)
def window_pairs(w: Window) -> tuple[tuple[BasisIndex, BasisIndex], ...]:
    return tuple(itertools.combinations(enumerate_basis(w), 2))


@dataclass(frozen=True)
class GuardedTriple:
    x: BasisIndex
    y: BasisIndex
    z: BasisIndex
    # (coefficient, first, second): the residual is Σ coefficient·ψ(first, second)
    terms: tuple[tuple[Fraction, BasisIndex, BasisIndex], ...]

    @property
    def sector(self) -> tuple[Fraction, int]:
        return (self.x.degree + self.y.degree + self.z.degree,
                self.x.loop + self.y.loop + self.z.loop)


@lru_cache(maxsize=16)
def guarded_triples(w: Window, conv=PAPER) -> tuple[GuardedTriple, ...]:
    """Triples x < y < z whose three pairwise brackets are zero or in ``w``."""
    table = _table_of(conv)
    basis = enumerate_basis(w)
    out = []
    for x, y, z in itertools.combinations(basis, 3):
        terms = []
        ok = True
        for a, b, c in ((x, y, z), (y, z, x), (z, x, y)):
            t = _cached(table, b, c)
            if t is None:
                continue
            if t[1] not in w:
                ok = False
                break
            terms.append((t[0], a, t[1]))
        if ok:
            out.append(GuardedTriple(x, y, z, tuple(terms)))
    return tuple(out)


def cocycle_residual(psi: BilinearForm, x, y, z, conv=PAPER) -> GaussianRational:
    """ψ(x,[y,z]) + ψ(y,[z,x]) + ψ(z,[x,y])."""
    from .algebra import bracket

    return (psi(x, bracket(y, z, conv)) + psi(y, bracket(z, x, conv))
            + psi(z, bracket(x, y, conv)))


def _triple_residual(psi: BilinearForm, t: GuardedTriple) -> GaussianRational:
    acc = ZERO
    for c, a, b in t.terms:
        v = psi.value(a, b)
        if v:
            acc = acc + v * c
    return acc


def verify_cocycle(psi: BilinearForm, w: Window, name: str = "cocycle", conv=PAPER,
                   budget: int | None = None, seed: int = 0) -> CheckResult:
    """Cocycle identity over every closure-guarded triple of ``w``.

    With ``budget`` set, a seeded subsample of that many triples is used.
    """
    res = CheckResult(name)
    triples = guarded_triples(w, conv)
    for n in select_positions(len(triples), budget, seed):
        t = triples[n]
        r = _triple_residual(psi, t)
        res.domain_size += 1
        if r:
            res.failures += 1
            if res.first_witness is None:
                res.first_witness = (str(t.x), str(t.y), str(t.z))
                res.residual = str(r)
    return res


# normalization --------------------------------------------------------------

SIGN_VARIANTS = ("printed", "corrected")


def _h0_sign(sign_variant: str) -> int:
    if sign_variant == "printed":
        return -1
    if sign_variant == "corrected":
        return 1
    raise ValueError(f"unknown normalization sign variant {sign_variant!r}")


def normalizing_functional(psi: BilinearForm, w: Window, sign_variant: str = "corrected") -> LinearFunctional:
    """The functional whose coboundary clears the four anchor evaluations."""
    s = _h0_sign(sign_variant)
    l00, l10 = L(0, 0), L(1, 0)
    vals = {}
    for b in enumerate_basis(w):
        a = b.degree
        if b.kind is Kind.L:
            if a:
                v = psi.value(l00, b) * (-1 / a)
            else:
                v = psi.value(l10, L(-1, b.loop)) * Fraction(1, 2)
        else:
            if a:
                v = psi.value(l00, b) * (-1 / a)
            else:
                v = psi.value(l10, H(-1, b.loop)) * s
        vals[b] = v
    return LinearFunctional(vals)


def normalize(psi: BilinearForm, w: Window, sign_variant: str = "corrected") -> SparseForm:
    """``ψ - ψ_f`` on the window pairs, ``f`` the normalizing functional."""
    f = normalizing_functional(psi, w, sign_variant)
    return (psi - coboundary_of(f)).restrict(w)


def anchor_checks(phi: BilinearForm, w: Window) -> list[CheckResult]:
    """The four anchor evaluations a normalized cocycle must clear."""
    l00, l10 = L(0, 0), L(1, 0)
    ll0, lh0 = CheckResult("normal_L00_L", kind="precondition"), CheckResult("normal_L00_H", kind="precondition")
    l1, h1 = CheckResult("normal_L10_L", kind="precondition"), CheckResult("normal_L10_H", kind="precondition")
    for a in w.degrees:
        if not a:
            continue
        for i in w.loops:
            ll0.record(phi.value(l00, L(a, i)), (l00, L(a, i)))
            lh0.record(phi.value(l00, H(a, i)), (l00, H(a, i)))
    if w.has_degree(Fraction(1)):
        for i in w.loops:
            l1.record(phi.value(l10, L(-1, i)), (l10, L(-1, i)))
            h1.record(phi.value(l10, H(-1, i)), (l10, H(-1, i)))
    return [ll0, lh0, l1, h1]


@dataclass
class SignVerdict:
    name: str
    passing: list[str]
    witnesses: dict[str, dict]

    @property
    def winner(self) -> str | None:
        return self.passing[0] if len(self.passing) == 1 else None

    def to_dict(self) -> dict:
        return {"name": self.name, "passing": list(self.passing), "winner": self.winner,
                "rejected_witnesses": self.witnesses}


def resolve_normalization_sign(psis: Sequence[BilinearForm], w: Window) -> SignVerdict:
    """Select the sign variant(s) whose normalization clears every anchor."""
    passing, witnesses = [], {}
    for variant in SIGN_VARIANTS:
        bad = None
        for n, psi in enumerate(psis):
            phi = normalize(psi, w, variant)
            for chk in anchor_checks(phi, w):
                if not chk.passed:
                    bad = {"case": n, "check": chk.name, "witness": list(chk.first_witness),
                           "residual": chk.residual}
                    break
            if bad:
                break
        if bad is None:
            passing.append(variant)
        else:
            witnesses[variant] = bad
    return SignVerdict("normalization_sign", passing, witnesses)


# identity chain -------------------------------------------------------------


@dataclass
class NormalFormReport:
    preconditions: list[CheckResult]
    checks: list[CheckResult]

    @property
    def precondition_ok(self) -> bool:
        return all(c.passed for c in self.preconditions)

    @property
    def passed(self) -> bool:
        return self.precondition_ok and all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.preconditions + self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failing(self) -> list[str]:
        return [c.name for c in self.preconditions + self.checks if not c.passed]

    def all_checks(self) -> list[CheckResult]:
        return self.preconditions + self.checks


_PAIR_KINDS = {"ll": (Kind.L, Kind.L), "lh": (Kind.L, Kind.H), "hh": (Kind.H, Kind.H)}


def _closed_form_factor(prefix: str, a: Fraction) -> Fraction:
    if prefix == "ll":
        return (a ** 3 - a) / 6
    if prefix == "lh":
        return (a * a - a) / 2
    return a


_ANCHOR_DEGREE = {"ll": Fraction(2), "lh": Fraction(2), "hh": Fraction(1)}


def _anchor(phi: BilinearForm, w: Window, prefix: str, s: int):
    """Anchor value at loop sum ``s`` read off the first realizable pair."""
    a = _ANCHOR_DEGREE[prefix]
    if not w.has_degree(a):
        return None
    k1, k2 = _PAIR_KINDS[prefix]
    for i in w.loops:
        if w.has_loop(s - i):
            return phi.value(BasisIndex(k1, a, i), BasisIndex(k2, -a, s - i))
    return None


def verify_normal_form(phi: BilinearForm, w: Window, conv=PAPER) -> NormalFormReport:
    """Check the identity chain a normalized cocycle must satisfy.

    Per pair family (L-L, L-H, H-H): the opposite-degree pairing depends only
    on the loop sum, it vanishes at degree 0, and every pairing equals the
    closed form relative to its anchor (degree 2 for L-L and L-H, degree 1
    for H-H).  Preconditions (cocycle identity and the four anchors) are
    reported separately.
    """
    pre = [verify_cocycle(phi, w, "cocycle_identity", conv)]
    for c in pre:
        c.kind = "precondition"
    pre += anchor_checks(phi, w)
    checks = []
    for prefix, (k1, k2) in _PAIR_KINDS.items():
        sumdep = CheckResult(f"{prefix}_sum_dependence")
        zero = CheckResult(f"{prefix}_degree_zero_vanishing")
        closed = CheckResult(f"{prefix}_closed_form")
        for a in w.degrees:
            reps: dict[int, tuple] = {}
            for i in w.loops:
                for j in w.loops:
                    x, y = BasisIndex(k1, a, i), BasisIndex(k2, -a, j)
                    v = phi.value(x, y)
                    rep = reps.get(i + j)
                    if rep is None:
                        reps[i + j] = (x, y, v)
                    else:
                        sumdep.record(v - rep[2], (x, y, rep[0], rep[1]))
                    if a == 0:
                        zero.record(v, (x, y))
        anchors = {}
        for a in w.degrees:
            for b in w.degrees:
                for i in w.loops:
                    for j in w.loops:
                        x, y = BasisIndex(k1, a, i), BasisIndex(k2, b, j)
                        if x == y:
                            continue
                        if a + b:
                            expected = ZERO
                        else:
                            s = i + j
                            if s not in anchors:
                                anchors[s] = _anchor(phi, w, prefix, s)
                            if anchors[s] is None:
                                continue
                            expected = anchors[s] * _closed_form_factor(prefix, a)
                        closed.record(phi.value(x, y) - expected, (x, y))
        checks += [sumdep, zero, closed]
    return NormalFormReport(pre, checks)


# coboundary membership ------------------------------------------------------


@dataclass
class CoboundaryCertificate:
    status: str  # "is_coboundary" | "not_coboundary"
    functional: LinearFunctional | None = None
    # (pair, coefficient) rows whose combination is 0 on every unknown
    witness: tuple[tuple[tuple[BasisIndex, BasisIndex], GaussianRational], ...] | None = None

    def verify(self, psi: BilinearForm, w: Window, conv=PAPER) -> bool:
        table = _table_of(conv)
        if self.status == "is_coboundary":
            f = self.functional
            if any(b not in w for b in f.values):
                return False
            for x, y in window_pairs(w):
                t = _cached(table, x, y)
                rhs = ZERO if t is None else f.at(t[1]) * t[0]
                if psi.value(x, y) != rhs:
                    return False
            return True
        combo: dict = defaultdict(lambda: ZERO)
        total = ZERO
        for (x, y), c in self.witness:
            if x not in w or y not in w:
                return False
            t = _cached(table, x, y)
            if t is not None and t[1] in w:
                combo[t[1]] += c * t[0]
            total = total + c * psi.value(x, y)
        return not any(combo.values()) and bool(total)

    def to_dict(self) -> dict:
        d = {"status": self.status}
        if self.functional is not None:
            d["functional"] = self.functional.to_list()
        if self.witness is not None:
            d["witness"] = [[str(x), str(y), str(c)] for (x, y), c in self.witness]
        return d


def _sectors(w: Window):
    """Window pairs grouped by (degree sum, loop sum), canonical order kept."""
    out: dict = defaultdict(list)
    for x, y in window_pairs(w):
        out[(x.degree + y.degree, x.loop + y.loop)].append((x, y))
    return out


def is_coboundary(psi: BilinearForm, w: Window, conv=PAPER) -> CoboundaryCertificate:
    """Decide ``ψ = ψ_f`` on window pairs for ``f`` supported in ``w``."""
    table = _table_of(conv)
    values = {}
    for (d, s), pairs in sorted(_sectors(w).items()):
        unknowns = [b for b in (BasisIndex(Kind.L, d, s), BasisIndex(Kind.H, d, s)) if b in w]
        rows, rhs = [], []
        for x, y in pairs:
            t = _cached(table, x, y)
            row = [ZERO] * len(unknowns)
            if t is not None and t[1] in w:
                row[unknowns.index(t[1])] = GaussianRational(t[0])
            rows.append(row)
            rhs.append(psi.value(x, y))
        if not any(rhs):
            continue
        if not unknowns:
            k = next(n for n, v in enumerate(rhs) if v)
            return CoboundaryCertificate("not_coboundary", witness=((pairs[k], ONE),))
        sol = rank_and_solve(Matrix.from_rows(rows, len(unknowns)), rhs)
        if sol.status == "infeasible":
            wit = tuple((pairs[n], c) for n, c in enumerate(sol.infeasibility_witness) if c)
            return CoboundaryCertificate("not_coboundary", witness=wit)
        for b, v in zip(unknowns, sol.solution):
            values[b] = v
    return CoboundaryCertificate("is_coboundary", functional=LinearFunctional(values))


# truncated H² ---------------------------------------------------------------


@dataclass
class H2Report:
    window: Window
    dim_cocycles: int
    dim_coboundaries: int
    dim_quotient: int
    matched_classes: list[tuple[int, int]]
    imposes_identities: bool
    n_pairs: int
    n_constraints: int
    unmatched: int
    quotient_by_sector: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "window": self.window.describe(),
            "dim_cocycles": self.dim_cocycles,
            "dim_coboundaries": self.dim_coboundaries,
            "dim_quotient": self.dim_quotient,
            "matched_classes": [list(t) for t in self.matched_classes],
            "imposes_identities": self.imposes_identities,
            "n_pairs": self.n_pairs,
            "n_constraints": self.n_constraints,
            "unmatched": self.unmatched,
            "quotient_by_sector": self.quotient_by_sector,
        }


def _coboundary_generators(w: Window, pairs, d, s, table):
    """Coboundary of each dual basis functional at (d, s), as pair vectors."""
    gens = []
    for b in (BasisIndex(Kind.L, d, s), BasisIndex(Kind.H, d, s)):
        if b not in w:
            continue
        vec = {}
        for n, (x, y) in enumerate(pairs):
            t = _cached(table, x, y)
            if t is not None and t[1] == b:
                vec[n] = t[0]
        gens.append(vec)
    return gens


def truncated_h2(w: Window, conv=PAPER) -> H2Report:
    """Dimensions of window cocycles, coboundaries and their quotient."""
    from .algebra import EmptyWindowError

    if w.is_empty():
        raise EmptyWindowError("window too small: no basis vectors")
    table = _table_of(conv)
    sectors = _sectors(w)
    by_sector: dict = defaultdict(list)
    triples = guarded_triples(w, conv)
    for t in triples:
        if t.terms:
            by_sector[t.sector].append(t)
    dz = db = 0
    matched = []
    per_sector = {}
    n_constraints = 0
    for key in sorted(sectors):
        d, s = key
        pairs = sectors[key]
        index = {p: n for n, p in enumerate(pairs)}
        eng = SparseEchelon()
        for t in by_sector.get(key, ()):
            row: dict = {}
            for c, a, b in t.terms:
                if a == b:
                    continue
                p, sign = ((a, b), 1) if a < b else ((b, a), -1)
                n = index[p]
                row[n] = row.get(n, 0) + sign * c
            row = {n: v for n, v in row.items() if v}
            if row:
                n_constraints += 1
                eng.add(row)
        zdim = len(pairs) - eng.rank
        cob = SparseEchelon()
        for vec in _coboundary_generators(w, pairs, d, s, table):
            cob.add(vec)
        bdim = cob.rank
        dz += zdim
        db += bdim
        if zdim - bdim:
            per_sector[f"{d}|{s}"] = zdim - bdim
        if d == 0:
            for fam in (1, 2, 3):
                phi = CanonicalCocycle(s, fam)
                vec = {n: phi._raw(x, y) for n, (x, y) in enumerate(pairs)}
                if cob.add({n: v for n, v in vec.items() if v}) is not None:
                    matched.append((s, fam))
    quotient = dz - db
    return H2Report(w, dz, db, quotient, matched, n_constraints > 0,
                    len(window_pairs(w)), n_constraints, quotient - len(matched),
                    dict(sorted(per_sector.items())))


@lru_cache(maxsize=8)
def _coboundary_engine(w: Window, conv=PAPER) -> SparseEchelon:
    table = _table_of(conv)
    pairs = window_pairs(w)
    eng = SparseEchelon()
    vecs: dict = defaultdict(dict)
    for n, (x, y) in enumerate(pairs):
        t = _cached(table, x, y)
        if t is not None and t[1] in w:
            vecs[t[1]][n] = t[0]
    for b in enumerate_basis(w):
        eng.add(vecs.get(b, {}))
    return eng


def coboundary_space_dimension(w: Window, extra: Sequence[BilinearForm] = (), conv=PAPER) -> int:
    """Rank of window coboundaries together with ``extra`` forms."""
    index = {p: n for n, p in enumerate(window_pairs(w))}
    eng = _coboundary_engine(w, conv).copy()
    for form in extra:
        sf = form.restrict(w)
        eng.add({index[p]: v for p, v in sf.pairs.items()})
    return eng.rank


# seeded samples -------------------------------------------------------------


def _small_rational(rng: random.Random, nonzero: bool = False) -> Fraction:
    while True:
        q = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
        if q or not nonzero:
            return q


def sample_functional(w: Window, rng: random.Random, nonzero: bool = True) -> LinearFunctional:
    """Random window-supported functional with small rational values."""
    return LinearFunctional({b: _small_rational(rng, nonzero) for b in enumerate_basis(w)})


def sample_cocycle(w: Window, rng: random.Random, ks: Sequence[int] | None = None):
    """``Σ c φ_{k,x} + ψ_g`` for random ``c`` and a random nonzero ``g``.

    Returns ``(form, coefficients, g)`` with ``coefficients`` keyed by (k, x).
    """
    if ks is None:
        ks = range(2 * w.loop_min, 2 * w.loop_max + 1)
    coeffs = {}
    terms = []
    for k in ks:
        for fam in (1, 2, 3):
            c = _small_rational(rng)
            if c:
                coeffs[(k, fam)] = c
                terms.append((c, CanonicalCocycle(k, fam)))
    g = sample_functional(w, rng)
    terms.append((ONE, coboundary_of(g)))
    return FormCombination(terms), coeffs, g
