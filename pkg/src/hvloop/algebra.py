"""The loop Heisenberg-Virasoro algebra: basis, sparse elements, bracket, windows.

Basis vectors are ``L(α, i)`` and ``H(α, i)`` with the degree ``α`` an exact
rational and the loop index ``i`` an integer.  The bracket is

    [L(α,i), L(β,j)] = (α-β) L(α+β, i+j)
    [L(α,i), H(β,j)] = -β H(α+β, i+j)
    [H(α,i), H(β,j)] = 0

Brackets of window elements may leave the window; they are computed exactly
anyway, and sweeps only quantify over in-window inputs.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Optional, Union

from .checks import CheckResult, select_positions
from .exact import ZERO, GaussianRational, as_scalar, format_rational

__all__ = [
    "Kind",
    "BasisIndex",
    "L",
    "H",
    "Element",
    "BracketConvention",
    "standard_table",
    "reversed_table",
    "corrupted_table",
    "basis_bracket",
    "bracket",
    "jacobi_residual",
    "grading_residual",
    "Window",
    "EmptyWindowError",
    "enumerate_basis",
    "verify_jacobi",
    "verify_antisymmetry",
    "verify_grading",
]


class Kind(enum.IntEnum):
    L = 0
    H = 1

    def __str__(self) -> str:
        return self.name


class BasisIndex(NamedTuple):
    """One basis vector; tuple order gives the canonical (kind, degree, loop) order."""

    kind: Kind
    degree: Fraction
    loop: int

    def __str__(self) -> str:
        return f"{self.kind.name}({_deg_text(self.degree)},{self.loop})"

    def __repr__(self) -> str:
        return str(self)


def _deg_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else format_rational(q)


def L(alpha, i: int) -> BasisIndex:
    return BasisIndex(Kind.L, Fraction(alpha), int(i))


def H(alpha, i: int) -> BasisIndex:
    return BasisIndex(Kind.H, Fraction(alpha), int(i))


# bracket tables -------------------------------------------------------------

BracketTerm = Optional[tuple[Fraction, BasisIndex]]
BracketTable = Callable[[BasisIndex, BasisIndex], BracketTerm]


def standard_table(x: BasisIndex, y: BasisIndex) -> BracketTerm:
    a, b = x.degree, y.degree
    if x.kind is Kind.L:
        if y.kind is Kind.L:
            c = a - b
            return (c, BasisIndex(Kind.L, a + b, x.loop + y.loop)) if c else None
        return (-b, BasisIndex(Kind.H, a + b, x.loop + y.loop)) if b else None
    if y.kind is Kind.L:
        return (a, BasisIndex(Kind.H, a + b, x.loop + y.loop)) if a else None
    return None


def reversed_table(x: BasisIndex, y: BasisIndex) -> BracketTerm:
    t = standard_table(x, y)
    return None if t is None else (-t[0], t[1])


def corrupted_table(x: BasisIndex, y: BasisIndex) -> BracketTerm:
    """Negative control: the H-H bracket is replaced by L(α+β, i+j)."""
    if x.kind is Kind.H and y.kind is Kind.H:
        return (Fraction(1), BasisIndex(Kind.L, x.degree + y.degree, x.loop + y.loop))
    return standard_table(x, y)


class BracketConvention(enum.Enum):
    PAPER = "paper"
    REVERSED = "reversed"

    @property
    def table(self) -> BracketTable:
        return standard_table if self is BracketConvention.PAPER else reversed_table

    @classmethod
    def parse(cls, text: str) -> "BracketConvention":
        try:
            return cls(text)
        except ValueError:
            raise ValueError(f"unknown bracket convention {text!r}") from None


Convention = Union[BracketConvention, BracketTable]


def _table_of(conv: Convention) -> BracketTable:
    if isinstance(conv, BracketConvention):
        return conv.table
    if callable(conv):
        return conv
    raise TypeError(f"not a bracket convention: {conv!r}")


@lru_cache(maxsize=None)
def _cached(table: BracketTable, x: BasisIndex, y: BasisIndex) -> BracketTerm:
    return table(x, y)


def basis_bracket(x: BasisIndex, y: BasisIndex, conv: Convention = BracketConvention.PAPER) -> BracketTerm:
    """Bracket of two basis vectors as ``(coefficient, index)`` or ``None`` for zero."""
    return _cached(_table_of(conv), x, y)


# elements -------------------------------------------------------------------


class Element:
    """Finite sparse linear combination of basis vectors; immutable."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[BasisIndex, object] | None = None):
        clean = {}
        if terms:
            for b, c in terms.items():
                c = as_scalar(c)
                if c:
                    clean[b] = c
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Element is immutable")

    @classmethod
    def _wrap(cls, terms: dict) -> "Element":
        obj = object.__new__(cls)
        object.__setattr__(obj, "_terms", terms)
        object.__setattr__(obj, "_hash", None)
        return obj

    @classmethod
    def basis(cls, b: BasisIndex, coeff=1) -> "Element":
        return cls({b: coeff})

    @property
    def terms(self) -> Mapping[BasisIndex, GaussianRational]:
        return MappingProxyType(self._terms)

    def items(self) -> Iterator[tuple[BasisIndex, GaussianRational]]:
        return iter(sorted(self._terms.items()))

    def coefficient(self, b: BasisIndex) -> GaussianRational:
        return self._terms.get(b, ZERO)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Element):
            return self._terms == other._terms
        if other == 0:
            return not self._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(frozenset(self._terms.items())))
        return self._hash

    def __add__(self, other: "Element") -> "Element":
        if not isinstance(other, Element):
            return NotImplemented
        out = dict(self._terms)
        for b, c in other._terms.items():
            v = out.get(b)
            v = c if v is None else v + c
            if v:
                out[b] = v
            else:
                out.pop(b, None)
        return Element._wrap(out)

    def __neg__(self) -> "Element":
        return Element._wrap({b: -c for b, c in self._terms.items()})

    def __sub__(self, other: "Element") -> "Element":
        if not isinstance(other, Element):
            return NotImplemented
        return self + (-other)

    def scale(self, s) -> "Element":
        s = as_scalar(s)
        if not s:
            return Element._wrap({})
        return Element._wrap({b: c * s for b, c in self._terms.items()})

    def __rmul__(self, s) -> "Element":
        return self.scale(s)

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"{c}*{b}" for b, c in self.items())

    def __repr__(self) -> str:
        return f"Element({self})"


ElementLike = Union[Element, BasisIndex]


def _as_element(x: ElementLike) -> Element:
    if isinstance(x, Element):
        return x
    if isinstance(x, tuple) and len(x) == 3:
        return Element._wrap({x: GaussianRational(1)})
    raise TypeError(f"not an element: {x!r}")


def bracket(x: ElementLike, y: ElementLike, conv: Convention = BracketConvention.PAPER) -> Element:
    """Bilinear bracket of two elements."""
    x, y = _as_element(x), _as_element(y)
    table = _table_of(conv)
    out: dict = {}
    for bx, cx in x._terms.items():
        for by, cy in y._terms.items():
            t = _cached(table, bx, by)
            if t is None:
                continue
            coef, idx = t
            v = cx * cy * coef
            w = out.get(idx)
            v = v if w is None else w + v
            if v:
                out[idx] = v
            else:
                out.pop(idx, None)
    return Element._wrap(out)


def jacobi_residual(x: ElementLike, y: ElementLike, z: ElementLike,
                    conv: Convention = BracketConvention.PAPER) -> Element:
    """``[x,[y,z]] + [y,[z,x]] + [z,[x,y]]``."""
    return (bracket(x, bracket(y, z, conv), conv)
            + bracket(y, bracket(z, x, conv), conv)
            + bracket(z, bracket(x, y, conv), conv))


def grading_residual(x: BasisIndex, conv: Convention = BracketConvention.PAPER) -> Element:
    """``[L(0,0), x] + deg(x)·x``; zero under the default convention."""
    return bracket(L(0, 0), x, conv) + Element.basis(x, x.degree)


# windows --------------------------------------------------------------------


class EmptyWindowError(ValueError):
    pass


def _rational_gcd(values: Iterable[Fraction]) -> Fraction:
    vals = [Fraction(v) for v in values]
    den = 1
    for v in vals:
        den = math.lcm(den, v.denominator)
    g = 0
    for v in vals:
        g = math.gcd(g, v.numerator * (den // v.denominator))
    return Fraction(g, den)


@dataclass(frozen=True)
class Window:
    """Finite slice: degrees in the subgroup generated by ``generators`` with
    ``|degree| <= degree_bound``, loops in ``[loop_min, loop_max]``."""

    degree_bound: Fraction = Fraction(3)
    loop_min: int = -2
    loop_max: int = 2
    generators: tuple[Fraction, ...] = (Fraction(1),)

    def __post_init__(self):
        object.__setattr__(self, "degree_bound", Fraction(self.degree_bound))
        gens = tuple(sorted({Fraction(g) for g in self.generators}))
        object.__setattr__(self, "generators", gens)
        if not gens or all(g == 0 for g in gens):
            raise EmptyWindowError("window too small: no nonzero degree generator")

    @property
    def unit(self) -> Fraction:
        """Positive generator of the realized degree subgroup."""
        return _rational_gcd(self.generators)

    @property
    def degrees(self) -> tuple[Fraction, ...]:
        u = self.unit
        n = math.floor(self.degree_bound / u) if self.degree_bound >= 0 else -1
        return tuple(u * k for k in range(-n, n + 1))

    @property
    def loops(self) -> range:
        return range(self.loop_min, self.loop_max + 1)

    def is_empty(self) -> bool:
        return self.degree_bound < 0 or self.loop_min > self.loop_max

    def has_degree(self, d: Fraction) -> bool:
        return abs(d) <= self.degree_bound and (d / self.unit).denominator == 1

    def has_loop(self, i: int) -> bool:
        return self.loop_min <= i <= self.loop_max

    def __contains__(self, b) -> bool:
        return self.has_loop(b.loop) and self.has_degree(b.degree)

    def describe(self) -> dict:
        return {
            "degree_bound": format_rational(self.degree_bound),
            "generators": [format_rational(g) for g in self.generators],
            "loop_min": self.loop_min,
            "loop_max": self.loop_max,
        }


@lru_cache(maxsize=64)
def enumerate_basis(w: Window) -> tuple[BasisIndex, ...]:
    """All window basis vectors in canonical order."""
    if w.is_empty():
        raise EmptyWindowError("window too small: no basis vectors")
    return tuple(BasisIndex(k, d, i) for k in Kind for d in w.degrees for i in w.loops)


# sweeps ---------------------------------------------------------------------


def _basis_jacobi(table: BracketTable, x, y, z):
    """Jacobi residual of three basis vectors as a dict ``{index: coeff}``."""
    out: dict = {}
    for a, b, c in ((x, y, z), (y, z, x), (z, x, y)):
        inner = _cached(table, b, c)
        if inner is None:
            continue
        outer = _cached(table, a, inner[1])
        if outer is None:
            continue
        v = inner[0] * outer[0] + out.get(outer[1], 0)
        out[outer[1]] = v
    return {k: v for k, v in out.items() if v}


def verify_jacobi(w: Window, conv: Convention = BracketConvention.PAPER,
                  budget: int | None = None, seed: int = 0) -> CheckResult:
    """Jacobi identity over all ordered basis triples of ``w``."""
    basis = enumerate_basis(w)
    n = len(basis)
    table = _table_of(conv)
    res = CheckResult("jacobi")
    positions = select_positions(n ** 3, budget, seed)
    if isinstance(positions, range):
        triples = itertools.product(basis, repeat=3)
    else:
        triples = ((basis[p // (n * n)], basis[(p // n) % n], basis[p % n]) for p in positions)
    for x, y, z in triples:
        r = _basis_jacobi(table, x, y, z)
        if r:
            res.record(Element(r), (x, y, z))
        else:
            res.domain_size += 1
    return res


def verify_antisymmetry(w: Window, conv: Convention = BracketConvention.PAPER) -> CheckResult:
    basis = enumerate_basis(w)
    res = CheckResult("antisymmetry")
    for x in basis:
        for y in basis:
            res.record(bracket(x, y, conv) + bracket(y, x, conv), (x, y))
    return res


def verify_grading(w: Window) -> CheckResult:
    res = CheckResult("grading")
    for x in enumerate_basis(w):
        res.record(grading_residual(x), (x,))
    return res
