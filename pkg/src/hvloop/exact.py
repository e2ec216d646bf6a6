"""Exact scalars over Q(i) and fraction-free linear algebra.

Everything in the package is computed over the Gaussian rationals.  Real
parts and imaginary parts are :class:`fractions.Fraction` values, so there is
no tolerance anywhere: a residual is zero only when it is structurally zero.

The elimination engine (:class:`SparseEchelon`) works on integer (or
Gaussian-integer) rows.  Rows are scaled to clear denominators on entry, and
each elimination step ``row <- p*row - r*pivot`` is followed by division by
the rational-integer content of the row, which keeps intermediate sizes
bounded without ever introducing fractions.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "GaussianRational",
    "ZERO",
    "ONE",
    "I",
    "as_scalar",
    "parse_scalar",
    "format_rational",
    "validate_epsilon",
    "EpsilonVerdict",
    "Matrix",
    "LinearSolveResult",
    "SparseEchelon",
    "rank_and_solve",
    "scalar_arith",
]

_F0 = Fraction(0)
_F1 = Fraction(1)
_set = object.__setattr__


class GaussianRational:
    """An exact complex number ``re + im*i`` with rational parts.

    Instances are immutable and always canonical (both parts are reduced
    fractions), so ``==`` and ``hash`` are structural.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        _set(self, "re", re if type(re) is Fraction else Fraction(re))
        _set(self, "im", im if type(im) is Fraction else Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    def __reduce__(self):
        return (GaussianRational, (self.re, self.im))

    # construction shortcuts -------------------------------------------------
    @classmethod
    def _make(cls, re: Fraction, im: Fraction) -> "GaussianRational":
        obj = object.__new__(cls)
        _set(obj, "re", re)
        _set(obj, "im", im)
        return obj

    # predicates -------------------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    @property
    def is_real(self) -> bool:
        return not self.im

    def __eq__(self, other) -> bool:
        if type(other) is GaussianRational:
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self) -> int:
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        if type(other) is GaussianRational:
            return GaussianRational._make(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, Fraction)):
            return GaussianRational._make(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is GaussianRational:
            return GaussianRational._make(self.re - other.re, self.im - other.im)
        if isinstance(other, (int, Fraction)):
            return GaussianRational._make(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussianRational._make(other - self.re, -self.im)
        return NotImplemented

    def __neg__(self):
        return GaussianRational._make(-self.re, -self.im)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if type(other) is GaussianRational:
            a, b, c, d = self.re, self.im, other.re, other.im
            if not b and not d:
                return GaussianRational._make(a * c, _F0)
            return GaussianRational._make(a * c - b * d, a * d + b * c)
        if isinstance(other, (int, Fraction)):
            return GaussianRational._make(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._make(self.re, -self.im)

    def norm(self) -> Fraction:
        """Squared modulus ``re**2 + im**2`` (exact)."""
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "GaussianRational":
        if not self:
            raise ZeroDivisionError("inverse of zero Gaussian rational")
        if not self.im:
            return GaussianRational._make(1 / self.re, _F0)
        n = self.norm()
        return GaussianRational._make(self.re / n, -self.im / n)

    def __truediv__(self, other):
        if type(other) is GaussianRational:
            if not other.im:
                if not other.re:
                    raise ZeroDivisionError("division by zero Gaussian rational")
                return GaussianRational._make(self.re / other.re, self.im / other.re)
            return self * other.inverse()
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division by zero Gaussian rational")
            return GaussianRational._make(self.re / other, self.im / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.inverse() * other
        return NotImplemented

    # text form --------------------------------------------------------------
    def __str__(self) -> str:
        if not self.im:
            return format_rational(self.re)
        sign = "-" if self.im < 0 else "+"
        return f"{format_rational(self.re)}{sign}{format_rational(abs(self.im))} i"

    def __repr__(self) -> str:
        return f"GaussianRational('{self}')"


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)


def format_rational(q: Fraction) -> str:
    """``p/q`` text form; the denominator is always written."""
    return f"{q.numerator}/{q.denominator}"


def as_scalar(value) -> GaussianRational:
    """Coerce int, Fraction, text or GaussianRational to GaussianRational."""
    if type(value) is GaussianRational:
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(value)
    if isinstance(value, str):
        return parse_scalar(value)
    raise TypeError(f"cannot interpret {value!r} as an exact scalar")


_RAT = r"[+-]?\d+(?:/\d+)?"
_SCALAR_RE = re.compile(
    rf"^\s*(?P<re>{_RAT})?\s*(?:(?P<sign>[+-])?\s*(?P<im>\d+(?:/\d+)?)?\s*(?P<i>i))?\s*$"
)


def _parse_rational(text: str) -> Fraction:
    if "/" in text:
        num, den = text.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def parse_scalar(text: str) -> GaussianRational:
    """Parse ``"p/q"``, ``"p"``, ``"p/q+r/s i"`` or ``"p/q-r/s i"``.

    >>> parse_scalar("0/1+1/1 i") == I
    True
    >>> str(parse_scalar("-4"))
    '-4/1'
    """
    m = _SCALAR_RE.match(text)
    if m is None or (m.group("re") is None and m.group("i") is None):
        raise ValueError(f"unparsable scalar {text!r}")
    re_part = _parse_rational(m.group("re")) if m.group("re") else _F0
    im_part = _F0
    if m.group("i"):
        if m.group("re") is not None and m.group("sign") is None:
            # "2/3 i" style: a lone coefficient is the imaginary part
            if m.group("im") is not None:
                raise ValueError(f"unparsable scalar {text!r}")
            re_part, im_part = _F0, re_part
        else:
            im_part = _parse_rational(m.group("im")) if m.group("im") else _F1
            if m.group("sign") == "-":
                im_part = -im_part
    return GaussianRational(re_part, im_part)


def scalar_arith(a, b, op: str) -> GaussianRational:
    """Apply ``op`` in ``{'+', '-', '*', '/'}`` (``×``/``÷``/``−`` accepted)."""
    a, b = as_scalar(a), as_scalar(b)
    if op in ("+",):
        return a + b
    if op in ("-", "−"):
        return a - b
    if op in ("*", "×"):
        return a * b
    if op in ("/", "÷"):
        return a / b
    raise ValueError(f"unknown operation {op!r}")


@dataclass(frozen=True)
class EpsilonVerdict:
    valid: bool
    reason: str

    def __bool__(self) -> bool:
        return self.valid


def validate_epsilon(eps) -> EpsilonVerdict:
    """Decide whether ``eps`` is an admissible deformation parameter.

    Admissible means ``Re eps > 0`` with ``1/eps`` not an integer, or
    ``Re eps = 0`` with ``Im eps > 0``.
    """
    eps = as_scalar(eps)
    if eps.re > 0:
        inv = eps.inverse()
        if not inv.im and inv.re.denominator == 1:
            return EpsilonVerdict(False, f"ε^{{-1}}∈ℤ (ε^{{-1}} = {format_rational(inv.re)})")
        return EpsilonVerdict(True, "Re ε>0 and ε^{-1}∉ℤ")
    if eps.re == 0:
        if eps.im > 0:
            return EpsilonVerdict(True, "Re ε=0 and Im ε>0")
        return EpsilonVerdict(False, "Re ε=0 requires Im ε>0")
    return EpsilonVerdict(False, "Re ε<0")


# ---------------------------------------------------------------------------
# fraction-free elimination
# ---------------------------------------------------------------------------


class _GaussInt:
    """Minimal Gaussian integer used inside the elimination engine."""

    __slots__ = ("a", "b")

    def __init__(self, a: int, b: int = 0):
        self.a = a
        self.b = b

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __mul__(self, o):
        if type(o) is int:
            return _GaussInt(self.a * o, self.b * o)
        return _GaussInt(self.a * o.a - self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __sub__(self, o):
        if type(o) is int:
            return _GaussInt(self.a - o, self.b)
        return _GaussInt(self.a - o.a, self.b - o.b)

    def __add__(self, o):
        if type(o) is int:
            return _GaussInt(self.a + o, self.b)
        return _GaussInt(self.a + o.a, self.b + o.b)

    def __neg__(self):
        return _GaussInt(-self.a, -self.b)

    def floordiv_int(self, g: int) -> "_GaussInt":
        return _GaussInt(self.a // g, self.b // g)

    def to_scalar(self) -> GaussianRational:
        return GaussianRational(self.a, self.b)


def _ring_content(values: Iterable) -> int:
    g = 0
    for v in values:
        if type(v) is int:
            g = math.gcd(g, v)
        else:
            g = math.gcd(g, v.a, v.b)
        if g == 1:
            return 1
    return g


def _ring_div(v, g: int):
    return v // g if type(v) is int else v.floordiv_int(g)


def _ring_to_scalar(v) -> GaussianRational:
    return GaussianRational(v) if type(v) is int else v.to_scalar()


def _scale_row(row: dict, complex_ring: bool) -> tuple[dict, GaussianRational]:
    """Clear denominators: returns integer row and the scale ``s`` used."""
    den = 1
    for v in row.values():
        den = math.lcm(den, v.re.denominator, v.im.denominator)
    out = {}
    for j, v in row.items():
        re_i = v.re.numerator * (den // v.re.denominator)
        if complex_ring:
            im_i = v.im.numerator * (den // v.im.denominator)
            out[j] = _GaussInt(re_i, im_i)
        else:
            out[j] = re_i
    return out, GaussianRational(den)


class SparseEchelon:
    """Incremental fraction-free row echelon form over Z or Z[i].

    Rows are sparse ``{column: value}`` mappings of exact scalars.  Each
    accepted row is reduced against existing pivots; if anything survives it
    becomes a new pivot row whose leading column is its smallest column.

    With ``track=True`` every stored row remembers the integer combination of
    input rows (keyed by the ``tag`` passed to :meth:`add`) that produced it.
    """

    def __init__(self, complex_ring: bool = False, track: bool = False):
        self.complex_ring = complex_ring
        self.track = track
        self._pivots: dict[int, tuple[dict, dict | None]] = {}
        self._scales: dict = {}

    @property
    def rank(self) -> int:
        return len(self._pivots)

    @property
    def pivot_columns(self) -> list[int]:
        return sorted(self._pivots)

    def copy(self) -> "SparseEchelon":
        other = SparseEchelon(self.complex_ring, self.track)
        other._pivots = dict(self._pivots)
        other._scales = dict(self._scales)
        return other

    def _prepare(self, row) -> tuple[dict, GaussianRational]:
        clean = {}
        for j, v in row.items():
            v = as_scalar(v)
            if v:
                if v.im and not self.complex_ring:
                    raise ValueError("complex entry in a real elimination")
                clean[j] = v
        return _scale_row(clean, self.complex_ring)

    def _reduce(self, row: dict, comb: dict | None):
        pivots = self._pivots
        while row:
            c = min(row)
            hit = pivots.get(c)
            if hit is None:
                return c, row, comb
            prow, pcomb = hit
            x = row[c]
            y = prow[c]
            new = {j: v * y for j, v in row.items()}
            for j, v in prow.items():
                w = new.get(j)
                w = -(v * x) if w is None else w - v * x
                if w:
                    new[j] = w
                else:
                    new.pop(j, None)
            new.pop(c, None)
            if comb is not None:
                ncomb = {t: v * y for t, v in comb.items()}
                for t, v in pcomb.items():
                    w = ncomb.get(t)
                    w = -(v * x) if w is None else w - v * x
                    if w:
                        ncomb[t] = w
                    else:
                        ncomb.pop(t, None)
                comb = ncomb
            g = _ring_content(list(new.values()) + (list(comb.values()) if comb else []))
            if g > 1:
                new = {j: _ring_div(v, g) for j, v in new.items()}
                if comb is not None:
                    comb = {t: _ring_div(v, g) for t, v in comb.items()}
            row = new
        return None, row, comb

    def add(self, row, tag=None) -> int | None:
        """Insert a row; returns its new pivot column or ``None`` if dependent."""
        irow, scale = self._prepare(row)
        comb = None
        if self.track:
            comb = {tag: 1}
            self._scales[tag] = scale
        col, red, comb = self._reduce(irow, comb)
        if col is None:
            return None
        self._pivots[col] = (red, comb)
        return col

    def is_dependent(self, row) -> bool:
        irow, _ = self._prepare(row)
        return self._reduce(irow, None)[0] is None

    def pivot_row(self, col: int) -> dict:
        return self._pivots[col][0]

    def combination(self, col: int) -> dict[object, GaussianRational]:
        """Rational coefficients ``y`` (by tag) with ``sum y_t * row_t = pivot row``."""
        comb = self._pivots[col][1]
        if comb is None:
            raise ValueError("engine was not created with track=True")
        return {t: _ring_to_scalar(v) * self._scales[t] for t, v in comb.items()}

    def back_substitute(self, ncols: int, rhs_col: int | None, free_values: dict[int, GaussianRational]):
        """Solve the stored echelon system for columns ``< ncols``.

        ``free_values`` fixes non-pivot columns (others default to zero);
        ``rhs_col`` names the augmented right-hand-side column, if any.
        """
        x = [ZERO] * ncols
        for j, v in free_values.items():
            x[j] = v
        for c in sorted((c for c in self._pivots if c < ncols), reverse=True):
            prow = self._pivots[c][0]
            acc = ZERO
            if rhs_col is not None and rhs_col in prow:
                acc = _ring_to_scalar(prow[rhs_col])
            for j, v in prow.items():
                if j != c and j < ncols:
                    acc = acc - _ring_to_scalar(v) * x[j]
            x[c] = acc / _ring_to_scalar(prow[c])
        return x


# ---------------------------------------------------------------------------
# dense matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Matrix:
    """Dense matrix of exact scalars."""

    rows: int
    cols: int
    entries: tuple[tuple[GaussianRational, ...], ...]

    @classmethod
    def from_rows(cls, data: Sequence[Sequence], cols: int | None = None) -> "Matrix":
        rows = tuple(tuple(as_scalar(v) for v in r) for r in data)
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged matrix")
        return cls(len(rows), cols, rows)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def is_complex(self) -> bool:
        return any(v.im for r in self.entries for v in r)

    def apply(self, x: Sequence) -> list[GaussianRational]:
        """``M @ x``."""
        if len(x) != self.cols:
            raise ValueError("dimension mismatch")
        x = [as_scalar(v) for v in x]
        out = []
        for r in self.entries:
            acc = ZERO
            for a, b in zip(r, x):
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        return out

    def apply_left(self, y: Sequence) -> list[GaussianRational]:
        """``y^T @ M``."""
        if len(y) != self.rows:
            raise ValueError("dimension mismatch")
        y = [as_scalar(v) for v in y]
        out = [ZERO] * self.cols
        for yi, r in zip(y, self.entries):
            if not yi:
                continue
            for j, a in enumerate(r):
                if a:
                    out[j] = out[j] + yi * a
        return out

    def rank(self) -> int:
        eng = SparseEchelon(self.is_complex())
        for r in self.entries:
            eng.add({j: v for j, v in enumerate(r) if v})
        return eng.rank


@dataclass(frozen=True)
class LinearSolveResult:
    status: str  # "unique" | "underdetermined" | "infeasible"
    rank: int
    solution: tuple[GaussianRational, ...] | None = None
    kernel_basis: tuple[tuple[GaussianRational, ...], ...] = ()
    infeasibility_witness: tuple[GaussianRational, ...] | None = None
    residual: GaussianRational | None = field(default=None, compare=False)


def rank_and_solve(M: Matrix, b: Sequence) -> LinearSolveResult:
    """Solve ``M x = b`` exactly.

    Returns a particular solution (free variables set to zero) and a kernel
    basis, or, if the system is inconsistent, a witness ``y`` with
    ``y^T M = 0`` and ``y^T b != 0``.  Both are re-verified before return.
    """
    if len(b) != M.rows:
        raise ValueError(f"dimension mismatch: b has {len(b)} entries, M has {M.rows} rows")
    b = [as_scalar(v) for v in b]
    complex_ring = M.is_complex() or any(v.im for v in b)
    n = M.cols
    eng = SparseEchelon(complex_ring, track=True)
    for i, (r, bi) in enumerate(zip(M.entries, b)):
        row = {j: v for j, v in enumerate(r) if v}
        if bi:
            row[n] = bi
        eng.add(row, tag=i)

    if n in eng._pivots:
        comb = eng.combination(n)
        y = [comb.get(i, ZERO) for i in range(M.rows)]
        lead = next(v for v in y if v)
        if lead.re < 0 or (not lead.re and lead.im < 0):
            y = [-v for v in y]
        yM = M.apply_left(y)
        yb = sum((yi * bi for yi, bi in zip(y, b)), ZERO)
        if any(yM) or not yb:
            raise AssertionError("infeasibility witness failed to verify")
        rank = eng.rank - 1
        return LinearSolveResult("infeasible", rank, infeasibility_witness=tuple(y), residual=yb)

    pivots = set(c for c in eng._pivots if c < n)
    free = [j for j in range(n) if j not in pivots]
    sol = eng.back_substitute(n, n, {})
    kernel = []
    for f in free:
        k = eng.back_substitute(n, None, {f: ONE})
        kernel.append(tuple(k))
    if M.apply(sol) != b:
        raise AssertionError("solution failed to verify")
    for k in kernel:
        if any(M.apply(k)):
            raise AssertionError("kernel vector failed to verify")
    status = "unique" if not free else "underdetermined"
    return LinearSolveResult(status, len(pivots), tuple(sol), tuple(kernel))
