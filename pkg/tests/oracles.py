"""Independently coded reference computations used to cross-check the package.

Nothing here imports the package's bracket or elimination code: basis vectors
are plain ``(kind, degree, loop)`` tuples with kind ``"L"`` or ``"H"``, and
ranks come from ordinary Fraction Gauss-Jordan elimination.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations


def oracle_bracket(x, y):
    """[x, y] as ``(coefficient, basis)`` or None, straight from the defining table."""
    (kx, a, i), (ky, b, j) = x, y
    if kx == "L" and ky == "L":
        c, k = a - b, "L"
    elif kx == "L" and ky == "H":
        c, k = -b, "H"
    elif kx == "H" and ky == "L":
        c, k = a, "H"
    else:
        return None
    if c == 0:
        return None
    return Fraction(c), (k, a + b, i + j)


def oracle_basis(bound, loop_min, loop_max, unit=Fraction(1)):
    n = int(Fraction(bound) / unit)
    out = []
    for k in ("L", "H"):
        for t in range(-n, n + 1):
            for i in range(loop_min, loop_max + 1):
                out.append((k, t * unit, i))
    return out


def gauss_rank(rows, ncols):
    """Rank of a list of sparse rows ``{col: Fraction}`` by Gauss-Jordan elimination."""
    pivots = {}  # col -> normalized row with 1 at col
    for row in rows:
        r = {c: Fraction(v) for c, v in row.items() if v}
        while r:
            col = min(r)
            p = pivots.get(col)
            if p is None:
                lead = r[col]
                pivots[col] = {c: v / lead for c, v in r.items()}
                break
            f = r[col]
            for c, v in p.items():
                nv = r.get(c, 0) - f * v
                if nv:
                    r[c] = nv
                else:
                    r.pop(c, None)
    return len(pivots)


def oracle_h2(bound, loop_min, loop_max):
    """(dim cocycles, dim coboundaries, dim quotient, pair count, constraint count).

    Cocycles: antisymmetric forms on the window killed by every triple whose
    pairwise brackets stay in the window.  Coboundaries: ψ_f for functionals
    supported on the window.  One unsplit matrix per space.
    """
    basis = oracle_basis(bound, loop_min, loop_max)
    inside = set(basis)
    order = {b: n for n, b in enumerate(sorted(basis))}
    pairs = list(combinations(sorted(basis), 2))
    col = {p: n for n, p in enumerate(pairs)}

    def pair_col(a, b):
        if order[a] < order[b]:
            return col[(a, b)], 1
        return col[(b, a)], -1

    constraints = []
    for x, y, z in combinations(sorted(basis), 3):
        row = {}
        good = True
        for u, v, w in ((x, y, z), (y, z, x), (z, x, y)):
            t = oracle_bracket(v, w)
            if t is None:
                continue
            c, target = t
            if target not in inside:
                good = False
                break
            if target == u:
                continue
            n, s = pair_col(u, target)
            row[n] = row.get(n, 0) + s * c
        if good:
            row = {n: v for n, v in row.items() if v}
            if row:
                constraints.append(row)
    zrank = gauss_rank(constraints, len(pairs))
    cob = []
    for b in basis:
        row = {}
        for n, (x, y) in enumerate(pairs):
            t = oracle_bracket(x, y)
            if t is not None and t[1] == b:
                row[n] = t[0]
        cob.append(row)
    brank = gauss_rank(cob, len(pairs))
    z = len(pairs) - zrank
    return z, brank, z - brank, len(pairs), len(constraints)
