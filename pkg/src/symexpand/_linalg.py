"""Exact dense linear algebra over Q and Q(sqrt d).

Rational matrices go through fraction-free (Bareiss) elimination on integers;
anything else falls back to ordinary Gauss-Jordan with the scalars' own
arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm


def _is_rational(x) -> bool:
    return isinstance(x, (int, Fraction))


def _all_rational(rows) -> bool:
    return all(_is_rational(x) for row in rows for x in row)


def integer_rows(rows):
    """Scale each row of a rational matrix to integers (row scaling keeps rank)."""
    out = []
    for row in rows:
        den = 1
        for x in row:
            if isinstance(x, Fraction) and x.denominator != 1:
                den = lcm(den, x.denominator)
        out.append([int(x * den) for x in row])
    return out


def bareiss_rank(int_rows) -> int:
    """Rank of an integer matrix by fraction-free elimination."""
    m = [list(r) for r in int_rows if any(r)]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        piv = None
        for i in range(rank, len(m)):
            if m[i][col]:
                piv = i
                break
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pr = m[rank]
        pv = pr[col]
        for i in range(rank + 1, len(m)):
            row = m[i]
            f = row[col]
            if f:
                for j in range(col + 1, ncols):
                    row[j] = (pv * row[j] - f * pr[j]) // prev
            else:
                for j in range(col + 1, ncols):
                    row[j] = (pv * row[j]) // prev
            row[col] = 0
        prev = pv
        rank += 1
        if rank == len(m):
            break
    return rank


def _reduce_gcd(row):
    g = 0
    for x in row:
        if x:
            g = gcd(g, x)
            if g == 1:
                return row
    if g > 1:
        return [x // g for x in row]
    return row


def rank(rows) -> int:
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    if _all_rational(rows):
        return bareiss_rank(integer_rows(rows))
    return len(rref(rows)[1])


def rref(rows):
    """Reduced row echelon form; returns (rows, pivot_columns)."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    if _all_rational(m):
        m = [[Fraction(x) for x in r] for r in m]
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c] if _is_rational(m[r][c]) else m[r][c].inverse()
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows, ncols=None):
    """Basis of {x : rows @ x = 0}."""
    if not rows:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    ncols = len(rows[0])
    red, piv = rref(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, pc in enumerate(piv):
            v[pc] = -red[i][f]
        basis.append(v)
    return basis


def independent_subset(vectors):
    """Indices of a maximal independent prefix-greedy subset of vectors."""
    if not vectors:
        return []
    cols = list(map(list, zip(*vectors)))
    _, piv = rref(cols)
    return piv


def solve(a_rows, b):
    """One exact solution x of A x = b (free variables set to zero).

    Raises ValueError if the system is inconsistent.
    """
    ncols = len(a_rows[0])
    aug = [list(r) + [bi] for r, bi in zip(a_rows, b)]
    if _all_rational(aug):
        return _solve_rational(aug, ncols)
    red, piv = rref(aug)
    if ncols in piv:
        raise ValueError("inconsistent system")
    x = [Fraction(0)] * ncols
    for i, pc in enumerate(piv):
        x[pc] = red[i][ncols]
    return x


def _solve_rational(aug, ncols):
    """Fraction-free forward elimination, then exact back substitution."""
    m = [_reduce_gcd(r) for r in integer_rows(aug)]
    m = [r for r in m if any(r)]
    nrows = len(m)
    pivots = []
    r = 0
    for c in range(ncols + 1):
        piv = None
        best = None
        for i in range(r, nrows):
            v = m[i][c]
            if v and (best is None or abs(v) < best):
                piv, best = i, abs(v)
                if best == 1:
                    break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pr = m[r]
        pv = pr[c]
        for i in range(r + 1, nrows):
            row = m[i]
            f = row[c]
            if f:
                g = gcd(pv, f)
                a, b = pv // g, f // g
                m[i] = _reduce_gcd([a * x - b * y for x, y in zip(row, pr)])
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    if ncols in pivots:
        raise ValueError("inconsistent system")
    x = [Fraction(0)] * ncols
    for i in range(len(pivots) - 1, -1, -1):
        c = pivots[i]
        row = m[i]
        acc = Fraction(row[ncols])
        for j in range(c + 1, ncols):
            if row[j] and x[j]:
                acc -= row[j] * x[j]
        x[c] = acc / row[c]
    return x


def same_span(a, b) -> bool:
    """True when the row spaces of a and b coincide."""
    ra, rb = rank(a), rank(b)
    return ra == rb and rank(list(a) + list(b)) == ra
