"""Polynomials in the entries of rotation matrices and their exact Haar integrals.

A rotation variable ``p`` is a 3x3 matrix whose column ``j`` is the body axis
``m_j``. Monomials store, per variable, nine exponents in row-major order
``(p11, p12, p13, p21, ..., p33)``.

The Haar integral substitutes the Euler parametrisation
``p = J(beta) E(alpha) J(gamma)`` with ``E`` a rotation about the first axis
pair and ``J`` a rotation fixing the first axis, expands into trigonometric
monomials and integrates each factor with the closed-form moments from
:mod:`symexpand.exactscalar`. Results are memoised per monomial after reducing
it by the signed-permutation and transpose symmetries of the measure.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exactscalar import PiLinear, QuadScalar, alpha_moment, circle_moment

DEFAULT_DEGREE_CAP = 16
_degree_cap = DEFAULT_DEGREE_CAP


class DegreeCapError(ValueError):
    """A polynomial exceeded the per-variable degree cap."""


def set_degree_cap(cap: int) -> int:
    """Change the per-variable degree cap; returns the previous value."""
    global _degree_cap
    old = _degree_cap
    _degree_cap = int(cap)
    return old


def degree_cap() -> int:
    return _degree_cap


def _var_key(v):
    return (isinstance(v, str), v)


ZERO9 = (0,) * 9


def entry_index(i: int, j: int) -> int:
    """Position of p_ij (0-based i, j) in the exponent vector."""
    return 3 * i + j


def _is_zero_scalar(c) -> bool:
    return c == 0


class OrientPoly:
    """Sparse polynomial in rotation-matrix entries of one or more variables.

    ``terms`` maps a monomial (a sorted tuple of ``(var, exps9)`` pairs) to a
    nonzero exact coefficient. Instances are treated as immutable.
    """

    __slots__ = ("terms", "_degs")

    def __init__(self, terms=None):
        self.terms = {} if terms is None else terms
        self._degs = None

    # -- constructors ---------------------------------------------------
    @classmethod
    def const(cls, c) -> "OrientPoly":
        if isinstance(c, int):
            c = Fraction(c)
        return cls({(): c} if c != 0 else {})

    @classmethod
    def entry(cls, var, i: int, j: int) -> "OrientPoly":
        e = [0] * 9
        e[entry_index(i, j)] = 1
        return cls({((var, tuple(e)),): Fraction(1)})

    @classmethod
    def entries(cls, var):
        return [[cls.entry(var, i, j) for j in range(3)] for i in range(3)]

    # -- inspection -----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == () for m in self.terms)

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self.terms.get((), Fraction(0))

    def variables(self):
        vs = set()
        for m in self.terms:
            for v, _ in m:
                vs.add(v)
        return sorted(vs, key=_var_key)

    def degrees(self) -> dict:
        """Maximum total degree per variable."""
        if self._degs is None:
            d = {}
            for m in self.terms:
                for v, e in m:
                    s = sum(e)
                    if s > d.get(v, 0):
                        d[v] = s
            self._degs = d
        return self._degs

    def degree(self, var) -> int:
        return self.degrees().get(var, 0)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"OrientPoly({len(self.terms)} terms)"

    # -- arithmetic -----------------------------------------------------
    @staticmethod
    def _wrap(x):
        if isinstance(x, OrientPoly):
            return x
        return OrientPoly.const(x)

    def __add__(self, other):
        if not isinstance(other, OrientPoly):
            if other == 0:
                return self
            other = OrientPoly.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v == 0:
                    del out[m]
                else:
                    out[m] = v
        return OrientPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return OrientPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "OrientPoly":
        if c == 0:
            return OrientPoly()
        if c == 1:
            return self
        return OrientPoly({m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, OrientPoly):
            if isinstance(other, (int, Fraction, QuadScalar)):
                return self.scale(other)
            return NotImplemented
        if not self.terms or not other.terms:
            return OrientPoly()
        da, db = self.degrees(), other.degrees()
        cap = _degree_cap
        for v in set(da) | set(db):
            if da.get(v, 0) + db.get(v, 0) > cap:
                raise DegreeCapError(
                    f"degree {da.get(v, 0) + db.get(v, 0)} in variable {v!r} exceeds cap {cap}"
                )
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                c = c1 * c2
                v = out.get(m)
                if v is None:
                    out[m] = c
                else:
                    out[m] = v + c
        return OrientPoly({m: c for m, c in out.items() if c != 0})

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, QuadScalar)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, c):
        if isinstance(c, OrientPoly):
            return NotImplemented
        return self.scale(1 / Fraction(c) if isinstance(c, int) else 1 / c)

    def __pow__(self, e: int):
        out = OrientPoly.const(1)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, OrientPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction, QuadScalar)):
            if other == 0:
                return not self.terms
            return self.terms == {(): other}
        return NotImplemented

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    __hash__ = None

    def __bool__(self):
        return bool(self.terms)

    def map_coefficients(self, fn) -> "OrientPoly":
        out = {}
        for m, c in self.terms.items():
            v = fn(c)
            if v != 0:
                out[m] = v
        return OrientPoly(out)

    def rename(self, mapping: dict) -> "OrientPoly":
        """Rename variables; merging two variables into one is allowed."""
        out = {}
        for m, c in self.terms.items():
            parts = {}
            for v, e in m:
                nv = mapping.get(v, v)
                if nv in parts:
                    parts[nv] = tuple(a + b for a, b in zip(parts[nv], e))
                else:
                    parts[nv] = e
            key = tuple(sorted(parts.items(), key=lambda t: _var_key(t[0])))
            out[key] = out.get(key, 0) + c
        return OrientPoly({m: c for m, c in out.items() if c != 0})


def _mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    if len(m1) == 1 and len(m2) == 1 and m1[0][0] == m2[0][0]:
        v, a = m1[0]
        b = m2[0][1]
        return ((v, tuple(x + y for x, y in zip(a, b))),)
    parts = dict(m1)
    for v, e in m2:
        if v in parts:
            parts[v] = tuple(x + y for x, y in zip(parts[v], e))
        else:
            parts[v] = e
    return tuple(sorted(parts.items(), key=lambda t: _var_key(t[0])))


# ---------------------------------------------------------------------------
# Rotation matrices


class RotMatrix:
    """A 3x3 orthogonal matrix, exact or floating point."""

    __slots__ = ("rows", "exact")

    def __init__(self, rows, exact: bool | None = None, check: bool = True):
        if isinstance(rows, np.ndarray) and rows.dtype != object:
            rows = rows.tolist()
        rows = tuple(tuple(_norm_entry(x) for x in r) for r in rows)
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError("RotMatrix needs 3x3 entries")
        if exact is None:
            exact = all(not isinstance(x, float) for r in rows for x in r)
        self.rows = rows
        self.exact = exact
        if check and not self.is_orthogonal():
            raise ValueError("matrix is not orthogonal")

    @classmethod
    def identity(cls) -> "RotMatrix":
        return cls(((1, 0, 0), (0, 1, 0), (0, 0, 1)))

    @classmethod
    def from_numpy(cls, a) -> "RotMatrix":
        return cls(np.asarray(a, dtype=float), exact=False)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j):
        return tuple(self.rows[i][j] for i in range(3))

    def __matmul__(self, other: "RotMatrix") -> "RotMatrix":
        rows = [
            [sum((self.rows[i][k] * other.rows[k][j] for k in range(3)), Fraction(0)) for j in range(3)]
            for i in range(3)
        ]
        return RotMatrix(rows, exact=self.exact and other.exact, check=False)

    @property
    def T(self) -> "RotMatrix":
        return RotMatrix([[self.rows[j][i] for j in range(3)] for i in range(3)], self.exact, check=False)

    def det(self):
        r = self.rows
        return (
            r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
        )

    def is_orthogonal(self) -> bool:
        prod = (self @ self.T).rows
        for i in range(3):
            for j in range(3):
                target = 1 if i == j else 0
                if self.exact:
                    if prod[i][j] != target:
                        return False
                elif abs(float(prod[i][j]) - target) > 1e-12:
                    return False
        return True

    @property
    def proper(self) -> bool:
        d = self.det()
        return (float(d) > 0) if not self.exact else d == 1

    def __neg__(self):
        return RotMatrix([[-x for x in r] for r in self.rows], self.exact, check=False)

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.rows])

    def __eq__(self, other):
        if not isinstance(other, RotMatrix):
            return NotImplemented
        if self.exact and other.exact:
            return self.rows == other.rows
        return bool(np.allclose(self.to_numpy(), other.to_numpy(), atol=1e-12))

    def __hash__(self):
        if self.exact:
            return hash(self.rows)
        return hash(tuple(np.round(self.to_numpy(), 9).ravel().tolist()))

    def __repr__(self):
        return f"RotMatrix({[list(map(str, r)) for r in self.rows]})"


def _norm_entry(x):
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, QuadScalar):
        return x.simplify()
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


# ---------------------------------------------------------------------------
# Substitution and evaluation


def right_substitute(f: OrientPoly, var, s: RotMatrix) -> OrientPoly:
    """Return the polynomial g with g(p) = f(p s) in variable ``var``."""
    if not s.exact:
        raise ValueError("right_substitute needs an exact matrix")
    if not s.is_orthogonal():
        raise ValueError("right_substitute needs an orthogonal matrix")
    # (p s)_ij = sum_k p_ik s_kj
    lin = [
        [
            sum((OrientPoly.entry(var, i, k).scale(s.rows[k][j]) for k in range(3) if s.rows[k][j] != 0), OrientPoly())
            for j in range(3)
        ]
        for i in range(3)
    ]
    return _substitute_linear(f, var, lin)


def left_substitute(f: OrientPoly, var, s: RotMatrix) -> OrientPoly:
    """Return g with g(p) = f(s p)."""
    if not s.exact:
        raise ValueError("left_substitute needs an exact matrix")
    lin = [
        [
            sum((OrientPoly.entry(var, k, j).scale(s.rows[i][k]) for k in range(3) if s.rows[i][k] != 0), OrientPoly())
            for j in range(3)
        ]
        for i in range(3)
    ]
    return _substitute_linear(f, var, lin)


def _substitute_linear(f: OrientPoly, var, lin) -> OrientPoly:
    flat = [lin[i][j] for i in range(3) for j in range(3)]
    power_cache = {}

    def power(idx, e):
        key = (idx, e)
        if key not in power_cache:
            power_cache[key] = flat[idx] ** e
        return power_cache[key]

    out = OrientPoly()
    acc = {}
    for m, c in f.terms.items():
        rest = []
        exps = None
        for v, e in m:
            if v == var:
                exps = e
            else:
                rest.append((v, e))
        if exps is None:
            acc[m] = acc.get(m, 0) + c
            continue
        term = OrientPoly({tuple(rest): c})
        for idx, e in enumerate(exps):
            if e:
                term = term * power(idx, e)
        out = out + term
    return out + OrientPoly({m: c for m, c in acc.items() if c != 0})


def substitute_constant(f: OrientPoly, var, s: RotMatrix) -> OrientPoly:
    """Replace variable ``var`` by the exact matrix ``s``."""
    flat = [s.rows[i][j] for i in range(3) for j in range(3)]
    out = {}
    for m, c in f.terms.items():
        rest = []
        val = c
        for v, e in m:
            if v == var:
                for idx, k in enumerate(e):
                    if k:
                        val = val * flat[idx] ** k
            else:
                rest.append((v, e))
        if val != 0:
            key = tuple(rest)
            out[key] = out.get(key, 0) + val
    return OrientPoly({m: c for m, c in out.items() if c != 0})


def eval_numeric(f: OrientPoly, assignment: dict) -> float:
    """Evaluate in floating point; every variable of ``f`` must be assigned."""
    mats = {}
    for v in f.variables():
        if v not in assignment:
            raise KeyError(f"variable {v!r} is not assigned")
        a = assignment[v]
        mats[v] = (a.to_numpy() if isinstance(a, RotMatrix) else np.asarray(a, dtype=float)).ravel()
    total = 0.0
    for m, c in f.terms.items():
        val = float(c)
        for v, e in m:
            flat = mats[v]
            for idx, k in enumerate(e):
                if k:
                    val *= flat[idx] ** k
        total += val
    return total


def eval_numeric_batch(f: OrientPoly, assignment: dict) -> np.ndarray:
    """Vectorised evaluation; each assignment value has shape (N, 3, 3)."""
    mats = {}
    n = None
    for v in f.variables():
        if v not in assignment:
            raise KeyError(f"variable {v!r} is not assigned")
        a = np.asarray(assignment[v], dtype=float).reshape(-1, 9)
        mats[v] = a
        n = a.shape[0]
    if n is None:
        n = next((np.asarray(a).reshape(-1, 9).shape[0] for a in assignment.values()), 1)
    total = np.zeros(n)
    for m, c in f.terms.items():
        val = np.full(n, float(c))
        for v, e in m:
            flat = mats[v]
            for idx, k in enumerate(e):
                if k:
                    val = val * flat[:, idx] ** k
        total += val
    return total


# ---------------------------------------------------------------------------
# Haar integration

# Euler-parametrised entries as sparse trig polynomials over
# (cos a, sin a, cos b, sin b, cos g, sin g).
_EULER_ENTRIES = (
    {(1, 0, 0, 0, 0, 0): 1},
    {(0, 1, 0, 0, 1, 0): -1},
    {(0, 1, 0, 0, 0, 1): 1},
    {(0, 1, 1, 0, 0, 0): 1},
    {(1, 0, 1, 0, 1, 0): 1, (0, 0, 0, 1, 0, 1): -1},
    {(1, 0, 1, 0, 0, 1): -1, (0, 0, 0, 1, 1, 0): -1},
    {(0, 1, 0, 1, 0, 0): 1},
    {(1, 0, 0, 1, 1, 0): 1, (0, 0, 1, 0, 0, 1): 1},
    {(1, 0, 0, 1, 0, 1): -1, (0, 0, 1, 0, 1, 0): 1},
)


def euler_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Numeric rotation in the parametrisation used by the exact integrator."""
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    cg, sg = np.cos(gamma), np.sin(gamma)
    return np.array(
        [
            [ca, -sa * cg, sa * sg],
            [sa * cb, ca * cb * cg - sb * sg, -ca * cb * sg - sb * cg],
            [sa * sb, ca * sb * cg + cb * sg, -ca * sb * sg + cb * cg],
        ]
    )


def _trig_mul(a: dict, b: dict) -> dict:
    out = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = (ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2], ka[3] + kb[3], ka[4] + kb[4], ka[5] + kb[5])
            out[k] = out.get(k, 0) + va * vb
    return {k: v for k, v in out.items() if v}


@lru_cache(maxsize=None)
def _entry_power(idx: int, e: int):
    if e == 0:
        return ((((0,) * 6), 1),)
    if e == 1:
        return tuple(_EULER_ENTRIES[idx].items())
    half = dict(_entry_power(idx, e // 2))
    sq = _trig_mul(half, half)
    if e % 2:
        sq = _trig_mul(sq, _EULER_ENTRIES[idx])
    return tuple(sq.items())


def _trig_integral(k) -> PiLinear:
    """Haar-normalised integral of one trig monomial (sin a from the measure)."""
    rb = circle_moment(k[2], k[3])
    if rb == 0:
        return PiLinear(0, 0)
    rg = circle_moment(k[4], k[5])
    if rg == 0:
        return PiLinear(0, 0)
    # (1/(8 pi^2)) * alpha_moment * (rb pi) * (rg pi)
    return alpha_moment(k[0], k[1] + 1) * (rb * rg / 8)


def _euler_monomial_integral(exps) -> Fraction:
    poly = {(0,) * 6: 1}
    for idx, e in enumerate(exps):
        if e:
            poly = _trig_mul(poly, dict(_entry_power(idx, e)))
            if not poly:
                return Fraction(0)
    total = PiLinear(0, 0)
    for k, c in poly.items():
        if k[0] % 2 == 0 and k[2] % 2 == 0 and k[3] % 2 == 0 and k[4] % 2 == 0 and k[5] % 2 == 0:
            total = total + _trig_integral(k) * c
    return total.rational_value()


_PERMS = list(itertools.permutations(range(3)))


def _perm_sign(p) -> int:
    inv = sum(1 for i in range(3) for j in range(i + 1, 3) if p[i] > p[j])
    return -1 if inv % 2 else 1


_PERM_SIGNS = [_perm_sign(p) for p in _PERMS]


def _canonical(exps):
    """Smallest equivalent exponent matrix under row/column permutation and
    transposition, with the sign picked up along the way."""
    m = [exps[0:3], exps[3:6], exps[6:9]]
    rows_odd = sum(m[0]) % 2 == 1
    cols_odd = (m[0][0] + m[1][0] + m[2][0]) % 2 == 1
    best = None
    best_sign = 1
    for t in (False, True):
        mm = m if not t else [[m[j][i] for j in range(3)] for i in range(3)]
        r_odd, c_odd = (rows_odd, cols_odd) if not t else (cols_odd, rows_odd)
        for rp, rs in zip(_PERMS, _PERM_SIGNS):
            for cp, cs in zip(_PERMS, _PERM_SIGNS):
                key = tuple(mm[rp[i]][cp[j]] for i in range(3) for j in range(3))
                if best is None or key < best:
                    best = key
                    best_sign = (rs if r_odd else 1) * (cs if c_odd else 1)
    return best, best_sign


@lru_cache(maxsize=None)
def _canonical_integral(exps) -> Fraction:
    return _euler_monomial_integral(exps)


_MONO_CACHE: dict = {}


def monomial_haar(exps) -> Fraction:
    """Exact Haar integral of a single monomial in the entries of one rotation."""
    v = _MONO_CACHE.get(exps)
    if v is not None:
        return v
    r = (exps[0] + exps[1] + exps[2], exps[3] + exps[4] + exps[5], exps[6] + exps[7] + exps[8])
    c = (exps[0] + exps[3] + exps[6], exps[1] + exps[4] + exps[7], exps[2] + exps[5] + exps[8])
    if not (r[0] % 2 == r[1] % 2 == r[2] % 2 and c[0] % 2 == c[1] % 2 == c[2] % 2):
        v = Fraction(0)
    else:
        key, sign = _canonical(exps)
        v = _canonical_integral(key)
        if sign < 0:
            v = -v
    _MONO_CACHE[exps] = v
    return v


def monomial_haar_uncached(exps) -> Fraction:
    """Same integral without symmetry reduction or caching (test oracle)."""
    return _euler_monomial_integral(tuple(exps))


def haar_integral(f: OrientPoly, var) -> OrientPoly:
    """Integrate ``var`` out of ``f`` against the normalised Haar measure."""
    if f.degree(var) > _degree_cap:
        raise DegreeCapError(f"degree {f.degree(var)} in {var!r} exceeds cap {_degree_cap}")
    out = {}
    for m, c in f.terms.items():
        exps = ZERO9
        rest = []
        for v, e in m:
            if v == var:
                exps = e
            else:
                rest.append((v, e))
        w = monomial_haar(exps) if exps is not ZERO9 else Fraction(1)
        if w == 0:
            continue
        key = tuple(rest)
        out[key] = out.get(key, 0) + c * w
    return OrientPoly({m: c for m, c in out.items() if c != 0})


def haar_integral_all(f: OrientPoly):
    """Integrate every variable; returns an exact scalar."""
    g = f
    for v in f.variables():
        g = haar_integral(g, v)
    return g.terms.get((), Fraction(0))
