"""Symmetric and symmetric traceless tensors in three dimensions.

A symmetric order-k tensor U is stored through its generating polynomial
``P(x) = U_{i1..ik} x_i1 ... x_ik = sum_kappa c_kappa x^kappa``. The
coefficient ``c_kappa`` is the weight of the monomial ``m1^k1 m2^k2 m3^k3``;
the tensor component at any index tuple of type kappa is
``c_kappa / multinomial(kappa)``. In this picture the symmetrised tensor
product is polynomial multiplication, the identity tensor is ``|x|^2`` and the
trace is a scaled Laplacian.

Coefficients can be any exact scalar, or :class:`~symexpand.so3poly.OrientPoly`
for tensors that depend on a rotation.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from . import _linalg
from .so3poly import OrientPoly, RotMatrix

MAX_BASIS_ORDER = 8


@lru_cache(maxsize=None)
def sym_indices(k: int):
    """Exponent triples of total degree k in graded-lex (descending) order."""
    out = []
    for a in range(k, -1, -1):
        for b in range(k - a, -1, -1):
            out.append((a, b, k - a - b))
    return tuple(out)


@lru_cache(maxsize=None)
def sym_position(k: int):
    return {kap: i for i, kap in enumerate(sym_indices(k))}


@lru_cache(maxsize=None)
def multinomial(kappa) -> int:
    return factorial(sum(kappa)) // (factorial(kappa[0]) * factorial(kappa[1]) * factorial(kappa[2]))


def index_type(idx) -> tuple:
    """Exponent triple of an index tuple, e.g. (0, 0, 2) -> (2, 0, 1)."""
    c = [0, 0, 0]
    for i in idx:
        c[i] += 1
    return tuple(c)


def _nz(c) -> bool:
    return not (c == 0)


def _add3(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


class SymTensor:
    """Symmetric tensor of order ``order`` held by monomial coefficients."""

    __slots__ = ("order", "coeffs", "_hash", "_traceless")

    def __init__(self, order: int, coeffs=None):
        self.order = int(order)
        out = {}
        if coeffs:
            for kap, c in coeffs.items():
                if sum(kap) != self.order:
                    raise ValueError(f"exponent {kap} does not have degree {order}")
                if isinstance(c, int):
                    c = Fraction(c)
                if _nz(c):
                    out[tuple(kap)] = c
        self.coeffs = out
        self._hash = None
        self._traceless = None

    # -- constructors ---------------------------------------------------
    @classmethod
    def scalar(cls, c) -> "SymTensor":
        return cls(0, {(0, 0, 0): c})

    @classmethod
    def zero(cls, k: int) -> "SymTensor":
        return cls(k, {})

    @classmethod
    def from_components(cls, k: int, comps) -> "SymTensor":
        """Build from components listed in :func:`sym_indices` order."""
        return cls(k, {kap: c * multinomial(kap) for kap, c in zip(sym_indices(k), comps)})

    # -- inspection -----------------------------------------------------
    def coeff(self, kappa):
        return self.coeffs.get(tuple(kappa), Fraction(0))

    def component(self, idx):
        kap = index_type(idx)
        if sum(kap) != self.order:
            raise ValueError("index tuple has the wrong length")
        c = self.coeffs.get(kap)
        if c is None:
            return Fraction(0)
        return c * Fraction(1, multinomial(kap))

    def components(self):
        """Components in :func:`sym_indices` order."""
        return [self.component_of_type(kap) for kap in sym_indices(self.order)]

    def component_of_type(self, kap):
        c = self.coeffs.get(kap)
        if c is None:
            return Fraction(0)
        return c * Fraction(1, multinomial(kap))

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def traceless(self) -> bool:
        if self._traceless is None:
            self._traceless = self.order < 2 or trace(self).is_zero()
        return self._traceless

    def __repr__(self):
        return f"SymTensor({self.order}, {format_tensor(self)!r})"

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, SymTensor):
            if other == 0:
                return self
            return NotImplemented
        if other.order != self.order:
            raise ValueError(f"cannot add orders {self.order} and {other.order}")
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return SymTensor(self.order, out)

    def __radd__(self, other):
        if not isinstance(other, SymTensor) and other == 0:
            return self
        return NotImplemented

    def __neg__(self):
        return SymTensor(self.order, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SymTensor":
        return SymTensor(self.order, {k: v * c for k, v in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, SymTensor):
            return sym_product(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        if isinstance(other, SymTensor):
            return sym_product(other, self)
        return SymTensor(self.order, {k: other * v for k, v in self.coeffs.items()})

    def __truediv__(self, c):
        if isinstance(c, int):
            c = Fraction(c)
        return self.scale(1 / c)

    def __pow__(self, e: int):
        out = SymTensor.scalar(Fraction(1))
        for _ in range(e):
            out = sym_product(out, self)
        return out

    def __eq__(self, other):
        if isinstance(other, SymTensor):
            if self.order != other.order or self.coeffs.keys() != other.coeffs.keys():
                return False
            return all(self.coeffs[k] == other.coeffs[k] for k in self.coeffs)
        if not isinstance(other, SymTensor) and other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.order, frozenset(self.coeffs.items())))
        return self._hash

    def map_coefficients(self, fn) -> "SymTensor":
        return SymTensor(self.order, {k: fn(c) for k, c in self.coeffs.items()})

    def derivative(self, alpha) -> "SymTensor":
        """Partial derivative d^alpha of the generating polynomial."""
        a = tuple(alpha)
        out = {}
        for kap, c in self.coeffs.items():
            if kap[0] < a[0] or kap[1] < a[1] or kap[2] < a[2]:
                continue
            f = 1
            for i in range(3):
                for t in range(a[i]):
                    f *= kap[i] - t
            out[(kap[0] - a[0], kap[1] - a[1], kap[2] - a[2])] = c * f
        return SymTensor(self.order - sum(a), out)


def sym_product(u: SymTensor, v: SymTensor) -> SymTensor:
    """Symmetrised tensor product (product of generating polynomials)."""
    out = {}
    for ka, ca in u.coeffs.items():
        for kb, cb in v.coeffs.items():
            k = _add3(ka, kb)
            p = ca * cb
            if k in out:
                out[k] = out[k] + p
            else:
                out[k] = p
    return SymTensor(u.order + v.order, out)


def unit(i: int) -> SymTensor:
    """The body axis m_{i+1} as an order-1 tensor (0-based i)."""
    e = [0, 0, 0]
    e[i] = 1
    return SymTensor(1, {tuple(e): 1})


def monomial(kappa) -> SymTensor:
    """m1^k1 m2^k2 m3^k3."""
    return SymTensor(sum(kappa), {tuple(kappa): 1})


def identity() -> SymTensor:
    """The identity tensor, m1^2 + m2^2 + m3^2."""
    return SymTensor(2, {(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1})


def identity_power(q: int) -> SymTensor:
    return identity() ** q


def dot(u: SymTensor, v: SymTensor):
    """Full contraction of two tensors of equal order."""
    if u.order != v.order:
        raise ValueError("dot needs equal orders")
    acc = Fraction(0)
    a, b = (u, v) if len(u.coeffs) <= len(v.coeffs) else (v, u)
    for kap, c in a.coeffs.items():
        d = b.coeffs.get(kap)
        if d is not None:
            acc = acc + c * d * Fraction(1, multinomial(kap))
    return acc


def norm2(u: SymTensor):
    return dot(u, u)


def trace(u: SymTensor) -> SymTensor:
    """Contraction over one index pair."""
    k = u.order
    if k < 2:
        raise ValueError("trace needs order >= 2")
    out = {}
    scale = Fraction(1, k * (k - 1))
    for kap, c in u.coeffs.items():
        for i in range(3):
            if kap[i] >= 2:
                nk = list(kap)
                nk[i] -= 2
                nk = tuple(nk)
                val = c * (kap[i] * (kap[i] - 1))
                out[nk] = out[nk] + val if nk in out else val
    return SymTensor(k - 2, {kk: c * scale for kk, c in out.items()})


# ---------------------------------------------------------------------------
# Dense representation


def to_dense(u: SymTensor) -> np.ndarray:
    k = u.order
    arr = np.empty((3,) * k, dtype=object)
    if k == 0:
        arr[()] = u.coeff((0, 0, 0))
        return arr
    comps = {kap: u.component_of_type(kap) for kap in sym_indices(k)}
    for idx in itertools.product(range(3), repeat=k):
        arr[idx] = comps[index_type(idx)]
    return arr


def symmetrize(x) -> SymTensor:
    """Average a dense tensor over all index permutations."""
    x = np.asarray(x, dtype=object)
    k = x.ndim
    if k == 0:
        return SymTensor.scalar(x[()])
    out = {}
    for idx in itertools.product(range(3), repeat=k):
        val = x[idx]
        if val == 0:
            continue
        kap = index_type(idx)
        out[kap] = out[kap] + val if kap in out else val
    return SymTensor(k, out)


def is_symmetric_dense(x) -> bool:
    x = np.asarray(x, dtype=object)
    k = x.ndim
    for perm in itertools.permutations(range(k)):
        if not np.all(np.transpose(x, perm) == x):
            return False
    return True


# ---------------------------------------------------------------------------
# Traceless projection and bases


@lru_cache(maxsize=None)
def _trace_correction_operator(k: int):
    """Matrix solving tr(i V) = t for V, both in sym_indices(k-2) coordinates."""
    idx = sym_indices(k - 2)
    cols = []
    ident = identity()
    for kap in idx:
        img = trace(sym_product(ident, monomial(kap)))
        cols.append([img.coeff(m) for m in idx])
    mat = [list(r) for r in zip(*cols)]  # rows: output coords, cols: V coords
    n = len(idx)
    aug = [row + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    red, piv = _linalg.rref(aug)
    if piv[:n] != list(range(n)):
        raise ArithmeticError("trace correction operator is singular")
    inv = [r[n:] for r in red]
    return idx, inv


def traceless_project(u: SymTensor) -> SymTensor:
    """The unique traceless tensor differing from u by the identity times a tensor."""
    k = u.order
    if k < 2:
        return u
    t = trace(u)
    if t.is_zero():
        return u
    idx, inv = _trace_correction_operator(k)
    tv = [t.coeff(m) for m in idx]
    vcoef = {}
    for i, kap in enumerate(idx):
        acc = Fraction(0)
        for j, x in enumerate(tv):
            a = inv[i][j]
            if a != 0 and _nz(x):
                acc = acc + x * a
        if _nz(acc):
            vcoef[kap] = acc
    corr = sym_product(identity(), SymTensor(k - 2, vcoef))
    out = u - corr
    out._traceless = True
    return out


class BasisW:
    """Orthogonal (unnormalised) basis of the order-k traceless tensors."""

    __slots__ = ("order", "tensors", "norms")

    def __init__(self, order, tensors):
        self.order = order
        self.tensors = tuple(tensors)
        self.norms = tuple(norm2(t) for t in self.tensors)

    def __len__(self):
        return len(self.tensors)

    def __iter__(self):
        return iter(self.tensors)

    def __getitem__(self, i):
        return self.tensors[i]


@lru_cache(maxsize=None)
def build_basis_W(k: int) -> BasisW:
    """Gram-Schmidt over traceless projections of monomials, graded-lex order."""
    if k < 0 or k > MAX_BASIS_ORDER:
        raise ValueError(f"basis order must be in 0..{MAX_BASIS_ORDER}")
    found = []
    norms = []
    for kap in sym_indices(k):
        v = traceless_project(monomial(kap))
        for w, nw in zip(found, norms):
            c = dot(v, w)
            if c != 0:
                v = v - w.scale(c / nw)
        if not v.is_zero():
            v._traceless = True
            found.append(v)
            norms.append(norm2(v))
        if len(found) == 2 * k + 1:
            break
    return BasisW(k, found)


# ---------------------------------------------------------------------------
# Rotation action


class TensorField(SymTensor):
    """A symmetric tensor whose coefficients are polynomials in one rotation."""

    __slots__ = ("var",)

    def __init__(self, order, coeffs, var):
        super().__init__(order, coeffs)
        self.var = var

    def at(self, s: RotMatrix) -> SymTensor:
        from .so3poly import substitute_constant

        return SymTensor(self.order, {k: substitute_constant(c, self.var, s).terms.get((), 0)
                                      for k, c in self.coeffs.items()})


def _linear_forms(entry):
    """Order-1 tensors m_i(p) with entry(j, i) as the x_j coefficient."""
    forms = []
    for i in range(3):
        forms.append(SymTensor(1, {(1, 0, 0): entry(0, i), (0, 1, 0): entry(1, i), (0, 0, 1): entry(2, i)}))
    return forms


def _apply_forms(u: SymTensor, forms, one) -> dict:
    k = u.order
    powers = [[SymTensor.scalar(one)] for _ in range(3)]
    out = SymTensor.zero(k)
    for kap, c in u.coeffs.items():
        term = None
        for i in range(3):
            while len(powers[i]) <= kap[i]:
                powers[i].append(sym_product(powers[i][-1], forms[i]))
            p = powers[i][kap[i]]
            term = p if term is None else sym_product(term, p)
        out = out + term.scale(c) if not isinstance(c, OrientPoly) else out + _scale_left(term, c)
    return out.coeffs


def _scale_left(t: SymTensor, c):
    return SymTensor(t.order, {k: c * v for k, v in t.coeffs.items()})


_FIELD_FORMS: dict = {}


def rotate_to_field(u: SymTensor, var=1) -> TensorField:
    """The tensor field p -> p o u obtained by replacing e_i with m_i(p)."""
    forms = _FIELD_FORMS.get(var)
    if forms is None:
        forms = _linear_forms(lambda j, i: OrientPoly.entry(var, j, i))
        _FIELD_FORMS[var] = forms
    coeffs = _apply_forms(u, forms, OrientPoly.const(1))
    return TensorField(u.order, coeffs, var)


def apply_rotation(u: SymTensor, s: RotMatrix) -> SymTensor:
    """The tensor s o u, whose generating polynomial is P(s^T x)."""
    if not s.exact:
        raise ValueError("apply_rotation needs an exact matrix; use rotate_numeric")
    forms = _linear_forms(lambda j, i: s.rows[j][i])
    return SymTensor(u.order, _apply_forms(u, forms, Fraction(1)))


def rotate_numeric(u: SymTensor, mats) -> np.ndarray:
    """Dense float components of p o u for a stack of matrices (N, 3, 3)."""
    mats = np.asarray(mats, dtype=float)
    dense = to_dense(u).astype(float)
    k = u.order
    out = np.broadcast_to(dense, (mats.shape[0],) + dense.shape).copy()
    letters = "abcdefghij"
    for ax in range(k):
        # contract axis ax with p[:, out_index, in_index]
        sub_in = "".join(letters[:k])
        sub_out = sub_in[:ax] + "z" + sub_in[ax + 1:]
        out = np.einsum(f"nz{sub_in[ax]},n{sub_in}->n{sub_out}", mats, out)
    return out


def field_components(field: SymTensor):
    """Components (in sym_indices order) of a tensor field."""
    return [field.component_of_type(kap) for kap in sym_indices(field.order)]


def pair_w(k: int, i: int, j: int, var=1) -> OrientPoly:
    """The function W_i . W_j(p) with 1-based basis indices."""
    basis = build_basis_W(k)
    n = len(basis)
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"indices must lie in 1..{n}")
    wi = basis[i - 1]
    wj = rotate_to_field(basis[j - 1], var)
    acc = OrientPoly()
    for kap, c in wi.coeffs.items():
        d = wj.coeffs.get(kap)
        if d is not None:
            acc = acc + d.scale(c * Fraction(1, multinomial(kap)))
    return acc


# ---------------------------------------------------------------------------
# Random tensors and formatting


def random_symmetric(k: int, rng, lo: int = -5, hi: int = 5) -> SymTensor:
    return SymTensor(k, {kap: Fraction(int(rng.integers(lo, hi + 1)), int(rng.integers(1, 4)))
                         for kap in sym_indices(k)})


def random_traceless(k: int, rng, lo: int = -5, hi: int = 5) -> SymTensor:
    while True:
        basis = build_basis_W(k)
        t = SymTensor.zero(k)
        for w in basis:
            t = t + w.scale(Fraction(int(rng.integers(lo, hi + 1)), int(rng.integers(1, 4))))
        if not t.is_zero():
            t._traceless = True
            return t


def _fmt_coeff(c) -> str:
    return str(c)


def format_monomial(kap) -> str:
    parts = []
    for i, e in enumerate(kap):
        if e == 1:
            parts.append(f"m{i + 1}")
        elif e > 1:
            parts.append(f"m{i + 1}^{e}")
    return " ".join(parts) if parts else "1"


def format_tensor(u: SymTensor) -> str:
    """Monomial notation, e.g. ``2/3 m1^2 - 1/3 m2^2 - 1/3 m3^2``."""
    if u.is_zero():
        return "0"
    out = []
    for kap in sym_indices(u.order):
        c = u.coeffs.get(kap)
        if c is None:
            continue
        out.append((c, format_monomial(kap)))
    return join_terms(out)


def join_terms(items) -> str:
    """Join (coefficient, monomial string) pairs with signs."""
    s = ""
    for n, (c, mono) in enumerate(items):
        neg = False
        try:
            neg = c < 0
        except TypeError:
            neg = False
        mag = -c if neg else c
        if mono == "1":
            body = _fmt_coeff(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{_fmt_coeff(mag)} {mono}"
        if n == 0:
            s = ("-" if neg else "") + body
        else:
            s += (" - " if neg else " + ") + body
    return s
