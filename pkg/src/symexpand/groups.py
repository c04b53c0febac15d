"""Point groups: generator realizations, invariant tensor spaces and type splits.

Frame convention: the principal symmetry axis is the body axis m1.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

from . import _linalg
from .exactscalar import MixedRadicalError, QuadScalar, exact_cos_sin, simplify_scalar
from .so3poly import RotMatrix
from .tensors import (
    SymTensor,
    apply_rotation,
    build_basis_W,
    join_terms,
    format_monomial,
    rotate_numeric,
    sym_indices,
    sym_product,
    to_dense,
    traceless_project,
)

MAX_ORDER = 6


class GroupError(ValueError):
    """Invalid or unknown point-group specification."""


class GroupCapError(ValueError):
    """Requested tensor order beyond the supported cap."""


class InapplicableError(ValueError):
    """The operation needs improper rotations but the group has none."""


# ---------------------------------------------------------------------------
# Specifications

AXIAL_FINITE = ("Cn", "Cnv", "Cnh", "S2n", "Dn", "Dnh", "Dnd")
AXIAL_INFINITE = ("Cinf", "Cinfv", "Cinfh", "Dinf", "Dinfh")
POLYHEDRAL = ("T", "Td", "Th", "O", "Oh", "I", "Ih")
FAMILIES = AXIAL_INFINITE + AXIAL_FINITE + POLYHEDRAL

_PROPER_OF = {
    "Cn": "Cn", "Cnv": "Cn", "Cnh": "Cn", "S2n": "Cn",
    "Dn": "Dn", "Dnh": "Dn", "Dnd": "Dn",
    "Cinf": "Cinf", "Cinfv": "Cinf", "Cinfh": "Cinf",
    "Dinf": "Dinf", "Dinfh": "Dinf",
    "T": "T", "Td": "T", "Th": "T", "O": "O", "Oh": "O", "I": "I", "Ih": "I",
}

_ALIASES = {"Ci": ("S2n", 1), "Cs": ("Cnh", 1)}

VALID_NAMES_HELP = (
    "Cn, Cnv, Cnh, Dn, Dnh, Dnd (n >= 1), S2n spelled S2, S4, S6, ..., "
    "Cinf, Cinfv, Cinfh, Dinf, Dinfh, T, Td, Th, O, Oh, I, Ih, Ci, Cs"
)


@dataclass(frozen=True)
class PointGroupSpec:
    family: str
    n: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GroupError(f"unknown family {self.family!r}")
        if self.family in AXIAL_FINITE:
            if not isinstance(self.n, int) or self.n < 1:
                raise GroupError(f"family {self.family} needs an integer n >= 1")
        elif self.n is not None:
            raise GroupError(f"family {self.family} takes no n")

    @property
    def proper_family(self) -> str:
        return _PROPER_OF[self.family]

    @property
    def has_improper(self) -> bool:
        return self.family != self.proper_family

    @property
    def infinite(self) -> bool:
        return self.family in AXIAL_INFINITE

    @property
    def name(self) -> str:
        f, n = self.family, self.n
        if f == "S2n":
            return f"S{2 * n}"
        if f in AXIAL_FINITE:
            return f[0] + str(n) + f[2:]
        return f

    def proper(self) -> "PointGroupSpec":
        return PointGroupSpec(self.proper_family, self.n if self.family in AXIAL_FINITE else None)

    def __str__(self):
        return self.name


_NAME_RE = re.compile(r"^([CDS])(\d+)([vhd]?)$")


def parse_group(name: str) -> PointGroupSpec:
    """Parse an ASCII Schoenflies symbol such as ``C2v``, ``S4``, ``Cinfh`` or ``Td``."""
    s = name.strip()
    if s in _ALIASES:
        return PointGroupSpec(*_ALIASES[s])
    if s in AXIAL_INFINITE or s in POLYHEDRAL:
        return PointGroupSpec(s)
    m = _NAME_RE.match(s)
    if m:
        letter, num, suffix = m.group(1), int(m.group(2)), m.group(3)
        if letter == "S" and not suffix and num >= 2 and num % 2 == 0:
            return PointGroupSpec("S2n", num // 2)
        if letter == "C" and num >= 1 and suffix in ("", "v", "h"):
            return PointGroupSpec("Cn" + suffix, num)
        if letter == "D" and num >= 1 and suffix in ("", "h", "d"):
            return PointGroupSpec("Dn" + suffix, num)
    bad = 0
    for bad, ch in enumerate(s):
        if not (ch.isalnum()):
            break
    raise GroupError(f"unknown group name {name!r} (problem near position {bad}); valid names: {VALID_NAMES_HELP}")


# ---------------------------------------------------------------------------
# Generators


def _float_rot(theta: float) -> RotMatrix:
    c, s = math.cos(theta), math.sin(theta)
    return RotMatrix(np.array([[1.0, 0, 0], [0, c, -s], [0, s, c]]), exact=False)


def rot_axis1(num: int, den: int) -> RotMatrix:
    """Rotation by pi*num/den about m1; exact when cos and sin lie in a supported field."""
    cs = exact_cos_sin(num, den)
    if cs is None:
        return _float_rot(math.pi * num / den)
    c, s = cs
    return RotMatrix(((1, 0, 0), (0, c, -s), (0, s, c)))


B2 = RotMatrix(((-1, 0, 0), (0, 1, 0), (0, 0, -1)))
R3 = RotMatrix(((0, 0, 1), (1, 0, 0), (0, 1, 0)))
FLIP12 = RotMatrix(((-1, 0, 0), (0, -1, 0), (0, 0, 1)))
IDENTITY = RotMatrix.identity()


def _v5() -> RotMatrix:
    phi = QuadScalar.golden_ratio()
    h = Fraction(1, 2)
    rows = ((phi * h, -h, (phi - 1) * h), (h, (phi - 1) * h, -phi * h), ((phi - 1) * h, phi * h, h))
    return RotMatrix(rows)


V5 = _v5()


def proper_generators(spec: PointGroupSpec):
    fam = spec.proper_family
    if fam == "Cn":
        return [rot_axis1(2, spec.n)]
    if fam == "Dn":
        return [rot_axis1(2, spec.n), B2]
    if fam == "T":
        return [rot_axis1(1, 1), B2, R3]
    if fam == "O":
        return [rot_axis1(1, 2), B2, R3]
    if fam == "I":
        return [rot_axis1(1, 1), B2, R3, V5]
    return []


def improper_representative(spec: PointGroupSpec):
    """The proper rotation k with -k in the group, or None for proper groups."""
    f, n = spec.family, spec.n
    if not spec.has_improper:
        return None
    if f in ("Cnv", "Cinfv"):
        return FLIP12
    if f in ("Cinfh", "Dinfh", "Th", "Oh", "Ih"):
        return IDENTITY
    if f in ("Cnh", "Dnh"):
        return IDENTITY if n % 2 == 0 else rot_axis1(1, n)
    if f in ("S2n", "Dnd"):
        return IDENTITY if n % 2 == 1 else rot_axis1(1, n)
    if f == "Td":
        return rot_axis1(1, 2)
    raise GroupError(f"no improper representative for {f}")


def closure(generators, limit: int = 200):
    """All products of the generators (breadth-first), starting from the identity."""
    exact = all(g.exact for g in generators)
    start = IDENTITY if exact else RotMatrix(np.eye(3), exact=False)
    seen = {start: None}
    order = [start]
    frontier = [start]
    while frontier:
        nxt = []
        for a in frontier:
            for g in generators:
                b = a @ g
                if b not in seen:
                    seen[b] = None
                    order.append(b)
                    nxt.append(b)
                    if len(order) > limit:
                        raise GroupError("closure exceeded the element limit")
        frontier = nxt
    return order


@dataclass
class GroupRealization:
    spec: PointGroupSpec
    generators: list
    elements: list | None  # None for the continuous families
    k: RotMatrix | None
    exact: bool

    @property
    def order(self):
        return None if self.elements is None else len(self.elements)

    @property
    def has_inversion(self) -> bool:
        return self.k is not None and self.k == IDENTITY

    def sample_elements(self):
        """Elements for numeric checks: the finite list, or sampled axial rotations."""
        if self.elements is not None:
            return list(self.elements)
        out = [_float_rot(2 * math.pi * t) for t in (0.1, 0.37, 0.77)]
        if self.spec.proper_family == "Dinf":
            out += [B2] + [(_float_rot(2 * math.pi * t) @ B2) for t in (0.1, 0.37)]
        return out

    def exact_subgroup_elements(self):
        """Exact elements usable for exact invariance checks (rational-angle subgroup for the continuous families)."""
        if self.elements is not None:
            return [s for s in self.elements if s.exact]
        gens = [rot_axis1(2, 4), rot_axis1(2, 3)]
        if self.spec.proper_family == "Dinf":
            gens.append(B2)
        return [g for g in gens]


@lru_cache(maxsize=None)
def realize(spec: PointGroupSpec) -> GroupRealization:
    gens = proper_generators(spec)
    k = improper_representative(spec)
    if spec.infinite:
        return GroupRealization(spec, gens, None, k, exact=False)
    try:
        elements = closure(gens) if gens else [IDENTITY]
    except MixedRadicalError:  # pragma: no cover - no supported family mixes radicals
        gens = [RotMatrix(g.to_numpy(), exact=False) for g in gens]
        elements = closure(gens)
    exact = all(g.exact for g in gens) and (k is None or k.exact)
    return GroupRealization(spec, gens, elements, k, exact)


# ---------------------------------------------------------------------------
# Linear algebra helpers on tensors


def _vec(t: SymTensor):
    return [t.coeff(kap) for kap in sym_indices(t.order)]


def _from_vec(order: int, vec) -> SymTensor:
    return SymTensor(order, {kap: simplify_scalar(c) for kap, c in zip(sym_indices(order), vec)})


def _leading(t: SymTensor):
    for kap in sym_indices(t.order):
        c = t.coeffs.get(kap)
        if c is not None:
            return c
    return None


def normalize_tensor(t: SymTensor) -> SymTensor:
    """Scale so the first nonzero coefficient (monomial order) equals one."""
    c = _leading(t)
    if c is None or c == 1:
        return t
    inv = 1 / c if isinstance(c, (int, Fraction)) else c.inverse()
    return t.map_coefficients(lambda x: simplify_scalar(x * inv))


def reduced_basis(tensors, order: int):
    """Row-reduced basis of the span of ``tensors`` (deterministic)."""
    rows = [_vec(t) for t in tensors if not t.is_zero()]
    if not rows:
        return []
    red, _ = _linalg.rref(rows)
    return [_from_vec(order, r) for r in red]


def same_span(a, b) -> bool:
    if not a and not b:
        return True
    return _linalg.same_span([_vec(t) for t in a], [_vec(t) for t in b])


def span_rank(tensors) -> int:
    rows = [_vec(t) for t in tensors]
    return _linalg.rank(rows) if rows else 0


def _coset_sum(gens, t: SymTensor, elements=None) -> SymTensor:
    """Sum of s o t over the group generated by ``gens``.

    Factored through left cosets of the subgroup generated by all but the last
    generator, so the expensive irrational rotations touch few tensors.
    """
    elements = closure(gens) if elements is None else elements
    if len(gens) > 1:
        sub = closure(gens[:-1])
        if len(sub) < len(elements):
            inner = _coset_sum(gens[:-1], t, sub)
            covered = set()
            reps = []
            for s in elements:
                if s not in covered:
                    reps.append(s)
                    covered.update(s @ h for h in sub)
            acc = SymTensor.zero(t.order)
            for r in reps:
                acc = acc + apply_rotation(inner, r)
            return acc
    acc = SymTensor.zero(t.order)
    for s in elements:
        acc = acc + apply_rotation(t, s)
    return acc


def average(g: GroupRealization, t: SymTensor) -> SymTensor:
    """The averaging projector (1/|G|) sum_s s o t."""
    if g.elements is None or not g.exact:
        raise GroupError("averaging needs a finite exact realization")
    acc = _coset_sum(g.generators, t, g.elements) if g.generators else t
    inv = Fraction(1, len(g.elements))
    return acc.map_coefficients(lambda x: simplify_scalar(x * inv))


def invariant_space_avg(g: GroupRealization, order: int, cap: int = MAX_ORDER):
    """Basis of the invariant traceless tensors: the image of the group-averaging projector."""
    if order > cap:
        raise GroupCapError(f"order {order} exceeds cap {cap}")
    images = [average(g, w) for w in build_basis_W(order)]
    return reduced_basis(images, order)


# ---------------------------------------------------------------------------
# Polynomials in m1, m2, m3 and the identity symbol i


class MExpr:
    """Polynomial in m1, m2, m3 and i; keys are (a1, a2, a3, b) for m1^a1 m2^a2 m3^a3 i^b."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: Fraction(v) for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def m(cls, i: int) -> "MExpr":
        e = [0, 0, 0, 0]
        e[i] = 1
        return cls({tuple(e): 1})

    @classmethod
    def ident(cls) -> "MExpr":
        return cls({(0, 0, 0, 1): 1})

    @classmethod
    def one(cls) -> "MExpr":
        return cls({(0, 0, 0, 0): 1})

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return MExpr(out)

    def __neg__(self):
        return MExpr({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "MExpr":
        return MExpr({k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, MExpr):
            return self.scale(other)
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0) + v1 * v2
        return MExpr(out)

    __rmul__ = scale

    def __pow__(self, e: int):
        out = MExpr.one()
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, MExpr) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self):
        return not self.terms

    @property
    def order(self):
        degs = {a1 + a2 + a3 + 2 * b for a1, a2, a3, b in self.terms}
        if len(degs) > 1:
            raise ValueError("expression is not homogeneous")
        return degs.pop() if degs else 0

    def _sorted(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][0] + kv[0][1] + kv[0][2],) + kv[0][:3], reverse=True)

    def normalized(self) -> "MExpr":
        if not self.terms:
            return self
        lead = self._sorted()[0][1]
        return self.scale(1 / lead)

    def to_tensor(self) -> SymTensor:
        k = self.order
        acc = SymTensor.zero(k)
        ipow = {}
        for (a1, a2, a3, b), c in self.terms.items():
            if b not in ipow:
                ipow[b] = SymTensor(0, {(0, 0, 0): 1}) if b == 0 else SymTensor(
                    2, {(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1}) ** b
            acc = acc + sym_product(SymTensor(a1 + a2 + a3, {(a1, a2, a3): 1}), ipow[b]).scale(c)
        return acc

    def label(self) -> str:
        items = []
        for (a1, a2, a3, b), c in self._sorted():
            parts = []
            mono = format_monomial((a1, a2, a3))
            if mono != "1":
                parts.append(mono)
            if b == 1:
                parts.append("i")
            elif b > 1:
                parts.append(f"i^{b}")
            items.append((c, " ".join(parts) if parts else "1"))
        return join_terms(items) if items else "0"

    def __repr__(self):
        return f"MExpr({self.label()!r})"


# ---------------------------------------------------------------------------
# Homogenized Chebyshev and symmetric Jacobi polynomials


def _binom_expand(n: int, kind: str):
    """{(py, pz): coef} for the homogenized polynomial of degree n in y with z standing for |.|^2."""
    out = {}
    for j in range(n // 2 + 1):
        if kind == "T":
            c = comb(n, 2 * j)
        else:
            c = comb(n + 1, 2 * j + 1)
        # (y^2 - z)^j y^(n-2j)
        for i in range(j + 1):
            key = (2 * (j - i) + n - 2 * j, i)
            out[key] = out.get(key, 0) + c * comb(j, i) * (-1) ** i
    return {k: Fraction(v) for k, v in out.items() if v}


def _jacobi_expand(n: int, mu: int):
    lead = Fraction(factorial(2 * mu) * factorial(n + mu), factorial(mu) * factorial(n + 2 * mu))
    out = {}
    for j in range(n // 2 + 1):
        ratio = Fraction(1)
        for t in range(n - j):
            ratio *= Fraction(2 * mu + 1 + 2 * t, 2)
        c = lead * (-1) ** j * ratio / (factorial(j) * factorial(n - 2 * j)) * 2 ** (n - 2 * j)
        out[(n - 2 * j, j)] = c
    return out


def tilde_coefficients(kind: str, degree: int, mu: int = 0):
    """Coefficients {(py, pz): c} of T~_n, U~_n or P~_n^(mu,mu) as polynomials in y and z."""
    if degree < 0 or mu < 0:
        raise ValueError("degree and mu must be nonnegative")
    if kind in ("T", "U"):
        return _binom_expand(degree, kind)
    if kind == "P":
        return _jacobi_expand(degree, mu)
    raise ValueError(f"unknown kind {kind!r}")


def _evaluate(coefs, y, z, one, mul):
    acc = None
    ypow, zpow = [one], [one]
    for (py, pz), c in sorted(coefs.items()):
        while len(ypow) <= py:
            ypow.append(mul(ypow[-1], y))
        while len(zpow) <= pz:
            zpow.append(mul(zpow[-1], z))
        term = mul(ypow[py], zpow[pz]).scale(c)
        acc = term if acc is None else acc + term
    return acc


def tilde_poly(kind: str, degree: int, mu: int, y, z):
    """T~, U~ or P~^(mu,mu) evaluated at an order-1 y and order-2 z.

    Works with :class:`SymTensor` (symmetric products) or :class:`MExpr`.
    """
    coefs = tilde_coefficients(kind, degree, mu)
    if isinstance(y, SymTensor):
        return _evaluate(coefs, y, z, SymTensor.scalar(1), sym_product)
    return _evaluate(coefs, y, z, MExpr.one(), lambda a, b: a * b)


# ---------------------------------------------------------------------------
# Closed-form invariant families


@dataclass(frozen=True)
class NamedTensor:
    label: str
    tensor: SymTensor


_M1, _M2, _M3, _I = MExpr.m(0), MExpr.m(1), MExpr.m(2), MExpr.ident()
_Z = _M2 * _M2 + _M3 * _M3  # i - m1^2 in the body frame


def _axial(l: int, m: int, kind: str) -> MExpr:
    p = tilde_poly("P", l - m, m, _M1, _I)
    if kind == "T":
        return p * tilde_poly("T", m, 0, _M2, _Z)
    return p * tilde_poly("U", m - 1, 0, _M2, _Z) * _M3


def _named(expr: MExpr) -> NamedTensor:
    e = expr.normalized()
    t = e.to_tensor()
    if not t.traceless:  # pragma: no cover - the axial families are harmonic
        raise AssertionError(f"closed form {e.label()} is not traceless")
    return NamedTensor(e.label(), t)


S2 = _M1 ** 2 * _M2 ** 2 + _M2 ** 2 * _M3 ** 2 + _M3 ** 2 * _M1 ** 2
S3 = _M1 * _M2 * _M3
E6 = (_M1 ** 2 - _M2 ** 2) * (_M2 ** 2 - _M3 ** 2) * (_M3 ** 2 - _M1 ** 2)


def _poly_label(i: int, j: int, with_e: bool) -> str:
    parts = ["E"] if with_e else []
    for sym, e in (("S2", i), ("S3", j)):
        if e == 1:
            parts.append(sym)
        elif e > 1:
            parts.append(f"{sym}^{e}")
    if not parts:
        return "1"
    return "(" + " ".join(parts) + ")_0"


def _polyhedral(l: int, odd_j: bool | None):
    """(S2^i S3^j)_0 with 4i+3j = l and (E S2^i S3^j)_0 with 6+4i+3j = l.

    ``odd_j`` None keeps every j (tetrahedral); False/True keep even j in the
    first family and odd j in the E family (octahedral).
    """
    out = []
    for with_e in (False, True):
        rest = l - 6 if with_e else l
        for i in range(rest // 4 + 1):
            r = rest - 4 * i
            if r % 3:
                continue
            j = r // 3
            if odd_j is not None and (j % 2 == 1) != with_e:
                continue
            expr = (E6 if with_e else MExpr.one()) * S2 ** i * S3 ** j
            t = traceless_project(expr.to_tensor())
            if t.is_zero():
                continue
            out.append(NamedTensor(_poly_label(i, j, with_e), normalize_tensor(t)))
    return _independent(out)


def _independent(named):
    rows = [_vec(n.tensor) for n in named]
    if not rows:
        return []
    keep = _linalg.independent_subset(rows)
    return [named[i] for i in keep]


def _icosahedral(l: int):
    base = _polyhedral(l, None)
    if not base:
        return []
    rows = []
    diffs = [apply_rotation(n.tensor, V5) - n.tensor for n in base]
    for kap in sym_indices(l):
        rows.append([d.coeff(kap) for d in diffs])
    null = _linalg.nullspace(rows, len(base))
    out = []
    for r, vec in enumerate(null):
        acc = SymTensor.zero(l)
        for c, n in zip(vec, base):
            if c != 0:
                acc = acc + n.tensor.scale(c)
        label = "1" if l == 0 else f"(I{l}.{r + 1})_0"
        out.append(NamedTensor(label, normalize_tensor(acc)))
    return out


@lru_cache(maxsize=None)
def _closed_form_cached(fam: str, n, l: int):
    if fam in ("Cinf", "Dinf"):
        if fam == "Dinf" and l % 2:
            return ()
        return (_named(_axial(l, 0, "T")),)
    if fam in ("Cn", "Dn"):
        out_t, out_u = [], []
        j = 0
        while j * n <= l:
            m = j * n
            if fam == "Cn" or (l - m) % 2 == 0:
                out_t.append(_named(_axial(l, m, "T")))
            if m >= 1 and (fam == "Cn" or (l - m) % 2 == 1):
                out_u.append(_named(_axial(l, m, "U")))
            j += 1
        return tuple(out_t + out_u)
    if fam == "T":
        return tuple(_polyhedral(l, None))
    if fam == "O":
        return tuple(_polyhedral(l, False))
    if fam == "I":
        return tuple(_icosahedral(l))
    raise GroupError(fam)  # pragma: no cover


def invariant_space_closed_form(spec: PointGroupSpec, order: int, cap: int = MAX_ORDER):
    """Invariant tensors of the proper subgroup from the closed-form families, with labels."""
    if order > cap:
        raise GroupCapError(f"order {order} exceeds cap {cap}")
    if order < 0:
        raise ValueError("order must be nonnegative")
    p = spec.proper()
    return list(_closed_form_cached(p.family, p.n, order))


# ---------------------------------------------------------------------------
# Type split


@dataclass(frozen=True)
class TypedTensor:
    label: str
    tensor: SymTensor
    type_sign: int

    @property
    def order(self):
        return self.tensor.order


@dataclass
class TypedInvariantSpace:
    order: int
    entries: list = field(default_factory=list)

    @property
    def basis_plus(self):
        return [e.tensor for e in self.entries if e.type_sign == 1]

    @property
    def basis_minus(self):
        return [e.tensor for e in self.entries if e.type_sign == -1]


def _eigen_sign(t: SymTensor, k: RotMatrix):
    """+1 or -1 if k o t = +-t, else None."""
    if k.exact:
        img = apply_rotation(t, k)
        if img == t:
            return 1
        if img == -t:
            return -1
        return None
    img = rotate_numeric(t, k.to_numpy()[None])[0]
    ref = to_dense(t).astype(float)
    for s in (1, -1):
        if np.allclose(img, s * ref, atol=1e-10):
            return s
    return None


def _split_component(t: SymTensor, k: RotMatrix, sign: int) -> SymTensor:
    img = apply_rotation(t, k)
    half = Fraction(1, 2)
    return (t + img.scale(sign)).map_coefficients(lambda x: simplify_scalar(x * half))


def type_split(spec: PointGroupSpec, order: int, cap: int = MAX_ORDER) -> TypedInvariantSpace:
    """Split the invariant space by the sign acquired under the improper representative."""
    if not spec.has_improper:
        raise InapplicableError(f"{spec.name} has no improper rotations")
    k = improper_representative(spec)
    entries = []
    pending = []
    for nt in invariant_space_closed_form(spec, order, cap):
        s = _eigen_sign(nt.tensor, k)
        if s is None:
            pending.append(nt)
        else:
            entries.append(TypedTensor(nt.label, nt.tensor, s))
    if pending:
        if not k.exact:  # pragma: no cover - closed forms are eigenvectors of k
            raise GroupError("cannot split a float realization without eigen tensors")
        for sign in (1, -1):
            parts = [_split_component(nt.tensor, k, sign) for nt in pending]
            for r, t in enumerate(reduced_basis(parts, order)):
                entries.append(TypedTensor(f"({'+' if sign > 0 else '-'}{order}.{r + 1})", t, sign))
    return TypedInvariantSpace(order, entries)


def typed_basis(spec: PointGroupSpec, max_order: int, cap: int = MAX_ORDER):
    """All typed invariant tensors of orders 0..max_order; proper groups give type 0."""
    out = []
    for l in range(max_order + 1):
        if spec.has_improper:
            out.extend(type_split(spec, l, cap).entries)
        else:
            out.extend(TypedTensor(nt.label, nt.tensor, 0) for nt in invariant_space_closed_form(spec, l, cap))
    return out


def is_invariant(t: SymTensor, s: RotMatrix, tol: float = 1e-10) -> bool:
    if s.exact:
        return apply_rotation(t, s) == t
    img = rotate_numeric(t, s.to_numpy()[None])[0]
    return bool(np.allclose(img, to_dense(t).astype(float), atol=tol))
