"""Expansion terms for two-, three- and four-body orientation kernels.

A term is a function of several rotations built from symmetric traceless
tensors attached to those rotations. Each term is stored as a list of
*pieces*: one tensor per rotation variable plus the contraction that joins
them. Gram matrices use two facts:

* every term is equivariant, so the first rotation can be pinned to the
  identity without changing any inner product;
* Schur orthogonality, ``int (p o x) (x) (p o y) dp = (x.y)/(2n+1) sum_i
  w_i (x) w_i / |w_i|^2`` for traceless ``x, y`` of order ``n``.

Together they turn each term into an exact finite feature vector whose
weighted dot products are the Gram entries. :func:`realize` builds the same
terms as explicit polynomials, which is slower but independent.
"""

from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd as _gcd

import numpy as np

from . import _linalg
from .contract import (
    EPS,
    ContractionPattern,
    PatternError,
    a3_pattern,
    a4_patterns,
    contract_network,
    network_subscripts,
    pcross,
    pdot,
    traceless_pcross,
    traceless_pdot,
)
from .so3poly import OrientPoly, haar_integral_all
from .tensors import (
    SymTensor,
    build_basis_W,
    dot,
    identity_power,
    multinomial,
    random_traceless,
    rotate_to_field,
    sym_indices,
    sym_product,
    to_dense,
)

log = logging.getLogger(__name__)

DEFAULT_CAPS = {"n": 3, "k": 4, "cluster": 4}


@dataclass(frozen=True)
class TensorSlot:
    """A named symmetric traceless tensor that can be attached to a rotation.

    ``type_sign`` is +1/-1 for tensors with a definite behaviour under the
    improper element of a point group, 0 when not applicable.
    """

    name: str
    tensor: SymTensor
    type_sign: int = 0
    position: int = 0

    @property
    def order(self) -> int:
        return self.tensor.order

    def sort_key(self):
        return (self.order, self.position, self.name)

    def __repr__(self):
        return f"TensorSlot({self.name})"


@lru_cache(maxsize=None)
def basis_slot(order: int, index: int) -> TensorSlot:
    return TensorSlot(f"W{order}_{index}", build_basis_W(order)[index], 0, index)


def basis_slots(max_order: int):
    return [basis_slot(n, i) for n in range(max_order + 1) for i in range(2 * n + 1)]


# ---------------------------------------------------------------------------
# Pieces


@dataclass(frozen=True)
class M2Op:
    """i^q (x op_p y), optionally traceless-completed."""

    kind: str
    p: int
    q: int
    orthogonalized: bool

    def apply(self, x, y):
        if self.kind == "dot":
            f = traceless_pdot if self.orthogonalized else pdot
        else:
            f = traceless_pcross if self.orthogonalized else pcross
        out = f(x, y, self.p)
        if self.q:
            out = sym_product(identity_power(self.q), out)
        return out


@dataclass(frozen=True)
class NetOp:
    """A signed sum of scalar contraction networks over the rotation variables."""

    parts: tuple  # ((coef, ContractionPattern), ...)

    def apply(self, *tensors):
        total = 0
        for coef, pat in self.parts:
            total = total + contract_network(list(tensors), pat) * coef
        return total


@dataclass(frozen=True)
class Piece:
    coef: Fraction
    assign: tuple  # TensorSlot per rotation variable, variable 1 first
    op: object


def _merge(pieces):
    """Combine pieces sharing the same tensor assignment and operation."""
    merged = {}
    order = []
    for pc in pieces:
        key = (pc.assign, pc.op) if not isinstance(pc.op, NetOp) else (pc.assign, "net")
        if key not in merged:
            merged[key] = pc
            order.append(key)
            continue
        old = merged[key]
        if isinstance(pc.op, NetOp):
            parts = old.op.parts if old.coef == 1 else tuple((c * old.coef, p) for c, p in old.op.parts)
            add = tuple((c * pc.coef, p) for c, p in pc.op.parts)
            merged[key] = Piece(Fraction(1), old.assign, NetOp(_combine_parts(parts + add)))
        else:
            merged[key] = Piece(old.coef + pc.coef, old.assign, old.op)
    out = []
    for key in order:
        pc = merged[key]
        if isinstance(pc.op, NetOp):
            if not pc.op.parts:
                continue
        elif pc.coef == 0:
            continue
        out.append(pc)
    return out


def _combine_parts(parts):
    acc = {}
    for c, p in parts:
        acc[p] = acc.get(p, 0) + c
    return tuple((c, p) for p, c in acc.items() if c != 0)


# ---------------------------------------------------------------------------
# Two-body terms


@dataclass(frozen=True)
class M2Term:
    """i^q ( U(p1) op V(p2) + s V(p1) op U(p2) ), op = dot or cross with p pairs.

    ``swap_sign`` 0 keeps only the first piece (the unsymmetrised family).
    """

    q: int
    p: int
    kind: str
    u: TensorSlot
    v: TensorSlot
    swap_sign: int
    orthogonalized: bool = False

    @property
    def k(self) -> int:
        base = 2 * self.q + self.u.order + self.v.order - 2 * self.p
        return base if self.kind == "dot" else base - 1

    @property
    def nvars(self) -> int:
        return 2

    def op(self) -> M2Op:
        return M2Op(self.kind, self.p, self.q, self.orthogonalized)

    def pieces(self):
        op = self.op()
        out = [Piece(Fraction(1), (self.u, self.v), op)]
        if self.swap_sign:
            out.append(Piece(Fraction(self.swap_sign), (self.v, self.u), op))
        return _merge(out)

    def label(self) -> str:
        sym = "." if self.kind == "dot" else "x"
        core = f"{self.u.name}(p1) {sym}{self.p} {self.v.name}(p2)"
        if self.swap_sign:
            sign = "+" if self.swap_sign > 0 else "-"
            core = f"{core} {sign} {self.v.name}(p1) {sym}{self.p} {self.u.name}(p2)"
        if self.orthogonalized:
            core = f"({core})_0"
        return f"i^{self.q} {core}" if self.q else core


def _m2_ranges(k, r, m):
    """(kind, p, q) combinations giving output order k from orders r, m."""
    out = []
    for p in range(min(r, m) + 1):
        rest = k - r - m + 2 * p
        if rest >= 0 and rest % 2 == 0:
            out.append(("dot", p, rest // 2))
    for p in range(min(r, m)):
        rest = k - r - m + 2 * p + 1
        if rest >= 0 and rest % 2 == 0:
            out.append(("cross", p, rest // 2))
    return out


def m2_swap_sign(kind: str, k: int) -> int:
    """Sign s making U(p1) op V(p2) + s V(p1) op U(p2) pick up (-1)^k under p1 <-> p2."""
    par = -1 if k % 2 else 1
    return par if kind == "dot" else -par


def enum_m2_raw(k: int, v: TensorSlot, max_r: int | None = None):
    """All unsymmetrised terms i^q U(p1) op V(p2) for a fixed V, U over every basis."""
    m = v.order
    top = m + k if max_r is None else max_r
    out = []
    for r in range(top + 1):
        combos = _m2_ranges(k, r, m)
        for i in range(2 * r + 1):
            u = basis_slot(r, i)
            for kind, p, q in combos:
                out.append(M2Term(q, p, kind, u, v, 0))
    return out


def raw_count(k: int, m: int) -> int:
    return (2 * m + 1) * (k + 1) * (k + 2) // 2


def _m2_family(k: int, n: int, orthogonalized: bool, slots=None):
    slots = basis_slots(n) if slots is None else sorted(slots, key=TensorSlot.sort_key)
    out = []
    for a, u in enumerate(slots):
        for v in slots[a:]:
            same = u == v
            for kind, p, q in _m2_ranges(k, u.order, v.order):
                s = m2_swap_sign(kind, k)
                if same and s < 0:
                    continue
                out.append(M2Term(q, p, kind, u, v, s, orthogonalized))
    return out


def enum_m2(k: int, n: int, slots=None):
    """Terms of the swap-covariant set for output order k, tensor orders <= n."""
    return _m2_family(k, n, False, slots)


def orth_basis_m2(k: int, n: int, slots=None):
    """Traceless-completed versions of :func:`enum_m2`; pairwise orthogonal."""
    return _m2_family(k, n, True, slots)


def m2_swap_partner_set(k: int, n: int, sign: int):
    """Terms of the set whose members satisfy A(p2, p1) = sign * A(p1, p2)."""
    slots = basis_slots(n)
    out = []
    for a, u in enumerate(slots):
        for v in slots[a:]:
            for kind, p, q in _m2_ranges(k, u.order, v.order):
                s = sign if kind == "dot" else -sign
                if u == v and s < 0:
                    continue
                out.append(M2Term(q, p, kind, u, v, s))
    return out


# ---------------------------------------------------------------------------
# Three- and four-body terms


def _perm_pattern(pattern: ContractionPattern, sigma):
    """Relabel a pattern so tensor i sits at variable sigma[i] (0-based)."""
    pairs = pattern.pairs()
    new = {}
    for (a, b), c in zip(pairs, pattern.l):
        x, y = sorted((sigma[a], sigma[b]))
        new[(x, y)] = c
    l = tuple(new.get(pr, 0) for pr in pairs)
    tau = None
    if pattern.tau:
        tau = tuple(sigma[t - 1] + 1 for t in pattern.tau)
    return ContractionPattern(l, tau)


def _net_pieces(slots, pattern, symmetrized):
    n = len(slots)
    if not symmetrized:
        return [Piece(Fraction(1), tuple(slots), NetOp(((1, pattern),)))]
    out = []
    for sigma in itertools.permutations(range(n)):
        assign = [None] * n
        for i, s in enumerate(sigma):
            assign[s] = slots[i]
        out.append(Piece(Fraction(1), tuple(assign), NetOp(((1, _perm_pattern(pattern, sigma)),))))
    return _merge(out)


@dataclass(frozen=True)
class A3Term:
    slots: tuple
    eps: bool = False
    symmetrized: bool = True

    @property
    def nvars(self):
        return 3

    @property
    def orders(self):
        return tuple(s.order for s in self.slots)

    @property
    def pattern(self) -> ContractionPattern:
        return a3_pattern(self.orders, self.eps)

    @property
    def k(self):
        return 0

    def pieces(self):
        return _net_pieces(self.slots, self.pattern, self.symmetrized)

    def label(self) -> str:
        names = ", ".join(s.name for s in self.slots)
        l = ",".join(map(str, self.pattern.l))
        e = ";(123)" if self.eps else ""
        head = "sum_sigma a3" if self.symmetrized else "a3"
        return f"{head}({names}; {l}{e})"


@dataclass(frozen=True)
class A4Term:
    slots: tuple
    pattern: ContractionPattern
    symmetrized: bool = True

    def __post_init__(self):
        self.pattern.check([s.order for s in self.slots])

    @property
    def nvars(self):
        return 4

    @property
    def orders(self):
        return tuple(s.order for s in self.slots)

    @property
    def k(self):
        return 0

    def pieces(self):
        return _net_pieces(self.slots, self.pattern, self.symmetrized)

    def label(self) -> str:
        names = ", ".join(s.name for s in self.slots)
        l = ",".join(map(str, self.pattern.l))
        e = f";({''.join(map(str, self.pattern.tau))})" if self.pattern.tau else ""
        head = "sum_sigma a4" if self.symmetrized else "a4"
        return f"{head}({names}; {l}{e})"


def a3_feasible(orders, eps: bool) -> bool:
    try:
        a3_pattern(orders, eps)
        return True
    except PatternError:
        return False


def enum_m3(n: int, slots=None, symmetrized: bool = True):
    """Symmetrised three-body terms over tensors of order <= n."""
    slots = basis_slots(n) if slots is None else list(slots)
    slots = sorted(slots, key=TensorSlot.sort_key)
    out = []
    for trip in itertools.combinations_with_replacement(slots, 3):
        orders = [s.order for s in trip]
        if a3_feasible(orders, False):
            out.append(A3Term(tuple(trip), False, symmetrized))
        if len(set(trip)) == 3 and a3_feasible(orders, True):
            out.append(A3Term(tuple(trip), True, symmetrized))
    return out


def enum_m3_fixed(u2: TensorSlot, u3: TensorSlot):
    """Unsymmetrised terms with U2, U3 fixed and U1 over every feasible basis tensor."""
    out = []
    for n1 in range(abs(u2.order - u3.order), u2.order + u3.order + 1):
        for eps in (False, True):
            if not a3_feasible((n1, u2.order, u3.order), eps):
                continue
            for i in range(2 * n1 + 1):
                out.append(A3Term((basis_slot(n1, i), u2, u3), eps, False))
    return out


# -- four-body selection rules ------------------------------------------------

EQUALITY_CASES = ("distinct", "pair", "pairpair", "triple", "all")


def arrange_slots(slots):
    """Order four tensors so equal ones come first; return (slots, case)."""
    groups = {}
    for s in slots:
        groups.setdefault(s, 0)
        groups[s] += 1
    ordered = sorted(groups.items(), key=lambda kv: (-kv[1], kv[0].sort_key()))
    flat = tuple(s for s, c in ordered for _ in range(c))
    sizes = sorted(groups.values(), reverse=True)
    case = {(1, 1, 1, 1): "distinct", (2, 1, 1): "pair", (2, 2): "pairpair",
            (3, 1): "triple", (4,): "all"}[tuple(sizes)]
    return flat, case


def _rule_even(l, D, case):
    l12, l13, l14, l23, l24, l34 = l
    if case == "distinct":
        return (D <= 0 and l12 <= 1) or (D >= 0 and l34 <= 1)
    if case in ("pair", "pairpair"):
        return ((D <= 0 and l12 <= 1) or (D >= 0 and l34 <= 1)) and l13 <= l23
    return l12 == l13 <= l23


def _rule_odd(l, tau, D, case, orders=None):
    l12, l13, l14, l23, l24, l34 = l
    if case == "distinct":
        if D <= -1:
            return tau in ((1, 3, 4), (2, 3, 4)) and l12 == 0
        return tau in ((1, 2, 3), (1, 2, 4)) and l34 == 0
    if case == "pair":
        if D <= -1:
            return tau == (1, 3, 4) and l12 == 0
        return tau in ((1, 2, 3), (1, 2, 4)) and l34 == 0 and l13 < l23
    if case == "triple":
        if tau != (1, 2, 4):
            return False
        if D <= -1:
            return l12 == l13 < l23
        return l in _triple_odd_mirror_selection(orders[0], orders[3])
    return False


@lru_cache(maxsize=None)
def _triple_odd_mirror_selection(n1: int, n4: int) -> frozenset:
    """Kept patterns for three equal tensors of order n1 > n4 with an epsilon on (1, 2, 4).

    The closed-form choice l34 == l24 < l14 can pick an identically vanishing
    term here, so patterns are kept greedily while they raise the exact Gram
    rank on fixed generic tensors; patterns of that closed form are tried first.
    """
    rng = np.random.default_rng(1000 + 16 * n1 + n4)
    a = TensorSlot("A", random_traceless(n1, rng))
    b = TensorSlot("B", random_traceless(n4, rng))
    cands = [A4Term((a, a, a, b), pat) for pat in a4_patterns([n1, n1, n1, n4], True) if pat.tau == (1, 2, 4)]

    def preferred(t):
        l = t.pattern.l
        return (not l[5] == l[4] < l[2], l)

    cands.sort(key=preferred)
    if not cands:
        return frozenset()
    g = gram_matrix(cands)
    keep, rank = [], 0
    for i in range(len(cands)):
        idx = keep + [i]
        r = _linalg.rank([[g[x][y] for y in idx] for x in idx])
        if r > rank:
            keep.append(i)
            rank = r
    return frozenset(cands[i].pattern.l for i in keep)


def a4_selected(pattern: ContractionPattern, orders, case: str) -> bool:
    """Whether a pattern survives the independence selection rules."""
    n1, n2, n3, n4 = orders
    D = n1 + n2 - n3 - n4
    if pattern.tau is None:
        return _rule_even(pattern.l, D, case)
    return _rule_odd(pattern.l, pattern.tau, D, case, orders)


def a4_candidates(slots, symmetrized: bool = True):
    """Every four-body term for these tensors, before selection (arranged order)."""
    flat, case = arrange_slots(slots)
    orders = [s.order for s in flat]
    out = []
    for eps in (False, True):
        for pat in a4_patterns(orders, eps):
            out.append(A4Term(flat, pat, symmetrized))
    return out, case


def enum_m4_for(slots, symmetrized: bool = True):
    """Selected four-body terms for one multiset of tensors."""
    cands, case = a4_candidates(slots, symmetrized)
    return [t for t in cands if a4_selected(t.pattern, t.orders, case)]


def enum_m4(n: int, slots=None, symmetrized: bool = True):
    slots = basis_slots(n) if slots is None else list(slots)
    slots = sorted(slots, key=TensorSlot.sort_key)
    out = []
    for quad in itertools.combinations_with_replacement(slots, 4):
        out.extend(enum_m4_for(quad, symmetrized))
    return out


# ---------------------------------------------------------------------------
# Gram engine


def _out_types(k):
    return sym_indices(k)


def _out_weights(k):
    return [Fraction(1, multinomial(mu)) for mu in sym_indices(k)]


_TABLES: dict = {}


def _integer_dense(t: SymTensor):
    """(integer object array, denominator) with dense(t) = array / denominator."""
    d = to_dense(t)
    den = 1
    for x in d.flat:
        if isinstance(x, Fraction) and x.denominator != 1:
            den = den * x.denominator // _gcd(den, x.denominator)
    out = np.empty(d.shape, dtype=object)
    flat_in, flat_out = d.ravel(), out.ravel()
    for i, x in enumerate(flat_in):
        flat_out[i] = int(x * den)
    return out, den


@lru_cache(maxsize=None)
def _basis_stack(order):
    """Integer stack of the order-n basis plus per-element denominators."""
    parts = [_integer_dense(w) for w in build_basis_W(order)]
    return np.stack([p[0] for p in parts]), tuple(p[1] for p in parts)


def _piece_table(piece: Piece, k: int) -> np.ndarray:
    """D[mu, i_2, .., i_N]: output coefficient mu with basis tensor i_j at variable j."""
    u1 = piece.assign[0]
    orders = tuple(s.order for s in piece.assign[1:])
    key = (u1, orders, piece.op, k)
    hit = _TABLES.get(key)
    if hit is not None:
        return hit
    if isinstance(piece.op, M2Op):
        types = _out_types(k)
        basis = build_basis_W(orders[0])
        tab = np.empty((len(types), len(basis)), dtype=object)
        for i, w in enumerate(basis):
            t = piece.op.apply(u1.tensor, w)
            if t.order != k:
                raise ValueError("mixed output orders in one Gram computation")
            for a, mu in enumerate(types):
                tab[a, i] = t.coeff(mu)
    else:
        tab = None
        for coef, pat in piece.op.parts:
            part = _net_table(u1.tensor, orders, pat) * coef
            tab = part if tab is None else tab + part
        tab = tab.reshape((1,) + tab.shape)
    _TABLES[key] = tab
    return tab


_BATCH = "ZYXWVUTS"


def _net_table(u1: SymTensor, orders, pattern: ContractionPattern):
    all_orders = [u1.order] + list(orders)
    pattern.check(all_orders)
    subs, eps_sub = network_subscripts(all_orders, pattern)
    first, den = _integer_dense(u1)
    ops = [first]
    spec = [subs[0]]
    out = ""
    dens = []
    for j, n in enumerate(orders):
        b = _BATCH[j]
        stack, sd = _basis_stack(n)
        ops.append(stack)
        dens.append(sd)
        spec.append(b + subs[j + 1])
        out += b
    if eps_sub is not None:
        ops.insert(0, EPS.astype(object))
        spec.insert(0, eps_sub)
    res = np.asarray(np.einsum(",".join(spec) + "->" + out, *ops, optimize="greedy"), dtype=object)
    scale = np.array(Fraction(1, den), dtype=object)
    for sd in dens:
        scale = np.multiply.outer(scale, np.array([Fraction(1, x) for x in sd], dtype=object))
    return res * scale


class _Library:
    """Exact orthogonal bases for the span of tensors seen at each order."""

    def __init__(self):
        self.members: dict = {}
        self.basis: dict = {}

    def add(self, slot: TensorSlot):
        lst = self.members.setdefault(slot.order, [])
        if slot.tensor not in lst:
            lst.append(slot.tensor)

    def finish(self):
        for n, lst in self.members.items():
            ortho = []
            for x in lst:
                r = x
                for e, ee in ortho:
                    c = dot(r, e) / ee
                    if c:
                        r = r - e.scale(c)
                if not r.is_zero():
                    ortho.append((r, dot(r, r)))
            self.basis[n] = ortho
        self._coords = {}

    def coords(self, t: SymTensor):
        key = t
        hit = self._coords.get(key)
        if hit is None:
            hit = [dot(t, e) / ee for e, ee in self.basis[t.order]]
            self._coords[key] = hit
        return hit


def _block_weight(k, sig, e, lib: _Library):
    w = np.array(_out_weights(k), dtype=object)
    shape = [len(w)]
    for j, n in enumerate(sig):
        basis = build_basis_W(n)
        inv = np.array([Fraction(1) / dot(b, b) for b in basis], dtype=object)
        scale = lib.basis[n][e[j]][1] / (2 * n + 1)
        w = np.multiply.outer(w, inv * scale)
        shape.append(len(basis))
    return w


def feature_vectors(terms):
    """Per-term exact feature blocks and their weights (shared across terms)."""
    if not terms:
        return [], {}
    ks = {t.k for t in terms}
    if len(ks) != 1:
        raise ValueError(f"terms mix output orders {sorted(ks)}")
    k = ks.pop()
    nv = {t.nvars for t in terms}
    if len(nv) != 1:
        raise ValueError("terms mix numbers of rotation variables")
    lib = _Library()
    all_pieces = []
    for t in terms:
        pcs = t.pieces()
        all_pieces.append(pcs)
        for pc in pcs:
            for s in pc.assign[1:]:
                lib.add(s)
    lib.finish()
    feats = []
    weights = {}
    for pcs in all_pieces:
        blocks = {}
        for pc in pcs:
            tab = _piece_table(pc, k)
            sig = tuple(s.order for s in pc.assign[1:])
            coord_lists = [lib.coords(s.tensor) for s in pc.assign[1:]]
            for e in itertools.product(*[range(len(c)) for c in coord_lists]):
                c = pc.coef
                for j, ej in enumerate(e):
                    c = c * coord_lists[j][ej]
                    if c == 0:
                        break
                if c == 0:
                    continue
                key = (sig, e)
                add = tab * c
                blocks[key] = blocks[key] + add if key in blocks else add
                if key not in weights:
                    weights[key] = _block_weight(k, sig, e, lib)
        feats.append(blocks)
    return feats, weights


def gram_matrix(terms):
    """Exact Gram matrix  int A_a . A_b  over all rotation variables."""
    feats, weights = feature_vectors(terms)
    n = len(terms)
    g = [[Fraction(0)] * n for _ in range(n)]
    for key, w in weights.items():
        rows = [i for i in range(n) if key in feats[i]]
        if not rows:
            continue
        flat_w = w.ravel()
        mats = [feats[i][key].ravel() for i in rows]
        weighted = [m * flat_w for m in mats]
        for a, i in enumerate(rows):
            for b in range(a, len(rows)):
                j = rows[b]
                v = np.dot(weighted[a], mats[b])
                g[i][j] += v
                if i != j:
                    g[j][i] += v
    return [[Fraction(x) for x in row] for row in g]


# ---------------------------------------------------------------------------
# Explicit realisation (oracle)


def realize(term):
    """The term as an explicit polynomial in rotations 1..N (tensor-valued for M2)."""
    total = None
    for pc in term.pieces():
        fields = [rotate_to_field(s.tensor, j + 1) for j, s in enumerate(pc.assign)]
        val = pc.op.apply(*fields)
        if pc.coef != 1:
            val = val.scale(pc.coef) if isinstance(val, SymTensor) else val * pc.coef
        total = val if total is None else total + val
    return total


def _inner_realized(a, b):
    if isinstance(a, SymTensor):
        acc = OrientPoly()
        for mu in sym_indices(a.order):
            x, y = a.coeff(mu), b.coeff(mu)
            if isinstance(x, int) or isinstance(y, int):
                if x == 0 or y == 0:
                    continue
            acc = acc + (x * y) * Fraction(1, multinomial(mu))
        return acc
    return a * b


def gram_matrix_haar(terms):
    """Gram matrix from explicit polynomials and exact Haar integrals."""
    reals = [realize(t) for t in terms]
    n = len(terms)
    g = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            v = haar_integral_all(_as_poly(_inner_realized(reals[i], reals[j])))
            g[i][j] = g[j][i] = Fraction(v)
    return g


def _as_poly(x):
    return x if isinstance(x, OrientPoly) else OrientPoly.const(x)


# ---------------------------------------------------------------------------
# Certificates


@dataclass
class GramCertificate:
    terms: list
    gram: list
    rank: int
    expected: int
    method: str = "schur"
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.rank == self.expected

    def is_diagonal(self) -> bool:
        return all(self.gram[i][j] == 0 for i in range(len(self.gram)) for j in range(len(self.gram)) if i != j)


def _within_caps(terms, caps) -> bool:
    for t in terms:
        if getattr(t, "k", 0) > caps["k"]:
            return False
        for pc in t.pieces():
            if any(s.order > caps["n"] + caps["k"] for s in pc.assign):
                return False
        if t.nvars > caps["cluster"]:
            return False
    return True


def certify(terms, method: str = "schur", expected: int | None = None, caps=None):
    """Exact Gram certificate; passes iff the rank equals the term count."""
    terms = list(terms)
    caps = dict(DEFAULT_CAPS if caps is None else caps)
    exp = len(terms) if expected is None else expected
    if not _within_caps(terms, caps):
        warnings.warn("term list exceeds certification caps; certificate skipped", stacklevel=2)
        return GramCertificate(terms, [], -1, exp, method, ["skipped: beyond caps"])
    if method == "schur":
        g = gram_matrix(terms)
    elif method == "haar":
        g = gram_matrix_haar(terms)
    else:
        raise ValueError(f"unknown method {method!r}")
    r = _linalg.rank(g) if g else 0
    return GramCertificate(terms, g, r, exp, method)


def span_rank(terms) -> int:
    return _linalg.rank(gram_matrix(terms)) if terms else 0


def augmented_rank_check(retained, excluded):
    """(rank of retained, rank of retained plus excluded)."""
    g = gram_matrix(list(retained) + list(excluded))
    nr = len(retained)
    sub = [row[:nr] for row in g[:nr]]
    return (_linalg.rank(sub) if nr else 0), _linalg.rank(g)
