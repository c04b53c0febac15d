"""Partial contractions of symmetric traceless tensors.

``pdot(u, v, p)`` contracts ``p`` index pairs and symmetrises the rest;
``pcross(u, v, p)`` additionally joins one index of each through the
Levi-Civita symbol. Both have a fast path on generating polynomials:

    pdot  : (r-p)!(m-p)!/(r! m!)       * sum_I  d_I P_U  d_I P_V
    pcross: (r-p-1)!(m-p-1)!/(r! m!)   * sum_I  x . (grad d_I P_U  x  grad d_I P_V)

with the sum over ordered index tuples ``I`` of length ``p``. Dense
brute-force versions are kept as oracles.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .exactscalar import double_factorial
from .tensors import (
    SymTensor,
    build_basis_W,
    identity_power,
    multinomial,
    sym_indices,
    sym_product,
    symmetrize,
    to_dense,
    unit,
)


def levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3), dtype=object)
    for i, j, k in itertools.permutations(range(3)):
        sign = 1
        perm = [i, j, k]
        for a in range(3):
            for b in range(a + 1, 3):
                if perm[a] > perm[b]:
                    sign = -sign
        eps[i, j, k] = sign
    eps[eps == None] = 0  # noqa: E711
    return eps


EPS = levi_civita()


def _check_p(r, m, p, cross):
    hi = min(r, m) - (1 if cross else 0)
    if p < 0 or p > hi:
        raise ValueError(f"p={p} out of range 0..{hi} for orders ({r}, {m})")


def pdot(u: SymTensor, v: SymTensor, p: int) -> SymTensor:
    r, m = u.order, v.order
    _check_p(r, m, p, False)
    out = SymTensor.zero(r + m - 2 * p)
    for alpha in sym_indices(p):
        du = u.derivative(alpha)
        if du.is_zero():
            continue
        dv = v.derivative(alpha)
        if dv.is_zero():
            continue
        out = out + sym_product(du, dv).scale(multinomial(alpha))
    return out.scale(Fraction(factorial(r - p) * factorial(m - p), factorial(r) * factorial(m)))


def _grad(t: SymTensor):
    return [t.derivative(tuple(int(i == a) for i in range(3))) for a in range(3)]


def pcross(u: SymTensor, v: SymTensor, p: int) -> SymTensor:
    r, m = u.order, v.order
    _check_p(r, m, p, True)
    k = r + m - 2 * p - 1
    out = SymTensor.zero(k)
    for alpha in sym_indices(p):
        du = u.derivative(alpha)
        dv = v.derivative(alpha)
        if du.is_zero() or dv.is_zero():
            continue
        gu, gv = _grad(du), _grad(dv)
        acc = SymTensor.zero(k)
        for c in range(3):
            a, b = (c + 1) % 3, (c + 2) % 3
            cross_c = sym_product(gu[a], gv[b]) - sym_product(gu[b], gv[a])
            if not cross_c.is_zero():
                acc = acc + sym_product(cross_c, unit(c))
        out = out + acc.scale(multinomial(alpha))
    return out.scale(Fraction(factorial(r - p - 1) * factorial(m - p - 1), factorial(r) * factorial(m)))


def pdot_dense(u: SymTensor, v: SymTensor, p: int) -> SymTensor:
    """Oracle: contract the last p axes of each dense tensor and symmetrise."""
    r, m = u.order, v.order
    _check_p(r, m, p, False)
    a, b = to_dense(u), to_dense(v)
    res = np.tensordot(a, b, axes=(list(range(r - p, r)), list(range(m - p, m))))
    return symmetrize(np.asarray(res, dtype=object))


def pcross_dense(u: SymTensor, v: SymTensor, p: int) -> SymTensor:
    """Oracle: eps_{a b nu} U_{a I J} V_{b I K}, symmetrised over (J, K, nu)."""
    r, m = u.order, v.order
    _check_p(r, m, p, True)
    a, b = to_dense(u), to_dense(v)
    letters = iter(string.ascii_letters)
    za, zb, nu = next(letters), next(letters), next(letters)
    shared = [next(letters) for _ in range(p)]
    ju = [next(letters) for _ in range(r - p - 1)]
    kv = [next(letters) for _ in range(m - p - 1)]
    sub_u = za + "".join(shared) + "".join(ju)
    sub_v = zb + "".join(shared) + "".join(kv)
    out = "".join(ju) + "".join(kv) + nu
    res = np.einsum(f"{za}{zb}{nu},{sub_u},{sub_v}->{out}", EPS, a, b)
    return symmetrize(np.asarray(res, dtype=object))


def a_coeff(r: int, m: int, p: int, l: int) -> Fraction:
    """Weight of i^l (U .^{p+l} V) in the traceless completion of U .^p V."""
    s = r + m - 2 * p
    num = factorial(r - p) * factorial(m - p) * double_factorial(2 * s - 1 - 2 * l)
    den = factorial(l) * factorial(r - p - l) * factorial(m - p - l) * double_factorial(2 * s - 1)
    return Fraction((-1) ** l * num, den)


def b_coeff(r: int, m: int, p: int, l: int) -> Fraction:
    """Weight of i^l (U x^{p+l} V) in the traceless completion of U x^p V."""
    s = r + m - 2 * p
    num = factorial(r - p - 1) * factorial(m - p - 1) * double_factorial(2 * s - 3 - 2 * l)
    den = factorial(l) * factorial(r - p - l - 1) * factorial(m - p - l - 1) * double_factorial(2 * s - 3)
    return Fraction((-1) ** l * num, den)


def traceless_pdot(u: SymTensor, v: SymTensor, p: int) -> SymTensor:
    r, m = u.order, v.order
    out = pdot(u, v, p)
    for l in range(1, min(r, m) - p + 1):
        out = out + sym_product(identity_power(l), pdot(u, v, p + l)).scale(a_coeff(r, m, p, l))
    out._traceless = True
    return out


def traceless_pcross(u: SymTensor, v: SymTensor, p: int) -> SymTensor:
    r, m = u.order, v.order
    out = pcross(u, v, p)
    for l in range(1, min(r, m) - p):
        out = out + sym_product(identity_power(l), pcross(u, v, p + l)).scale(b_coeff(r, m, p, l))
    out._traceless = True
    return out


# ---------------------------------------------------------------------------
# Scalar contraction networks

_PAIRS3 = ((0, 1), (0, 2), (1, 2))
_PAIRS4 = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


class PatternError(ValueError):
    """Contraction counts inconsistent with the tensor orders."""


@dataclass(frozen=True)
class ContractionPattern:
    """Pair counts l_ij (i < j, lexicographic) and an optional epsilon triple.

    ``tau`` lists 1-based slot numbers, e.g. ``(1, 2, 4)``.
    """

    l: tuple
    tau: tuple | None = None

    @property
    def nslots(self) -> int:
        return 3 if len(self.l) == 3 else 4

    def pairs(self):
        return _PAIRS3 if len(self.l) == 3 else _PAIRS4

    def pair_counts(self) -> dict:
        return {pr: c for pr, c in zip(self.pairs(), self.l)}

    def slot_loads(self):
        n = self.nslots
        load = [0] * n
        for (a, b), c in zip(self.pairs(), self.l):
            load[a] += c
            load[b] += c
        if self.tau:
            for t in self.tau:
                load[t - 1] += 1
        return load

    def check(self, orders):
        if len(orders) != self.nslots:
            raise PatternError(f"pattern expects {self.nslots} tensors, got {len(orders)}")
        if any(x < 0 for x in self.l):
            raise PatternError("pair counts must be nonnegative")
        if self.tau is not None:
            if len(self.tau) != 3 or len(set(self.tau)) != 3 or not all(1 <= t <= self.nslots for t in self.tau):
                raise PatternError(f"bad epsilon triple {self.tau}")
        loads = self.slot_loads()
        if list(loads) != list(orders):
            raise PatternError(f"pattern {self} contracts {loads} indices but orders are {list(orders)}")


def a3_pattern(orders, eps: bool = False) -> ContractionPattern:
    """The forced pair counts for a triple contraction."""
    n1, n2, n3 = orders
    b = 1 if eps else 0
    K = n1 + n2 + n3
    if eps:
        if min(orders) < 1 or K % 2 == 0 or any(K < 2 * n + 1 for n in orders):
            raise PatternError(f"orders {tuple(orders)} admit no epsilon triple contraction")
    else:
        if K % 2 or any(K < 2 * n for n in orders):
            raise PatternError(f"orders {tuple(orders)} admit no plain triple contraction")
    m1, m2, m3 = n1 - b, n2 - b, n3 - b
    half = (m1 + m2 + m3) // 2
    l12, l13, l23 = half - m3, half - m2, half - m1
    return ContractionPattern((l12, l13, l23), (1, 2, 3) if eps else None)


def network_subscripts(orders, pattern: ContractionPattern):
    """Einsum subscripts (one string per tensor, plus the epsilon string)."""
    letters = iter(string.ascii_letters)
    subs = [[] for _ in orders]
    eps_sub = None
    if pattern.tau:
        eps_sub = ""
        for t in pattern.tau:
            c = next(letters)
            subs[t - 1].append(c)
            eps_sub += c
    for (a, b), cnt in zip(pattern.pairs(), pattern.l):
        for _ in range(cnt):
            c = next(letters)
            subs[a].append(c)
            subs[b].append(c)
    return ["".join(s) for s in subs], eps_sub


def _dense_operand(u):
    if isinstance(u, np.ndarray):
        return u
    return to_dense(u)


def contract_network(tensors, pattern: ContractionPattern):
    """Evaluate a scalar contraction network on dense or symmetric tensors."""
    orders = [t.ndim if isinstance(t, np.ndarray) else t.order for t in tensors]
    pattern.check(orders)
    subs, eps_sub = network_subscripts(orders, pattern)
    ops = [_dense_operand(t) for t in tensors]
    spec = ",".join(subs)
    if eps_sub is not None:
        spec = eps_sub + "," + spec
        ops = [EPS] + ops
    res = np.einsum(spec + "->", *ops, optimize="greedy")
    return res[()] if isinstance(res, np.ndarray) else res


def a3_scalar(u1, u2, u3, eps: bool = False):
    pattern = a3_pattern([u1.order, u2.order, u3.order], eps)
    return contract_network([u1, u2, u3], pattern)


def a4_scalar(u1, u2, u3, u4, pattern: ContractionPattern):
    return contract_network([u1, u2, u3, u4], pattern)


def a4_patterns(orders, eps: bool):
    """Every pattern compatible with the four orders (no selection rules)."""
    out = []
    taus = [None] if not eps else [(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)]
    for tau in taus:
        loads = [n - (1 if tau and (i + 1) in tau else 0) for i, n in enumerate(orders)]
        if min(loads) < 0:
            continue
        for l12 in range(min(loads[0], loads[1]) + 1):
            for l13 in range(min(loads[0] - l12, loads[2]) + 1):
                l14 = loads[0] - l12 - l13
                if l14 < 0 or l14 > loads[3]:
                    continue
                # remaining: slot 2 needs loads[1]-l12 = l23 + l24, slot 3: loads[2]-l13 = l23 + l34,
                # slot 4: loads[3]-l14 = l24 + l34
                r2, r3, r4 = loads[1] - l12, loads[2] - l13, loads[3] - l14
                tot = r2 + r3 + r4
                if tot % 2:
                    continue
                half = tot // 2
                l23, l24, l34 = half - r4, half - r3, half - r2
                if min(l23, l24, l34) < 0:
                    continue
                out.append(ContractionPattern((l12, l13, l14, l23, l24, l34), tau))
    return out


# ---------------------------------------------------------------------------
# General tensor decomposition into identity/epsilon pieces


@dataclass(frozen=True)
class DecompPiece:
    """One term  delta(pairs) [eps] T  of a general tensor decomposition.

    ``delta_pairs`` are position pairs joined by Kronecker deltas. ``eps`` is
    either None, a position pair (a, b) meaning eps_{x_a x_b nu} with nu the
    first index of ``tensor``, or a position triple meaning eps on those three
    output positions. The remaining positions, in increasing order, carry the
    other indices of ``tensor``.
    """

    delta_pairs: tuple
    eps: tuple | None
    tensor: SymTensor

    def realize(self, order: int) -> np.ndarray:
        return _realize_piece(order, self.delta_pairs, self.eps, to_dense(self.tensor))


def _realize_piece(order, delta_pairs, eps, dense_t):
    letters = iter(string.ascii_letters)
    pos = [next(letters) for _ in range(order)]
    used = set()
    ops, subs = [], []
    delta = np.eye(3, dtype=object) * 1
    for a, b in delta_pairs:
        ops.append(delta)
        subs.append(pos[a] + pos[b])
        used.update((a, b))
    tsub = ""
    if eps is not None and len(eps) == 2:
        nu = next(letters)
        ops.append(EPS)
        subs.append(pos[eps[0]] + pos[eps[1]] + nu)
        used.update(eps)
        tsub = nu
    elif eps is not None:
        ops.append(EPS)
        subs.append("".join(pos[e] for e in eps))
        used.update(eps)
    rest = [i for i in range(order) if i not in used]
    tsub += "".join(pos[i] for i in rest)
    ops.append(dense_t)
    subs.append(tsub)
    return np.einsum(",".join(subs) + "->" + "".join(pos), *ops)


def _pairings(positions, s):
    """All ways to choose s disjoint pairs, left-to-right greedy order."""
    if s == 0:
        yield ()
        return
    positions = list(positions)
    for i, a in enumerate(positions):
        for b in positions[i + 1:]:
            rest = [x for x in positions[i + 1:] if x != b]
            for more in _pairings([x for x in rest if x > a], s - 1):
                yield ((a, b),) + more


def _decomp_patterns(order):
    out = []
    for s in range(order // 2 + 1):
        for pairs in _pairings(range(order), s):
            used = {x for pr in pairs for x in pr}
            rest = [i for i in range(order) if i not in used]
            out.append((pairs, None, len(rest)))
            for e in itertools.combinations(rest, 2):
                out.append((pairs, e, len(rest) - 2 + 1))
            for e in itertools.combinations(rest, 3):
                out.append((pairs, e, len(rest) - 3))
    return out


MAX_DECOMP_ORDER = 5


def decompose_general(x) -> list:
    """Write a dense tensor as a sum of delta/epsilon-wired traceless tensors."""
    x = np.asarray(x, dtype=object)
    order = x.ndim
    if order > MAX_DECOMP_ORDER:
        raise ValueError(f"decomposition supports order <= {MAX_DECOMP_ORDER}")
    if order == 0:
        return [DecompPiece((), None, SymTensor.scalar(x[()]))]
    target = [Fraction(v) for v in x.ravel()]
    cols, labels = [], []
    for pairs, eps, torder in _decomp_patterns(order):
        for j, w in enumerate(build_basis_W(torder)):
            col = _realize_piece(order, pairs, eps, to_dense(w)).ravel()
            cols.append([Fraction(v) for v in col])
            labels.append((pairs, eps, torder, j))
    coeffs = _solve_columns(cols, target)
    grouped = {}
    for (pairs, eps, torder, j), c in zip(labels, coeffs):
        if c == 0:
            continue
        key = (pairs, eps, torder)
        t = build_basis_W(torder)[j].scale(c)
        grouped[key] = grouped[key] + t if key in grouped else t
    pieces = [DecompPiece(pairs, eps, t) for (pairs, eps, _), t in grouped.items() if not t.is_zero()]
    if not np.all(reconstruct(pieces, order) == x):
        raise ArithmeticError("decomposition failed to reconstruct its input")
    return pieces


def reconstruct(pieces, order: int) -> np.ndarray:
    total = np.zeros((3,) * order, dtype=object)
    total[...] = Fraction(0)
    for pc in pieces:
        total = total + pc.realize(order)
    return total


def _solve_columns(cols, target):
    """Exact coefficients c with sum c_j col_j = target.

    A floating-point pivoted QR proposes a square independent subset and a
    candidate solution; the candidate is rationalised and checked exactly,
    with an exact elimination as fallback.
    """
    from scipy.linalg import lstsq, qr

    from . import _linalg

    a = np.array([[float(v) for v in c] for c in cols]).T  # rows: components
    b = np.array([float(v) for v in target])
    _, r, piv = qr(a, pivoting=True, mode="economic")
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > 1e-9 * max(diag.max(), 1.0)))
    chosen = sorted(piv[:rank].tolist())
    sol, *_ = lstsq(a[:, chosen], b)
    cand = [Fraction(float(s)).limit_denominator(10**7) for s in sol]
    coeffs = [Fraction(0)] * len(cols)
    for j, c in zip(chosen, cand):
        coeffs[j] = c
    if _combine(cols, coeffs) == target:
        return coeffs
    rows = [list(r_) for r_ in zip(*[cols[j] for j in chosen])]
    exact = _linalg.solve(rows, target)
    coeffs = [Fraction(0)] * len(cols)
    for j, c in zip(chosen, exact):
        coeffs[j] = c
    return coeffs


def _combine(cols, coeffs):
    n = len(cols[0])
    out = [Fraction(0)] * n
    for col, c in zip(cols, coeffs):
        if c == 0:
            continue
        for i, v in enumerate(col):
            if v:
                out[i] += c * v
    return out
