import itertools

import numpy as np
import pytest

from symexpand.contract import ContractionPattern
from symexpand.so3poly import OrientPoly
from symexpand.tensors import SymTensor, random_traceless
from symexpand.terms import (
    A3Term,
    A4Term,
    M2Term,
    TensorSlot,
    a4_candidates,
    a4_selected,
    augmented_rank_check,
    basis_slot,
    certify,
    enum_m2,
    enum_m2_raw,
    enum_m3,
    enum_m3_fixed,
    enum_m4,
    gram_matrix,
    gram_matrix_haar,
    m2_swap_partner_set,
    orth_basis_m2,
    raw_count,
    realize,
)


def _swap(x):
    if isinstance(x, SymTensor):
        return SymTensor(x.order, {k: _swap(c) for k, c in x.coeffs.items()})
    return x.rename({1: 2, 2: 1}) if isinstance(x, OrientPoly) else x


def test_m2_zeroth_order_examples():
    terms = enum_m2(0, 1)
    w = basis_slot(1, 0)
    assert M2Term(0, 1, "dot", w, w, 1) in terms
    assert M2Term(0, 0, "dot", basis_slot(0, 0), basis_slot(0, 0), 1) in terms
    assert all(t.k == 0 for t in terms)


def test_m2_first_order_families():
    terms = enum_m2(1, 2)
    dot_anti = {(t.u.order, t.v.order) for t in terms if t.kind == "dot" and t.swap_sign == -1 and t.p == t.u.order}
    cross_sym = {(t.u.order, t.v.order) for t in terms if t.kind == "cross" and t.swap_sign == 1 and t.q == 0
                 and t.u.order == t.v.order}
    assert {(0, 1), (1, 2)} <= dot_anti
    assert {(1, 1), (2, 2)} <= cross_sym


@pytest.mark.parametrize("k", range(5))
@pytest.mark.parametrize("m", range(4))
def test_m2_raw_count(k, m):
    assert len(enum_m2_raw(k, basis_slot(m, 0))) == raw_count(k, m) == (2 * m + 1) * (k + 1) * (k + 2) // 2


def test_orthogonal_basis_diagonal_and_positive():
    c = certify(orth_basis_m2(1, 2))
    assert c.passed and c.is_diagonal()
    assert all(c.gram[i][i] > 0 for i in range(len(c.gram)))


def test_orthogonal_basis_same_pair_different_q():
    terms = [t for t in orth_basis_m2(4, 2) if t.u == basis_slot(2, 0) and t.v == basis_slot(2, 0)]
    assert len({t.q for t in terms}) > 1
    g = gram_matrix(terms)
    assert all(g[i][j] == 0 for i in range(len(g)) for j in range(len(g)) if i != j)


def test_schur_gram_matches_explicit_haar_integration():
    for terms in (enum_m2(1, 1), orth_basis_m2(2, 1)[:6]):
        assert gram_matrix(terms) == gram_matrix_haar(terms)
    three = enum_m3(1)[:6]
    assert gram_matrix(three) == gram_matrix_haar(three)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_swap_sets_orthogonal(k):
    plus, minus = m2_swap_partner_set(k, 2, 1), m2_swap_partner_set(k, 2, -1)
    g = gram_matrix(plus + minus)
    n = len(plus)
    assert all(g[i][j] == 0 for i in range(n) for j in range(n, len(g)))


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_swap_covariance(k):
    for t in enum_m2(k, 1)[:8]:
        a = realize(t)
        want = a if k % 2 == 0 else a.scale(-1)
        assert _swap(a) == want


def test_m3_examples():
    terms = enum_m3(1)
    assert not any(t.orders == (1, 1, 1) and not t.eps for t in terms)
    eps111 = [t for t in terms if t.eps and t.orders == (1, 1, 1)]
    assert len(eps111) == 1 and len(set(eps111[0].slots)) == 3
    assert all(len(set(t.slots)) == 3 for t in terms if t.eps)


def test_m3_fixed_count_and_rank():
    fixed = enum_m3_fixed(basis_slot(1, 0), basis_slot(1, 2))
    assert len(fixed) == 9
    assert certify(fixed).rank == 9
    fixed = enum_m3_fixed(basis_slot(2, 0), basis_slot(1, 1))
    assert len(fixed) == 15 and certify(fixed).passed


def test_m4_distinct_negative_d_limits_l12():
    rng = np.random.default_rng(0)
    slots = [TensorSlot(n, random_traceless(o, rng)) for n, o in zip("ABCD", (2, 2, 3, 3))]
    cands, case = a4_candidates(slots)
    assert case == "distinct"
    kept = [t for t in cands if t.pattern.tau is None and a4_selected(t.pattern, t.orders, case)]
    assert kept and all(t.pattern.l[0] <= 1 for t in kept)
    assert any(t.pattern.l[0] > 1 for t in cands if t.pattern.tau is None)


def test_m4_triple_examples():
    from symexpand.suites import m4_selection

    rng = np.random.default_rng(1)
    assert m4_selection(3, rng)[0] == [(0, 0, 3), (1, 1, 1)]
    assert m4_selection(1, rng)[0] == [(1, 1, 2)]


def _shapes():
    for names in ("ABCD", "AABC", "AABB", "AAAB", "AAAA"):
        distinct = sorted(set(names))
        for orders in itertools.product(range(4), repeat=len(distinct)):
            full = [orders[distinct.index(c)] for c in names]
            if sum(full) <= 6:
                yield names, dict(zip(distinct, orders))


def test_m4_selection_independent_and_spanning():
    rng = np.random.default_rng(2)
    for names, orders in _shapes():
        tensors = {c: TensorSlot(c, random_traceless(o, rng)) for c, o in orders.items()}
        cands, case = a4_candidates([tensors[c] for c in names])
        sel = [t for t in cands if a4_selected(t.pattern, t.orders, case)]
        exc = [t for t in cands if t not in sel]
        r1, r2 = augmented_rank_check(sel, exc)
        assert r1 == r2 == len(sel), (names, orders)


def test_enum_m4_small():
    terms = enum_m4(1)
    assert terms and all(isinstance(t, A4Term) for t in terms)
    assert certify(terms).passed


def test_planted_dependency_fails_certificate():
    u, v = basis_slot(1, 0), basis_slot(2, 1)
    a = M2Term(0, 1, "dot", u, v, -1)
    b = M2Term(0, 1, "dot", v, u, -1)  # the same function up to sign
    c = certify([a, b])
    assert not c.passed and c.rank == 1


def test_planted_relation_fails_certificate():
    rng = np.random.default_rng(3)
    qs = [TensorSlot(n, random_traceless(2, rng)) for n in "PQRS"]
    lhs = [A4Term(tuple(qs), ContractionPattern(l), False) for l in
           [(1, 1, 0, 0, 1, 1), (1, 0, 1, 1, 0, 1), (0, 1, 1, 1, 1, 0)]]
    rhs = [A4Term(tuple(qs), ContractionPattern(l), False) for l in
           [(2, 0, 0, 0, 0, 2), (0, 2, 0, 0, 2, 0), (0, 0, 2, 2, 0, 0)]]
    c = certify(lhs + rhs)
    assert c.rank < c.expected


def test_certificate_skips_beyond_caps():
    with pytest.warns(UserWarning):
        c = certify(enum_m2(5, 1))
    assert c.rank == -1 and "skipped" in c.notes[0]


def test_a3_term_labels():
    t = A3Term((basis_slot(1, 0), basis_slot(1, 1), basis_slot(1, 2)), True)
    assert t.label() == "sum_sigma a3(W1_0, W1_1, W1_2; 0,0,0;(123))"
