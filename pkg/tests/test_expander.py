import pytest

from symexpand.expander import (
    ExpansionCapError,
    ExpansionRequest,
    cross_pairs,
    expand,
    format_type_table,
    parity_ok,
    raw_terms,
    render_energy,
    type_table,
    worked_example_c2v_s4,
)
from symexpand.groups import parse_group, realize
from symexpand.so3poly import OrientPoly, right_substitute
from symexpand.suites import CROSS_GOLDEN, TYPE_TABLE_GOLDEN
from symexpand.tensors import SymTensor
from symexpand.terms import A3Term, M2Term, basis_slot, realize as realize_term


def req(group, cluster=2, k=0, n=2, orth=False):
    return ExpansionRequest(parse_group(group), cluster, k, n, orth)


def _subst_all(x, nvars, s):
    if isinstance(x, SymTensor):
        return SymTensor(x.order, {kap: _subst_all(c, nvars, s) for kap, c in x.coeffs.items()})
    if not isinstance(x, OrientPoly):
        return x
    for v in range(1, nvars + 1):
        x = right_substitute(x, v, s)
    return x


def _neg(x):
    return x.scale(-1)


@pytest.mark.parametrize("name", ["C2v", "S4"])
def test_worked_example(name):
    ex = worked_example_c2v_s4()[name]
    assert [tuple(r) for r in ex["types"]] == TYPE_TABLE_GOLDEN[name]
    assert [tuple(p) for p in ex["cross_k1"]["2"]] == CROSS_GOLDEN[name]


def test_first_order_cross_family_with_vectors_is_empty_for_c2v():
    assert cross_pairs(parse_group("C2v"), 1, 1, 2) == []
    assert cross_pairs(parse_group("S4"), 2, 1, 2)


def test_type_table_text():
    text = format_type_table(type_table(parse_group("C2v"), 2))
    assert text.splitlines()[1] == "m1            -1"


@pytest.mark.parametrize("group", ["D2h", "Oh", "C2h"])
@pytest.mark.parametrize("k", [1, 3])
def test_inversion_groups_have_no_odd_gradient_terms(group, k):
    assert expand(req(group, 2, k, 4)) == []
    assert raw_terms(req(group, 2, k, 4))


def test_proper_groups_are_not_filtered():
    raw = raw_terms(req("C2", 2, 1, 2))
    assert raw and all(parity_ok(t) for t in raw)
    assert len(expand(req("C1", 2, 1, 2))) == 39


@pytest.mark.parametrize("group,cluster,k", [("C2v", 2, 1), ("S4", 2, 2), ("D3h", 2, 0), ("C3v", 3, 0),
                                             ("Td", 4, 0)])
def test_monotone_in_max_order(group, cluster, k):
    top = 3 if cluster < 4 else 2
    prev = set()
    for n in range(top + 1):
        cur = {e.rendering for e in expand(req(group, cluster, k, n))}
        assert prev <= cur
        prev = cur


def test_deterministic_ordering():
    a = [e.rendering for e in expand(req("D3h", 2, 2, 3))]
    b = [e.rendering for e in expand(req("D3h", 2, 2, 3))]
    assert a == b and len(a) == len(set(a))


def test_request_validation():
    with pytest.raises(ExpansionCapError):
        req("C2v", 5).validate()
    with pytest.raises(ExpansionCapError):
        req("C2v", 3, 1).validate()
    with pytest.raises(ExpansionCapError):
        req("C2v", 2, 5).validate()
    with pytest.raises(ExpansionCapError):
        req("C2v", 4, 0, 4).validate()
    with pytest.raises(ExpansionCapError):
        req("C2v", 3, 0, 2, True).validate()


def test_renderings():
    u, v = basis_slot(2, 0), basis_slot(2, 1)
    e = render_energy(M2Term(0, 2, "dot", u, v, 1))
    assert e.rendering == "⟨W2_0⟩_{i1,i2} ⟨W2_1⟩_{i1,i2}"
    w = basis_slot(1, 0)
    e = render_energy(M2Term(0, 1, "dot", w, u, -1))
    assert e.rendering == "⟨W1_0⟩_{i1} ∂_{j1}⟨W2_0⟩_{i1,j1}"
    assert e.structure["derivatives"] == [[], ["j1"]]
    e = render_energy(A3Term((w, basis_slot(1, 1), basis_slot(0, 0))))
    assert e.rendering == "\U0001d51e₃(⟨W1_0⟩,⟨W1_1⟩,⟨W0_0⟩; 1,0,0)"
    e = render_energy(M2Term(0, 0, "cross", w, basis_slot(1, 1), 1))
    assert e.rendering.startswith("ε_{ijk} ") and e.structure["eps"]


def test_rendering_counts_indices_consistently():
    for et in expand(req("C2v", 2, 3, 3)):
        t, st = et.term, et.structure
        du, dv = st["derivatives"]
        assert len(du) + len(dv) == t.k
        iu, iv = st["indices"]
        assert len(iu) == t.u.order and len(iv) == t.v.order


@pytest.mark.parametrize("group,cluster,k,n", [("C2v", 2, 0, 2), ("C2v", 2, 1, 2), ("S4", 2, 1, 2),
                                               ("S4", 2, 2, 2), ("D2d", 3, 0, 2)])
def test_filter_soundness(group, cluster, k, n):
    r = realize(parse_group(group))
    kept = {id(e.term) for e in expand(req(group, cluster, k, n))}
    sign = -1 if k % 2 else 1
    raw = raw_terms(req(group, cluster, k, n))
    kept_terms = [t for t in raw if parity_ok(t)]
    assert len(kept_terms) == len(kept)
    rejected = [t for t in raw if not parity_ok(t)]
    assert rejected
    for t in kept_terms[:12] + rejected[:12]:
        val = realize_term(t)
        for s in r.generators:
            assert _subst_all(val, t.nvars, s) == val
        flipped = _subst_all(val, t.nvars, r.k)
        flipped = flipped.scale(sign) if sign < 0 else flipped
        if parity_ok(t):
            assert flipped == val
        else:
            assert flipped == _neg(val)
