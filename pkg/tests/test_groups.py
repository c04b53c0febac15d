from fractions import Fraction
from math import comb

import numpy as np
import pytest

from symexpand.groups import (
    GroupCapError,
    GroupError,
    InapplicableError,
    IDENTITY,
    invariant_space_avg,
    invariant_space_closed_form,
    is_invariant,
    parse_group,
    realize,
    rot_axis1,
    same_span,
    span_rank,
    tilde_poly,
    type_split,
    typed_basis,
)
from symexpand.so3poly import euler_matrix
from symexpand.suites import TYPE_TABLE_GOLDEN, closed_form_matches
from symexpand.tensors import (
    SymTensor,
    apply_rotation,
    dot,
    format_tensor,
    identity,
    monomial,
    sym_product,
    traceless_project,
    unit,
)

FINITE_EXACT = ["C1", "C2", "C3", "C4", "C6", "D2", "D3", "D4", "D6", "T", "O", "I"]


def g(name):
    return realize(parse_group(name))


@pytest.mark.parametrize("name,order", [("C1", 1), ("C4", 4), ("C6", 6), ("D3", 6), ("D4", 8), ("T", 12),
                                        ("O", 24), ("I", 60)])
def test_group_orders(name, order):
    r = g(name)
    assert r.order == order and r.exact


def test_closure_under_multiplication():
    for name in ("D3", "T", "O"):
        els = set(g(name).elements)
        assert all(a @ b in els for a in els for b in els)


def test_c4_is_generated_by_quarter_turn():
    r = g("C4")
    assert r.generators == [rot_axis1(1, 2)] and all(s.exact for s in r.elements)


def test_td_coset_completes_octahedral_group():
    r = g("Td")
    assert r.k == rot_axis1(1, 2)
    union = set(r.elements) | {s @ r.k for s in r.elements}
    assert union == set(g("O").elements) and len(union) == 24


@pytest.mark.parametrize("name", ["C2v", "C3v", "C4h", "C3h", "S4", "S6", "D2d", "D3d", "D3h", "D6h", "Td", "Th",
                                  "Oh", "Ci", "Cs"])
def test_conjugation_by_improper_representative_stays_proper(name):
    r = g(name)
    els = set(r.elements)
    k = r.k
    assert k is not None and k.proper
    assert all(k @ s @ k in els for s in els)


def test_non_crystallographic_groups_fall_back_to_floats():
    r = g("C5")
    assert not r.exact and r.order == 5


@pytest.mark.parametrize("bad", ["Q7", "C0", "S3", "D2x", "", "Tdh"])
def test_parse_errors(bad):
    with pytest.raises(GroupError):
        parse_group(bad)


def test_parse_names_round_trip():
    for name in ("C2v", "S4", "D3h", "Cinfv", "Dinfh", "Ih", "C6"):
        assert parse_group(name).name == name
    assert parse_group("Ci").name == "S2"


def test_invariant_space_examples():
    assert len(invariant_space_avg(g("C1"), 2)) == 5
    c2 = invariant_space_avg(g("C2"), 1)
    assert same_span(c2, [unit(0)])
    t3 = invariant_space_avg(g("T"), 3)
    assert len(t3) == 1 and same_span(t3, [traceless_project(monomial((1, 1, 1)))])


def test_closed_form_examples():
    for l in range(7):
        assert len(invariant_space_closed_form(parse_group("Cinf"), l)) == 1
        assert len(invariant_space_closed_form(parse_group("Dinf"), l)) == (0 if l % 2 else 1)
    assert invariant_space_closed_form(parse_group("O"), 2) == []
    assert invariant_space_avg(g("O"), 2) == []
    with pytest.raises(GroupCapError):
        invariant_space_closed_form(parse_group("O"), 7)


@pytest.mark.parametrize("name", FINITE_EXACT)
def test_closed_form_matches_averaging(name):
    for order in range(5):
        ok, dim = closed_form_matches(name, order)
        assert ok, (name, order, dim)


def test_icosahedral_order_six():
    ok, dim = closed_form_matches("I", 6)
    assert ok and dim == 1


@pytest.mark.parametrize("name", FINITE_EXACT + ["C5", "D5", "Cinf", "Dinf"])
def test_closed_forms_invariant_at_generators(name):
    r = g(name)
    gens = r.generators or [IDENTITY]
    for l in range(5):
        for nt in invariant_space_closed_form(r.spec, l):
            assert all(is_invariant(nt.tensor, s) for s in gens)
            if r.elements is None:
                assert all(is_invariant(nt.tensor, s) for s in r.sample_elements())
                assert all(is_invariant(nt.tensor, s) for s in r.exact_subgroup_elements())


def test_tilde_examples():
    y, z = unit(1), monomial((0, 2, 0)) + monomial((0, 0, 2))
    assert tilde_poly("T", 2, 0, y, z) == monomial((0, 2, 0)).scale(2) - z
    assert tilde_poly("U", 1, 0, y, z) == y.scale(2)
    p2 = tilde_poly("P", 2, 0, unit(0), identity())
    assert same_span([traceless_project(p2)], [traceless_project(monomial((2, 0, 0)))])
    assert p2 == monomial((2, 0, 0)).scale(Fraction(3, 2)) - identity().scale(Fraction(1, 2))


@pytest.mark.parametrize("n", range(1, 8))
def test_chebyshev_identity_for_complex_power(n):
    # (m2 + i m3)^n = T~_n(m2, z) + i U~_{n-1}(m2, z) m3 with z = m2^2 + m3^2
    y, z = unit(1), monomial((0, 2, 0)) + monomial((0, 0, 2))
    real = SymTensor(n, {(0, n - 2 * j, 2 * j): comb(n, 2 * j) * (-1) ** j for j in range(n // 2 + 1)})
    imag = SymTensor(n, {(0, n - 2 * j - 1, 2 * j + 1): comb(n, 2 * j + 1) * (-1) ** j for j in range((n - 1) // 2 + 1)})
    assert tilde_poly("T", n, 0, y, z) == real
    assert sym_product(tilde_poly("U", n - 1, 0, y, z), unit(2)) == imag


@pytest.mark.parametrize("name", ["C2v", "S4"])
def test_type_table_examples(name):
    rows = [(format_tensor(e.tensor), e.type_sign) for e in typed_basis(parse_group(name), 2)]
    assert [s for _, s in rows] == [s for _, s in TYPE_TABLE_GOLDEN[name]]
    assert len(rows) == 5


@pytest.mark.parametrize("name", ["D2h", "Oh", "Ih", "C2h", "Dinfh", "Th"])
def test_inversion_groups_have_no_minus_space(name):
    spec = parse_group(name)
    for l in range(5):
        assert type_split(spec, l).basis_minus == []


@pytest.mark.parametrize("name", ["C2v", "S4", "C3v", "D3h", "D2d", "Td", "C3h", "S6", "Cinfv"])
def test_type_split_correct(name):
    spec = parse_group(name)
    r = realize(spec)
    for l in range(5):
        sp = type_split(spec, l)
        for e in sp.entries:
            if r.k.exact:
                assert apply_rotation(e.tensor, r.k) == e.tensor.scale(e.type_sign)
            else:
                assert is_invariant(e.tensor.scale(e.type_sign), r.k)
        for a in sp.basis_plus:
            for b in sp.basis_minus:
                assert dot(a, b) == 0
        full = invariant_space_closed_form(spec, l)
        assert span_rank(sp.basis_plus + sp.basis_minus) == len(full)


def test_type_split_needs_improper_rotation():
    with pytest.raises(InapplicableError):
        type_split(parse_group("T"), 2)


def test_float_invariance_at_random_rotations():
    # the invariant tensors of C5 are invariant as fields: V(p s) = V(p)
    from symexpand.tensors import rotate_numeric

    r = g("C5")
    rng = np.random.default_rng(0)
    for nt in invariant_space_closed_form(r.spec, 3):
        for _ in range(20):
            p = euler_matrix(*rng.uniform(0, 3, 3))
            for s in r.generators:
                a = rotate_numeric(nt.tensor, (p @ s.to_numpy())[None])
                b = rotate_numeric(nt.tensor, p[None])
                assert np.allclose(a, b, atol=1e-10)
