from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symexpand.contract import (
    ContractionPattern,
    PatternError,
    a3_pattern,
    a3_scalar,
    a4_patterns,
    a4_scalar,
    a_coeff,
    decompose_general,
    pcross,
    pcross_dense,
    pdot,
    pdot_dense,
    reconstruct,
    traceless_pcross,
    traceless_pdot,
)
from symexpand.tensors import (
    SymTensor,
    identity,
    monomial,
    random_symmetric,
    random_traceless,
    to_dense,
    trace,
    traceless_project,
    unit,
)

F = Fraction
seeds = st.integers(0, 10 ** 6)
m1, m2, m3 = unit(0), unit(1), unit(2)
Q1 = traceless_project(monomial((2, 0, 0)))


def test_pdot_examples():
    assert pdot(m1, m1, 1) == SymTensor.scalar(1)
    assert pdot(m1, m1, 0) == monomial((2, 0, 0))
    w = pdot(Q1, monomial((0, 1, 1)), 1)
    assert w == pdot_dense(Q1, monomial((0, 1, 1)), 1)
    assert w.component((1, 2)) == F(-1, 6) and w == monomial((0, 1, 1)).scale(F(-1, 3))
    with pytest.raises(ValueError):
        pdot(m1, m1, 2)


def test_pcross_examples():
    assert pcross(m1, m1, 0).is_zero()
    assert pcross(m1, m2, 0) == m3
    a, b = Q1, monomial((0, 1, 1))
    assert pcross(a, b, 1) == pcross_dense(a, b, 1)
    with pytest.raises(ValueError):
        pcross(m1, m2, 1)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(0, 3), st.integers(0, 3), st.data())
def test_fast_paths_match_dense(seed, r, m, data):
    rng = np.random.default_rng(seed)
    u, v = random_symmetric(r, rng), random_symmetric(m, rng)
    p = data.draw(st.integers(0, min(r, m)))
    assert pdot(u, v, p) == pdot_dense(u, v, p)
    assert pdot(u, v, p) == pdot(v, u, p)
    if p <= min(r, m) - 1:
        assert pcross(u, v, p) == pcross_dense(u, v, p)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_bilinearity(seed, r, m):
    rng = np.random.default_rng(seed)
    u, u2, v = random_symmetric(r, rng), random_symmetric(r, rng), random_symmetric(m, rng)
    c = F(int(rng.integers(-4, 5)), 3)
    for p in range(min(r, m)):
        assert pdot(u + u2.scale(c), v, p) == pdot(u, v, p) + pdot(u2, v, p).scale(c)
        assert pcross(u + u2.scale(c), v, p) == pcross(u, v, p) + pcross(u2, v, p).scale(c)


def test_pcross_repeated_symmetric_argument_vanishes():
    rng = np.random.default_rng(1)
    for r in range(1, 4):
        u = random_traceless(r, rng)
        assert pcross(u, u, r - 1).is_zero()


def test_traceless_pdot_examples():
    assert a_coeff(1, 1, 0, 1) == F(-1, 3)
    assert traceless_pdot(m1, m1, 0) == Q1
    rng = np.random.default_rng(2)
    u, v = random_traceless(2, rng), random_traceless(3, rng)
    assert traceless_pdot(u, v, 2) == pdot(u, v, 2)
    assert trace(traceless_pdot(u, random_traceless(2, rng), 0)).is_zero()


def test_traceless_pcross_examples():
    assert traceless_pcross(m1, m2, 0) == pcross(m1, m2, 0)
    rng = np.random.default_rng(3)
    a, b = random_traceless(2, rng), random_traceless(2, rng)
    assert trace(traceless_pcross(a, b, 0)).is_zero()
    c = random_traceless(3, rng)
    assert traceless_pcross(c, a, 0) == traceless_project(pcross(c, a, 0))


def test_traceless_completions_are_traceless():
    rng = np.random.default_rng(4)
    for r in range(1, 5):
        for m in range(1, 5):
            u, v = random_traceless(r, rng), random_traceless(m, rng)
            for p in range(min(r, m) + 1):
                t = traceless_pdot(u, v, p)
                assert t.order < 2 or trace(t).is_zero()
                assert t == traceless_project(pdot(u, v, p))
            for p in range(min(r, m)):
                t = traceless_pcross(u, v, p)
                assert t.order < 2 or trace(t).is_zero()


def test_a3_examples():
    rng = np.random.default_rng(5)
    u, v = random_traceless(1, rng), random_traceless(1, rng)
    s = SymTensor.scalar(F(7, 2))
    assert a3_scalar(u, v, s) == F(7, 2) * pdot(u, v, 1).coeff((0, 0, 0))
    assert a3_scalar(m1, m2, m3, eps=True) == 1
    w = random_traceless(2, rng)
    assert a3_scalar(w, w, random_traceless(1, rng), eps=True) == 0


def test_a3_pattern_errors():
    with pytest.raises(PatternError):
        a3_pattern((1, 1, 1))
    with pytest.raises(PatternError):
        a3_pattern((4, 1, 1))
    with pytest.raises(PatternError):
        a3_pattern((1, 1, 0), eps=True)
    assert a3_pattern((2, 2, 2)).l == (1, 1, 1)
    assert a3_pattern((2, 2, 1), eps=True).l == (1, 0, 0)


def test_a3_permutation_signs():
    rng = np.random.default_rng(6)
    a, b, c = random_traceless(2, rng), random_traceless(2, rng), random_traceless(1, rng)
    assert a3_scalar(a, b, random_traceless(2, rng)) is not None
    assert a3_scalar(a, b, c, eps=True) == -a3_scalar(b, a, c, eps=True)
    x = random_traceless(2, rng)
    assert a3_scalar(a, b, x) == a3_scalar(x, a, b)


def test_a4_examples():
    s = [SymTensor.scalar(F(n)) for n in (2, 3, 5, 7)]
    assert a4_scalar(*s, ContractionPattern((0,) * 6)) == 210
    assert a4_scalar(m1, m1, m2, m2, ContractionPattern((1, 0, 0, 0, 0, 1))) == 1
    rng = np.random.default_rng(7)
    qs = [random_traceless(2, rng) for _ in range(4)]
    d = [to_dense(q) for q in qs]
    want = np.trace(d[0].dot(d[2]).dot(d[1]).dot(d[3]))
    assert a4_scalar(*qs, ContractionPattern((0, 1, 1, 1, 1, 0))) == want


def test_a4_pattern_check():
    with pytest.raises(PatternError):
        a4_scalar(m1, m1, m2, m2, ContractionPattern((1, 0, 0, 0, 1, 0)))
    pats = a4_patterns((1, 1, 1, 1), eps=False)
    assert sorted(p.l for p in pats) == [(0, 0, 1, 1, 0, 0), (0, 1, 0, 0, 1, 0), (1, 0, 0, 0, 0, 1)]


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_a4_multilinear(seed):
    rng = np.random.default_rng(seed)
    pat = ContractionPattern((1, 0, 1, 1, 0, 1))
    ts = [random_traceless(2, rng) for _ in range(4)]
    extra = random_traceless(2, rng)
    for slot in range(4):
        alt = list(ts)
        alt[slot] = ts[slot] + extra
        other = list(ts)
        other[slot] = extra
        assert a4_scalar(*alt, pat) == a4_scalar(*ts, pat) + a4_scalar(*other, pat)


def test_decompose_examples():
    rng = np.random.default_rng(9)
    u = random_traceless(3, rng)
    pieces = decompose_general(to_dense(u))
    assert len(pieces) == 1 and pieces[0].tensor == u and not pieces[0].delta_pairs
    pieces = decompose_general(to_dense(identity()))
    assert len(pieces) == 1 and pieces[0].delta_pairs and pieces[0].tensor == SymTensor.scalar(1)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_decompose_round_trip(order):
    rng = np.random.default_rng(order)
    x = np.array([F(int(v), int(d)) for v, d in zip(rng.integers(-5, 6, 3 ** order), rng.integers(1, 4, 3 ** order))],
                 dtype=object).reshape((3,) * order)
    pieces = decompose_general(x)
    assert np.all(reconstruct(pieces, order) == x)
    assert all(p.tensor.order < 2 or trace(p.tensor).is_zero() for p in pieces)


def test_decompose_order_cap():
    with pytest.raises(ValueError):
        decompose_general(np.zeros((3,) * 6, dtype=object))
