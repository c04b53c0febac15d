import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from symexpand import relations
from symexpand.contract import a4_scalar
from symexpand.tensors import random_traceless

seeds = st.integers(0, 10 ** 6)


def test_bump():
    assert relations.bump((0,) * 6, l12=1, l34=2) == (1, 0, 0, 0, 0, 2)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_quartic_trace_identity(seed):
    lhs, rhs = relations.random_quartic_instance(np.random.default_rng(seed))
    assert lhs == rhs


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_cyclic_cross_identity(seed):
    lhs, rhs = relations.random_cross_instance(np.random.default_rng(seed))
    assert (lhs == rhs).all()


def test_cyclic_cross_identity_on_frame():
    e = np.eye(3, dtype=int).astype(object)
    lhs, rhs = relations.cyclic_cross_identity(e[0], e[1], e[2])
    assert (lhs == 2 * e).all() and (rhs == 2 * e).all()


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_even_relation(seed):
    base, (lhs, rhs) = relations.random_even_instance(np.random.default_rng(seed))
    assert lhs == rhs


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(0, 3))
def test_odd_relations(seed, which):
    base, val = relations.random_odd_instance(np.random.default_rng(seed), which)
    assert val == 0


def test_odd_relation_is_not_trivially_zero():
    rng = np.random.default_rng(0)
    rel = relations.odd_relations((1, 0, 1, 0, 1, 0))[0]
    ts = [random_traceless(n, rng) for n in rel[0][0].slot_loads()]
    assert any(a4_scalar(*ts, pat) != 0 for pat, _ in rel)
    assert relations.odd_relation_value(rel, ts) == 0
