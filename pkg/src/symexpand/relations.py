"""Exact linear relations among four-tensor contractions, and the matrix identities behind them."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .contract import ContractionPattern, a4_scalar
from .tensors import random_traceless, to_dense

_PAIR_NAMES = ("12", "13", "14", "23", "24", "34")


def bump(l, **inc):
    """Pair counts l with increments, e.g. ``bump(l, l12=1, l34=2)``."""
    out = list(l)
    for key, v in inc.items():
        out[_PAIR_NAMES.index(key[1:])] += v
    return tuple(out)


def _tensors_for(pattern: ContractionPattern, rng):
    return [random_traceless(n, rng) for n in pattern.slot_loads()]


# ---------------------------------------------------------------------------
# Matrix and vector identities


def _rand_traceless_matrix(rng):
    return to_dense(random_traceless(2, rng))


def _rand_vector(rng):
    return np.array([Fraction(int(x), int(d)) for x, d in zip(rng.integers(-5, 6, 3), rng.integers(1, 4, 3))],
                    dtype=object)


def _tr(*ms):
    out = ms[0]
    for m in ms[1:]:
        out = out.dot(m)
    return np.trace(out)


def quartic_trace_identity(q1, q2, q3, q4):
    """(lhs, rhs) of 2 tr(Q1Q2Q3Q4 + Q1Q2Q4Q3 + Q1Q3Q2Q4) = sum of paired trace products."""
    lhs = 2 * (_tr(q1, q2, q3, q4) + _tr(q1, q2, q4, q3) + _tr(q1, q3, q2, q4))
    rhs = _tr(q1, q2) * _tr(q3, q4) + _tr(q1, q3) * _tr(q2, q4) + _tr(q1, q4) * _tr(q2, q3)
    return lhs, rhs


def _cross(a, b):
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]],
                    dtype=object)


def cyclic_cross_identity(p1, p2, p3):
    """(lhs, rhs): the six-term symmetrised cyclic cross-outer sum and 2 det(p1, p2, p3) times the identity.

    The three unsymmetrised terms alone already sum to det times the identity.
    """
    lhs = np.zeros((3, 3), dtype=object)
    for a, b, c in ((p1, p2, p3), (p2, p3, p1), (p3, p1, p2)):
        x = _cross(a, b)
        lhs = lhs + np.outer(x, c) + np.outer(c, x)
    det = np.dot(_cross(p1, p2), p3)
    rhs = np.eye(3, dtype=int).astype(object) * (2 * det)
    return lhs, rhs


def random_quartic_instance(rng):
    return quartic_trace_identity(*[_rand_traceless_matrix(rng) for _ in range(4)])


def random_cross_instance(rng):
    return cyclic_cross_identity(*[_rand_vector(rng) for _ in range(3)])


# ---------------------------------------------------------------------------
# Relations among a4 contractions


def even_relation(base, tensors):
    """(lhs, rhs) of the relation trading l12, l34 >= 2 for smaller pair counts."""
    P = ContractionPattern
    lhs_l = [bump(base, l12=1, l13=1, l24=1, l34=1), bump(base, l12=1, l14=1, l23=1, l34=1),
             bump(base, l13=1, l14=1, l23=1, l24=1)]
    rhs_l = [bump(base, l12=2, l34=2), bump(base, l13=2, l24=2), bump(base, l14=2, l23=2)]
    lhs = 2 * sum(a4_scalar(*tensors, P(x)) for x in lhs_l)
    rhs = sum(a4_scalar(*tensors, P(x)) for x in rhs_l)
    return lhs, rhs


def even_relation_orders(base):
    return ContractionPattern(bump(base, l12=2, l34=2)).slot_loads()


def odd_relations(base):
    """The four signed triples of (pattern, sign) that sum to zero."""
    P = ContractionPattern
    return [
        [(P(bump(base, l14=1), (1, 2, 3)), 1), (P(bump(base, l13=1), (1, 2, 4)), -1),
         (P(bump(base, l12=1), (1, 3, 4)), 1)],
        [(P(bump(base, l24=1), (1, 2, 3)), 1), (P(bump(base, l23=1), (1, 2, 4)), -1),
         (P(bump(base, l12=1), (2, 3, 4)), -1)],
        [(P(bump(base, l34=1), (1, 2, 3)), 1), (P(bump(base, l23=1), (1, 3, 4)), 1),
         (P(bump(base, l13=1), (2, 3, 4)), -1)],
        [(P(bump(base, l34=1), (1, 2, 4)), 1), (P(bump(base, l24=1), (1, 3, 4)), -1),
         (P(bump(base, l14=1), (2, 3, 4)), 1)],
    ]


def odd_relation_value(relation, tensors):
    return sum(s * a4_scalar(*tensors, pat) for pat, s in relation)


def random_base(rng, high: int = 1):
    return tuple(int(x) for x in rng.integers(0, high + 1, 6))


def random_even_instance(rng):
    base = random_base(rng)
    tensors = [random_traceless(n, rng) for n in even_relation_orders(base)]
    return base, even_relation(base, tensors)


def random_odd_instance(rng, which: int):
    base = random_base(rng)
    rel = odd_relations(base)[which]
    tensors = _tensors_for(rel[0][0], rng)
    return base, odd_relation_value(rel, tensors)


__all__ = [
    "bump",
    "quartic_trace_identity",
    "cyclic_cross_identity",
    "random_quartic_instance",
    "random_cross_instance",
    "even_relation",
    "even_relation_orders",
    "odd_relations",
    "odd_relation_value",
    "random_even_instance",
    "random_odd_instance",
]
