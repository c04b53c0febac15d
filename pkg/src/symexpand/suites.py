"""Self-verification suites shared by the command line and the test-suite."""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exactscalar, relations
from .expander import worked_example_c2v_s4
from .groups import invariant_space_avg, invariant_space_closed_form, parse_group, realize, same_span
from .so3poly import OrientPoly, euler_matrix, haar_integral_all
from .tensors import build_basis_W, dot, pair_w, random_traceless, trace
from .terms import (
    TensorSlot,
    a4_candidates,
    a4_selected,
    augmented_rank_check,
    basis_slot,
    certify,
    enum_m2_raw,
    enum_m3_fixed,
    orth_basis_m2,
    span_rank,
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


def _ok(name, cond, detail=""):
    return Check(name, bool(cond), detail)


# ---------------------------------------------------------------------------
# Identities among four-tensor contractions


def _slot(name, order, rng):
    return TensorSlot(name, random_traceless(order, rng))


# (n1, n4) realising each base case of the triple-equal families
PSI_BASE = {0: (1, 3), 1: (1, 1), 2: (2, 2)}
PHI_BASE = {0: (1, 2), 1: (2, 3), 2: (3, 4)}


def psi_rank(n1, n4, rng) -> int:
    a, b = _slot("A", n1, rng), _slot("B", n4, rng)
    cands, _ = a4_candidates((a, a, a, b))
    return span_rank([c for c in cands if c.pattern.tau is None])


def phi_rank(n1, n4, rng) -> int:
    a, b = _slot("A", n1, rng), _slot("B", n4, rng)
    cands, _ = a4_candidates((a, a, a, b))
    return span_rank([c for c in cands if c.pattern.tau == (1, 2, 4)])


def suite_contraction_identities(seed: int = 0, count: int = 20, identity_count: int = 10):
    rng = np.random.default_rng(seed)
    for i in range(identity_count):
        lhs, rhs = relations.random_quartic_instance(rng)
        yield _ok(f"quartic trace identity #{i}", lhs == rhs, f"{lhs} vs {rhs}")
    for i in range(identity_count):
        lhs, rhs = relations.random_cross_instance(rng)
        yield _ok(f"cyclic cross identity #{i}", (lhs == rhs).all())
    for i in range(count):
        base, (lhs, rhs) = relations.random_even_instance(rng)
        yield _ok(f"even a4 relation #{i}", lhs == rhs, f"base {base}: {lhs} vs {rhs}")
    for which in range(4):
        for i in range(count):
            base, val = relations.random_odd_instance(rng, which)
            yield _ok(f"odd a4 relation {which + 1} #{i}", val == 0, f"base {base}: residue {val}")
    for d, (n1, n4) in PSI_BASE.items():
        r = psi_rank(n1, n4, rng)
        yield _ok(f"psi base case d={d}", r == 1, f"rank {r}")
    for d, (n1, n4) in PHI_BASE.items():
        r = phi_rank(n1, n4, rng)
        yield _ok(f"phi base case d={d}", r == (0 if d == 0 else 1), f"rank {r}")


# ---------------------------------------------------------------------------
# Counting and spanning


def suite_counts(seed: int = 0):
    for k in range(5):
        for m in range(4):
            n = len(enum_m2_raw(k, basis_slot(m, 0)))
            want = (2 * m + 1) * (k + 1) * (k + 2) // 2
            yield _ok(f"M2 count k={k} m={m}", n == want, f"{n} vs {want}")
    for k in range(5):
        for m in range(4):
            if k + m > 5:
                continue
            c = certify(enum_m2_raw(k, basis_slot(m, m)))
            yield _ok(f"M2 Gram rank k={k} m={m}", c.passed, f"rank {c.rank} of {c.expected}")
    c = certify(enum_m3_fixed(basis_slot(2, 0), basis_slot(2, 1)))
    yield _ok("a3 spanning rank for orders 2, 2", c.rank == 25, f"rank {c.rank}")


# ---------------------------------------------------------------------------
# Four-body selection


def m4_selection(n4: int, rng):
    a, b = _slot("A", 3, rng), _slot("B", n4, rng)
    cands, case = a4_candidates((a, a, a, b))
    even = [c for c in cands if c.pattern.tau is None]
    sel = [c for c in even if a4_selected(c.pattern, c.orders, case)]
    exc = [c for c in even if c not in sel]
    short = sorted((c.pattern.l[0], c.pattern.l[1], c.pattern.l[3]) for c in sel)
    return short, augmented_rank_check(sel, exc)


def suite_m4_selection(seed: int = 0):
    rng = np.random.default_rng(seed)
    for n4, want in ((3, [(0, 0, 3), (1, 1, 1)]), (1, [(1, 1, 2)])):
        short, (r1, r2) = m4_selection(n4, rng)
        yield _ok(f"selected patterns for orders (3,3,3,{n4})", short == want, f"{short}")
        yield _ok(f"excluded patterns dependent for orders (3,3,3,{n4})", r1 == r2 == len(want), f"ranks {r1}, {r2}")


# ---------------------------------------------------------------------------
# Orthogonality


def suite_orthogonality(seed: int = 0):
    for k in range(7):
        b = build_basis_W(k)
        ok = len(b) == 2 * k + 1 and all(not t.is_zero() for t in b)
        ok = ok and all(k < 2 or trace(t).is_zero() for t in b)
        ok = ok and all(dot(b[i], b[j]) == 0 for i in range(len(b)) for j in range(i))
        yield _ok(f"basis of order {k}", ok, f"size {len(b)}")
    fs = [pair_w(k, i, j) for k in range(4) for i in range(1, 2 * k + 2) for j in range(1, 2 * k + 2)]
    bad = [(a, b) for a in range(len(fs)) for b in range(a + 1, len(fs)) if haar_integral_all(fs[a] * fs[b]) != 0]
    yield _ok("pair functions orthogonal up to order 3", not bad, f"{len(bad)} nonzero products")
    for k in range(3):
        c = certify(orth_basis_m2(k, 3))
        pos = all(c.gram[i][i] > 0 for i in range(len(c.gram)))
        yield _ok(f"orthogonal two-body basis k={k}", c.is_diagonal() and pos, f"{len(c.terms)} terms")


# ---------------------------------------------------------------------------
# Point groups

TYPE_TABLE_GOLDEN = {
    "C2v": [("1", 1), ("m1", -1), ("m1^2 - 1/3 i", 1), ("m2^2 - m3^2", 1), ("m2 m3", -1)],
    "S4": [("1", 1), ("m1", 1), ("m1^2 - 1/3 i", 1), ("m2^2 - m3^2", -1), ("m2 m3", -1)],
}
CROSS_GOLDEN = {
    "C2v": [("m1^2 - 1/3 i", "m2 m3"), ("m2^2 - m3^2", "m2 m3")],
    "S4": [("m1^2 - 1/3 i", "m2^2 - m3^2"), ("m1^2 - 1/3 i", "m2 m3")],
}
CLOSED_FORM_GROUPS = ("C2", "C3", "C4", "C6", "D2", "D3", "D4", "T", "O")


def closed_form_matches(name: str, order: int) -> tuple:
    spec = parse_group(name)
    avg = invariant_space_avg(realize(spec), order)
    cf = [n.tensor for n in invariant_space_closed_form(spec, order)]
    return len(avg) == len(cf) and same_span(avg, cf), len(avg)


def suite_groups(seed: int = 0):
    for name in CLOSED_FORM_GROUPS:
        for order in range(5):
            ok, dim = closed_form_matches(name, order)
            yield _ok(f"{name} invariants of order {order}", ok, f"dimension {dim}")
    for order in range(7):
        ok, dim = closed_form_matches("I", order)
        yield _ok(f"I invariants of order {order}", ok and (order != 6 or dim > 0), f"dimension {dim}")
    ex = worked_example_c2v_s4()
    for name in ("C2v", "S4"):
        yield _ok(f"{name} type table", [tuple(r) for r in ex[name]["types"]] == TYPE_TABLE_GOLDEN[name])
        got = [tuple(p) for p in ex[name]["cross_k1"]["2"]]
        yield _ok(f"{name} first-order cross couplings", got == CROSS_GOLDEN[name] and not ex[name]["cross_k1"]["1"])


# ---------------------------------------------------------------------------
# Exact against numeric Haar integration


def random_orient_poly(rng, max_degree: int = 6, nterms: int = 4) -> OrientPoly:
    terms = {}
    for _ in range(nterms):
        deg = int(rng.integers(0, max_degree + 1))
        e = [0] * 9
        for idx in rng.integers(0, 9, deg):
            e[int(idx)] += 1
        key = () if deg == 0 else ((1, tuple(e)),)
        c = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5)))
        terms[key] = terms.get(key, 0) + c
    return OrientPoly({k: v for k, v in terms.items() if v != 0})


def numeric_haar(polys, n_uniform: int = 16, tol: float = 1e-13):
    """Adaptive quadrature in the polar Euler angle, uniform rules in the other two.

    The uniform rules are exact for trigonometric degree below ``n_uniform``.
    """
    from scipy.integrate import quad_vec

    monos = sorted({m for p in polys for m in p.terms})
    exps = np.array([m[0][1] if m else (0,) * 9 for m in monos], dtype=float)
    coef = np.zeros((len(monos), len(polys)))
    index = {m: i for i, m in enumerate(monos)}
    for j, p in enumerate(polys):
        for m, c in p.terms.items():
            coef[index[m], j] = float(c)
    ang = 2 * np.pi * np.arange(n_uniform) / n_uniform
    B, G = np.meshgrid(ang, ang, indexing="ij")

    def integrand(alpha):
        mats = euler_matrix(np.full(B.size, alpha), B.ravel(), G.ravel()).reshape(9, -1).T
        vals = np.prod(mats[:, None, :] ** exps[None], axis=2)
        return np.sin(alpha) * (vals.mean(axis=0) @ coef) / 2

    res, _ = quad_vec(integrand, 0.0, np.pi, epsabs=tol, epsrel=tol)
    return res


def haar_agreement(seed: int = 0, count: int = 200):
    rng = np.random.default_rng(seed)
    polys = [random_orient_poly(rng) for _ in range(count)]
    exact = np.array([float(haar_integral_all(p)) for p in polys])
    approx = numeric_haar(polys)
    return float(np.max(np.abs(exact - approx)))


def suite_haar(seed: int = 0, count: int = 200):
    before = exactscalar.pi_residue_events
    err = haar_agreement(seed, count)
    yield _ok(f"{count} random integrals against numeric quadrature", err <= 1e-10, f"max error {err:.2e}")
    yield _ok("no pi residue during the suite", exactscalar.pi_residue_events == before)


SUITES = {
    "appendixE": suite_contraction_identities,
    "counts": suite_counts,
    "m4-selection": suite_m4_selection,
    "orthogonality": suite_orthogonality,
    "groups": suite_groups,
    "haar": suite_haar,
}


def run_suite(name: str, seed: int = 0, stop_on_failure: bool = True):
    """Run one suite (or ``all``); returns (checks, seconds)."""
    names = list(SUITES) if name == "all" else [name]
    t0 = time.perf_counter()
    out = []
    for n in names:
        for check in SUITES[n](seed):
            check.name = f"{n}: {check.name}"
            out.append(check)
            if stop_on_failure and not check.passed:
                return out, time.perf_counter() - t0
    return out, time.perf_counter() - t0
