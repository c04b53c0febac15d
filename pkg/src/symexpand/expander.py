"""Group-restricted term lists and their free-energy renderings."""

from __future__ import annotations

from dataclasses import dataclass, field

from .groups import PointGroupSpec, parse_group, typed_basis
from .terms import A3Term, A4Term, M2Term, TensorSlot, enum_m2, enum_m3, enum_m4, orth_basis_m2

MAX_N = {2: 6, 3: 4, 4: 3}
MAX_K = 4


class ExpansionCapError(ValueError):
    """Request outside the supported caps."""


@dataclass(frozen=True)
class ExpansionRequest:
    group: PointGroupSpec
    cluster: int = 2
    k: int = 0
    n: int = 2
    orthogonalized: bool = False

    def validate(self):
        if self.cluster not in (2, 3, 4):
            raise ExpansionCapError(f"cluster must be 2, 3 or 4, got {self.cluster}")
        if self.cluster == 2 and not 0 <= self.k <= MAX_K:
            raise ExpansionCapError(f"gradient order must be 0..{MAX_K} for two-body terms")
        if self.cluster > 2 and self.k != 0:
            raise ExpansionCapError("three- and four-body terms are only available with gradient order 0")
        if not 0 <= self.n <= MAX_N[self.cluster]:
            raise ExpansionCapError(f"max order must be 0..{MAX_N[self.cluster]} for cluster {self.cluster}")
        if self.orthogonalized and self.cluster != 2:
            raise ExpansionCapError("orthogonalized terms exist only for two-body terms")
        return self


@dataclass
class EnergyTerm:
    term: object
    rendering: str
    structure: dict = field(default_factory=dict)

    @property
    def cluster(self) -> int:
        return self.term.nvars

    @property
    def k(self) -> int:
        return self.term.k


# ---------------------------------------------------------------------------
# Slots and filtering


def group_slots(spec: PointGroupSpec, max_order: int):
    """Typed invariant tensors as term slots, ordered as in the closed-form basis."""
    slots = []
    for pos, t in enumerate(typed_basis(spec, max_order)):
        slots.append(TensorSlot(t.label, t.tensor, t.type_sign, pos))
    return slots


def term_slots(term):
    if isinstance(term, M2Term):
        return (term.u, term.v)
    return tuple(term.slots)


def parity_ok(term) -> bool:
    """Type -1 tensors must appear an odd number of times for odd k, even for even k.

    Groups without improper elements assign no types and impose nothing.
    """
    slots = term_slots(term)
    if any(s.type_sign == 0 for s in slots):
        return True
    minus = sum(1 for s in slots if s.type_sign == -1)
    return minus % 2 == term.k % 2


def _sort_key(term):
    slots = term_slots(term)
    base = (term.nvars, term.k, tuple(s.order for s in slots), tuple(s.position for s in slots))
    if isinstance(term, M2Term):
        return base + ((0 if term.kind == "dot" else 1, term.p, term.q),)
    if isinstance(term, A3Term):
        return base + ((int(term.eps),),)
    pat = term.pattern
    return base + ((1 if pat.tau else 0,) + tuple(pat.l) + tuple(pat.tau or ()),)


def raw_terms(req: ExpansionRequest):
    """Generic enumeration over the group's invariant tensors, before the parity filter."""
    req.validate()
    slots = group_slots(req.group, req.n)
    if req.cluster == 2:
        f = orth_basis_m2 if req.orthogonalized else enum_m2
        return f(req.k, req.n, slots) if slots else []
    if req.cluster == 3:
        return enum_m3(req.n, slots)
    return enum_m4(req.n, slots)


def expand(req: ExpansionRequest):
    """The symmetry-consistent term list for a point group, deterministically ordered."""
    terms = [t for t in raw_terms(req) if parity_ok(t)]
    terms.sort(key=_sort_key)
    return [render_energy(t) for t in terms]


# ---------------------------------------------------------------------------
# Rendering


def _avg(slot: TensorSlot, idx) -> str:
    body = f"⟨{slot.name}⟩"
    return body + ("_{" + ",".join(idx) + "}" if idx else "")


def _deriv(idx) -> str:
    return "∂_{" + ",".join(idx) + "}" if idx else ""


def _factor(slot, d, idx) -> str:
    return _deriv(d) + _avg(slot, idx)


def _m2_structure(term: M2Term):
    r, m, p, q, k = term.u.order, term.v.order, term.p, term.q, term.k
    cross = term.kind == "cross"
    shared = [f"i{t + 1}" for t in range(p)]
    nfu = r - p - (1 if cross else 0)
    nfv = m - p - (1 if cross else 0)
    counter = iter(range(1, 64))
    own_u = [f"j{next(counter)}" for _ in range(nfu)]
    own_v = [f"j{next(counter)}" for _ in range(nfv)]
    pairs = [f"j{next(counter)}" for _ in range(q)]
    cap_u, cap_v = k // 2, k - k // 2
    du, dv = [], []
    for x in pairs:  # one copy each side when both have room
        if len(du) < cap_u and len(dv) < cap_v:
            du.append(x)
            dv.append(x)
        elif cap_u - len(du) >= 2:
            du += [x, x]
        else:
            dv += [x, x]
    rest = []
    for x in own_u:
        (du if len(du) < cap_u else rest).append(x)
    for x in own_v:
        (dv if len(dv) < cap_v else rest).append(x)
    if cross:
        rest.insert(0, "k")
    for x in rest:
        (du if len(du) < cap_u else dv).append(x)
    idx_u = shared + (["i"] if cross else []) + own_u
    idx_v = shared + (["j"] if cross else []) + own_v
    text = _factor(term.u, du, idx_u) + " " + _factor(term.v, dv, idx_v)
    if cross:
        text = "ε_{ijk} " + text
    if term.orthogonalized:
        text = f"[{text}]_0"
    structure = {
        "family": term.kind,
        "p": p,
        "q": q,
        "swap_sign": term.swap_sign,
        "eps": cross,
        "orthogonalized": term.orthogonalized,
        "derivatives": [du, dv],
        "indices": [idx_u, idx_v],
    }
    return text, structure


def _net_structure(term):
    pat = term.pattern
    head = "\U0001d51e₃" if isinstance(term, A3Term) else "\U0001d51e₄"
    args = ",".join(_avg(s, []) for s in term.slots)
    ls = ",".join(map(str, pat.l))
    tail = f";({''.join(map(str, pat.tau))})" if pat.tau else ""
    text = f"{head}({args}; {ls}{tail})"
    structure = {
        "l": list(pat.l),
        "tau": list(pat.tau) if pat.tau else None,
        "eps": pat.tau is not None,
        "symmetrized": term.symmetrized,
    }
    return text, structure


def render_energy(term) -> EnergyTerm:
    """Free-energy rendering in index notation, plus a structured form."""
    if isinstance(term, M2Term):
        text, st = _m2_structure(term)
    elif isinstance(term, (A3Term, A4Term)):
        text, st = _net_structure(term)
    else:
        raise TypeError(f"cannot render {type(term).__name__}")
    st["tensors"] = [{"label": s.name, "order": s.order, "type": s.type_sign} for s in term_slots(term)]
    return EnergyTerm(term, text, st)


# ---------------------------------------------------------------------------
# The two-group comparison used as a regression example


def type_table(spec: PointGroupSpec, max_order: int):
    return [(t.label, t.type_sign) for t in typed_basis(spec, max_order)]


def cross_pairs(spec: PointGroupSpec, order: int, k: int = 1, max_order: int | None = None):
    """(U, V) label pairs of the equal-order cross family surviving for gradient order k."""
    n = order if max_order is None else max_order
    out = []
    for et in expand(ExpansionRequest(spec, 2, k, n)):
        t = et.term
        if t.kind == "cross" and t.u.order == t.v.order == order and t.swap_sign == 1:
            out.append((t.u.name, t.v.name))
    return out


def worked_example_c2v_s4():
    """Type tables and first-order cross couplings for C2v and S4 up to order 2."""
    report = {}
    for name in ("C2v", "S4"):
        spec = parse_group(name)
        report[name] = {
            "types": type_table(spec, 2),
            "cross_k1": {str(o): cross_pairs(spec, o, 1, 2) for o in (1, 2)},
        }
    return report


def format_type_table(rows) -> str:
    width = max(len(lbl) for lbl, _ in rows)
    return "\n".join(f"{lbl.ljust(width)}  {'+1' if s > 0 else '-1'}" for lbl, s in rows)
