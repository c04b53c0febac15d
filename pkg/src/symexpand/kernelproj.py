"""Numeric moments of pair kernels and their projection onto the orthogonal two-body basis.

Kernels are assumed invariant under a simultaneous rotation of the separation
vector and both orientations. Then M(p1, p2) = p1 o M(I, p1^T p2), and every
inner product between such functions reduces to one orientation integral over
q = p1^T p2. All quantities here are sampled with p1 pinned to the identity.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .terms import M2Term, TensorSlot, basis_slot, orth_basis_m2
from .tensors import SymTensor, build_basis_W, dot, rotate_numeric, to_dense


class KernelError(ValueError):
    """Invalid kernel or kernel values."""


class UnderResolvedError(RuntimeError):
    """Coefficients changed by more than the tolerance between grid resolutions."""


REFINE_TOL = 1e-4


# ---------------------------------------------------------------------------
# Quadrature


@dataclass(frozen=True)
class QuadratureGrid:
    """Product rules for the separation vector and for one orientation.

    Radial: Gauss-Legendre on [0, R]. Directions: Gauss-Legendre in cos(theta)
    times uniform phi. Orientations: Gauss-Legendre in cos(alpha) times uniform
    beta and gamma, in the Euler parametrisation of :func:`so3poly.euler_matrix`.
    """

    n_r: int = 16
    n_theta: int = 8
    n_phi: int = 16
    n_alpha: int = 24
    n_beta: int = 48
    n_gamma: int = 48

    def coarsened(self) -> "QuadratureGrid":
        """Three quarters of every count: the comparison grid for the resolution check."""
        return QuadratureGrid(*(max(2, (3 * x) // 4) for x in self.counts))

    def doubled(self) -> "QuadratureGrid":
        return QuadratureGrid(*(2 * x for x in self.counts))

    @property
    def counts(self):
        return (self.n_r, self.n_theta, self.n_phi, self.n_alpha, self.n_beta, self.n_gamma)

    def exactness_degree(self) -> int:
        """Largest total degree in rotation entries integrated exactly (empirically certified)."""
        return min(2 * self.n_alpha - 1, self.n_beta - 1, self.n_gamma - 1)

    def separation_nodes(self, radius: float):
        """Points r (M, 3) and weights (M,) for integrals over the ball of this radius."""
        return _separation_nodes(self.n_r, self.n_theta, self.n_phi, float(radius))

    def orientation_nodes(self):
        """Rotations (N, 3, 3) and weights (N,) summing to one."""
        return _orientation_nodes(self.n_alpha, self.n_beta, self.n_gamma)


@lru_cache(maxsize=8)
def _separation_nodes(n_r, n_theta, n_phi, radius):
    x, w = np.polynomial.legendre.leggauss(n_r)
    rho = 0.5 * radius * (x + 1)
    wr = 0.5 * radius * w * rho ** 2
    ct, wt = np.polynomial.legendre.leggauss(n_theta)
    st = np.sqrt(1 - ct ** 2)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    wphi = np.full(n_phi, 2 * np.pi / n_phi)
    dirs = np.stack(
        [np.outer(st, np.cos(phi)).ravel(), np.outer(st, np.sin(phi)).ravel(), np.repeat(ct, n_phi)], axis=1
    )
    wdir = np.outer(wt, wphi).ravel()
    pts = (rho[:, None, None] * dirs[None]).reshape(-1, 3)
    wts = np.outer(wr, wdir).ravel()
    return pts, wts


@lru_cache(maxsize=8)
def _orientation_nodes(n_alpha, n_beta, n_gamma):
    u, wu = np.polynomial.legendre.leggauss(n_alpha)
    a = np.arccos(u)
    b = 2 * np.pi * np.arange(n_beta) / n_beta
    g = 2 * np.pi * np.arange(n_gamma) / n_gamma
    A, B, G = np.meshgrid(a, b, g, indexing="ij")
    ca, sa = np.cos(A).ravel(), np.sin(A).ravel()
    cb, sb = np.cos(B).ravel(), np.sin(B).ravel()
    cg, sg = np.cos(G).ravel(), np.sin(G).ravel()
    mats = np.empty((ca.size, 3, 3))
    mats[:, 0, 0] = ca
    mats[:, 0, 1] = -sa * cg
    mats[:, 0, 2] = sa * sg
    mats[:, 1, 0] = sa * cb
    mats[:, 1, 1] = ca * cb * cg - sb * sg
    mats[:, 1, 2] = -ca * cb * sg - sb * cg
    mats[:, 2, 0] = sa * sb
    mats[:, 2, 1] = ca * sb * cg + cb * sg
    mats[:, 2, 2] = -ca * sb * sg + cb * cg
    wts = np.repeat(wu / 2, n_beta * n_gamma) / (n_beta * n_gamma)
    return mats, wts


# ---------------------------------------------------------------------------
# Kernels


@dataclass
class PairKernel:
    """A two-body kernel G(r, p1, p2) supported on |r| <= radius.

    With ``vectorized`` the evaluator maps r (M, 3), p1 (N, 3, 3), p2 (N, 3, 3)
    to an (N, M) array; otherwise it maps one (r, p1, p2) to a float.
    """

    name: str
    evaluator: Callable
    radius: float
    vectorized: bool = False
    bandwidth: int | None = None
    serial: bool = False
    planted: dict = field(default_factory=dict)

    def evaluate(self, r, p1, p2) -> np.ndarray:
        r = np.atleast_2d(np.asarray(r, dtype=float))
        p1 = np.asarray(p1, dtype=float)
        p2 = np.asarray(p2, dtype=float)
        if p1.ndim == 2:
            p1 = np.broadcast_to(p1, p2.shape)
        if self.vectorized:
            out = np.asarray(self.evaluator(r, p1, p2), dtype=float)
        else:
            out = np.array([[float(self.evaluator(x, a, b)) for x in r] for a, b in zip(p1, p2)])
        if out.shape != (p2.shape[0], r.shape[0]):
            raise KernelError(f"kernel returned shape {out.shape}, expected {(p2.shape[0], r.shape[0])}")
        if not np.all(np.isfinite(out)):
            raise KernelError("kernel produced non-finite values")
        return out

    def swap_defect(self, rng, samples: int = 20) -> float:
        """max |G(-r, p2, p1) - G(r, p1, p2)| over random samples."""
        from scipy.spatial.transform import Rotation

        r = rng.uniform(-1, 1, size=(samples, 3)) * self.radius / 2
        p1 = Rotation.random(samples, random_state=rng).as_matrix()
        p2 = Rotation.random(samples, random_state=rng).as_matrix()
        worst = 0.0
        for i in range(samples):
            a = self.evaluate(r[i:i + 1], p1[i:i + 1], p2[i:i + 1])[0, 0]
            b = self.evaluate(-r[i:i + 1], p2[i:i + 1], p1[i:i + 1])[0, 0]
            worst = max(worst, abs(a - b))
        return worst


def _radial_bump(rho, radius):
    """(1 - (rho/R)^2)^2 inside the ball: a polynomial, so radial quadrature is exact."""
    t = np.clip(1 - (rho / radius) ** 2, 0, None)
    return t * t


def isotropic_gaussian(sigma: float = 1.0, radius: float = 6.0) -> PairKernel:
    def ev(r, p1, p2):
        g = np.exp(-np.sum(r * r, axis=1) / (2 * sigma ** 2))
        return np.broadcast_to(g, (p2.shape[0], r.shape[0]))

    return PairKernel("isotropic-gaussian", ev, radius, vectorized=True)


DEFAULT_PLANT = (("W0_0", "W0_0", 0.5), ("W1_0", "W1_0", 0.7), ("W2_1", "W2_3", -0.4), ("W2_0", "W2_0", 0.25))


def _slot(name: str) -> TensorSlot:
    order, idx = name[1:].split("_")
    return basis_slot(int(order), int(idx))


def plant_term(u: str, v: str, swap_sign: int = 1) -> M2Term:
    """The orthogonal zeroth-gradient term built from basis tensors ``u`` and ``v``."""
    su, sv = sorted((_slot(u), _slot(v)), key=TensorSlot.sort_key)
    if su.order != sv.order:
        raise KernelError("planted zeroth-gradient terms need equal orders")
    return M2Term(0, su.order, "dot", su, sv, swap_sign, True)


def planted_bandlimited(plant=DEFAULT_PLANT, radius: float = 2.0, swap_sign: int = 1) -> PairKernel:
    """G = g(|r|) sum_t c_t A_t(p1, p2) with A_t orthogonal zeroth-gradient terms."""
    terms = [(plant_term(u, v, swap_sign), c) for u, v, c in plant]

    def ev(r, p1, p2):
        q = np.einsum("nji,njk->nik", p1, p2)
        h = np.zeros(q.shape[0])
        for t, c in terms:
            h += c * term_at_identity(t, q)[:, 0]
        g = _radial_bump(np.sqrt(np.sum(r * r, axis=1)), radius)
        return np.outer(h, g)

    bw = max(t.u.order for t, _ in terms)
    k = PairKernel("planted-bandlimited", ev, radius, vectorized=True, bandwidth=bw)
    k.planted = {t: c for t, c in terms}
    return k


def radial_bump_integral(radius: float, power: int = 0) -> float:
    """Exact 4 pi int_0^R (1-(rho/R)^2)^2 rho^(2+power) d rho."""
    a = 2 + power
    # expand (1 - x^2)^2 = 1 - 2x^2 + x^4 with x = rho/R
    s = 1 / (a + 1) - 2 / (a + 3) + 1 / (a + 5)
    return 4 * math.pi * radius ** (a + 1) * s


def rotation_distance_gaussian(width: float = 0.6, sigma: float = 1.0, radius: float = 6.0) -> PairKernel:
    """g(|r|) exp(-(1 - cos theta)/width^2), theta the angle of p1^T p2: smooth, not band-limited."""

    def ev(r, p1, p2):
        tr = np.einsum("nij,nij->n", p1, p2)
        h = np.exp(-(1 - (tr - 1) / 2) / width ** 2)
        g = np.exp(-np.sum(r * r, axis=1) / (2 * sigma ** 2))
        return np.outer(h, g)

    return PairKernel("rotation-distance-gaussian", ev, radius, vectorized=True)


BUILTIN_KERNELS = {
    "isotropic-gaussian": isotropic_gaussian,
    "planted-bandlimited": planted_bandlimited,
    "rotation-distance-gaussian": rotation_distance_gaussian,
}


def builtin_kernel(name: str) -> PairKernel:
    try:
        return BUILTIN_KERNELS[name]()
    except KeyError:
        raise KernelError(f"unknown kernel {name!r}; built-ins: {', '.join(sorted(BUILTIN_KERNELS))}") from None


def load_plugin(spec: str) -> PairKernel:
    """Load ``module:attr``.

    ``attr`` may be a PairKernel, a zero-argument factory returning one, or an
    evaluator of ``(r, p1, p2)``. A bare evaluator may carry ``radius``,
    ``vectorized`` and ``serial`` attributes; the radius defaults to 6.
    """
    import importlib
    import inspect

    if ":" not in spec:
        raise KernelError("plugin kernels are given as module:function")
    mod, fn = spec.split(":", 1)
    try:
        obj = getattr(importlib.import_module(mod), fn)
    except (ImportError, AttributeError) as exc:
        raise KernelError(f"cannot load plugin {spec!r}: {exc}") from None
    if isinstance(obj, PairKernel):
        return obj
    if not callable(obj):
        raise KernelError(f"plugin {spec!r} is not callable")
    try:
        nparams = len(inspect.signature(obj).parameters)
    except (TypeError, ValueError):
        nparams = 0
    if nparams == 3:
        return PairKernel(spec, obj, float(getattr(obj, "radius", 6.0)),
                          vectorized=bool(getattr(obj, "vectorized", False)),
                          serial=bool(getattr(obj, "serial", False)))
    res = obj()
    if isinstance(res, PairKernel):
        return res
    raise KernelError("plugin must be a PairKernel, a factory returning one, or an evaluator of (r, p1, p2)")


# ---------------------------------------------------------------------------
# Moments


def _flat_powers(r: np.ndarray, k: int) -> np.ndarray:
    """Dense r^{(x) k} for each row, flattened to (M, 3^k)."""
    out = np.ones((r.shape[0], 1))
    for _ in range(k):
        out = (out[:, :, None] * r[:, None, :]).reshape(r.shape[0], -1)
    return out


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SYMEXPAND_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class MomentSamples:
    k: int
    rotations: np.ndarray  # q = p1^T p2 at each node, p1 = I
    weights: np.ndarray
    values: np.ndarray  # (N, 3^k) dense components of M(I, q)


def moment_m2(kernel: PairKernel, k: int, grid: QuadratureGrid | None = None, chunk: int = 2048) -> MomentSamples:
    """M(I, q) = int G(r, I, q) r^{(x) k} dr at every orientation node q."""
    if not 0 <= k <= 4:
        raise ValueError("gradient order must be 0..4")
    grid = grid or QuadratureGrid()
    pts, wts = grid.separation_nodes(kernel.radius)
    qs, qw = grid.orientation_nodes()
    rk = _flat_powers(pts, k) * wts[:, None]
    eye = np.eye(3)
    blocks = [slice(i, min(i + chunk, len(qs))) for i in range(0, len(qs), chunk)]

    def run(sl):
        g = kernel.evaluate(pts, eye, qs[sl])
        return g @ rk

    if kernel.serial or _threads() == 1:
        parts = [run(sl) for sl in blocks]
    else:
        with ThreadPoolExecutor(_threads()) as ex:
            parts = list(ex.map(run, blocks))
    return MomentSamples(k, qs, qw, np.concatenate(parts, axis=0))


def moment_at(kernel: PairKernel, k: int, p1, p2, grid: QuadratureGrid | None = None) -> np.ndarray:
    """Dense M(p1, p2) of order k for one orientation pair, shape (3,)*k."""
    grid = grid or QuadratureGrid()
    pts, wts = grid.separation_nodes(kernel.radius)
    g = kernel.evaluate(pts, np.asarray(p1)[None], np.asarray(p2)[None])[0]
    return ((g * wts) @ _flat_powers(pts, k)).reshape((3,) * k)


# ---------------------------------------------------------------------------
# Basis terms sampled at p1 = I


@lru_cache(maxsize=None)
def _op_table(op, u: SymTensor, m: int) -> np.ndarray:
    """Row i: dense op(u, w_i) / |w_i|^2, flattened."""
    rows = []
    for w in build_basis_W(m):
        t = op.apply(u, w)
        rows.append(to_dense(t).astype(float).ravel() / float(dot(w, w)))
    return np.array(rows)


def _coords(v: SymTensor, qs: np.ndarray) -> np.ndarray:
    """(q o v) . w_i for every node and basis tensor w_i."""
    rot = rotate_numeric(v, qs).reshape(len(qs), -1)
    ws = np.array([to_dense(w).astype(float).ravel() for w in build_basis_W(v.order)])
    return rot @ ws.T


def term_at_identity(term, qs: np.ndarray, cache: dict | None = None) -> np.ndarray:
    """Dense components A(I, q), shape (N, 3^k), for a two-body term."""
    out = None
    for piece in term.pieces():
        u, v = piece.assign
        key = (v.name, v.tensor, len(qs), id(qs))
        if cache is not None and key in cache:
            c = cache[key]
        else:
            c = _coords(v.tensor, qs)
            if cache is not None:
                cache[key] = c
        val = float(piece.coef) * (c @ _op_table(piece.op, u.tensor, v.order))
        out = val if out is None else out + val
    return out


# ---------------------------------------------------------------------------
# Projection


@dataclass
class CoefficientReport:
    kernel: str
    k: int
    n: int
    grid: tuple
    terms: list  # dicts: label, u, v, orders, coefficient, norm
    residuals: list  # (n', L2 residual)
    moment_norm: float
    refinement_defect: float | None = None
    runtime: float = 0.0

    def coefficient(self, label: str) -> float:
        for t in self.terms:
            if t["label"] == label:
                return t["coefficient"]
        raise KeyError(label)


def _project_once(kernel, k, n, grid):
    samples = moment_m2(kernel, k, grid)
    qs, qw, M = samples.rotations, samples.weights, samples.values
    cache = {}
    terms = orth_basis_m2(k, n)
    recs = []
    levels = {m: np.zeros_like(M) for m in range(n + 1)}
    for t in terms:
        A = term_at_identity(t, qs, cache)
        norm2 = float(qw @ np.sum(A * A, axis=1))
        inner = float(qw @ np.sum(M * A, axis=1))
        c = inner / norm2
        top = max(t.u.order, t.v.order)
        for m in range(top, n + 1):
            levels[m] += c * A
        recs.append({"label": t.label(), "u": t.u.name, "v": t.v.name, "orders": [t.u.order, t.v.order],
                     "family": t.kind, "p": t.p, "q": t.q, "swap_sign": t.swap_sign,
                     "coefficient": c, "norm": math.sqrt(norm2)})
    mnorm = math.sqrt(float(qw @ np.sum(M * M, axis=1)))
    res = [(m, math.sqrt(max(0.0, float(qw @ np.sum((M - levels[m]) ** 2, axis=1))))) for m in range(n + 1)]
    return recs, res, mnorm


def project(kernel: PairKernel, k: int, n: int, grid: QuadratureGrid | None = None,
            check_refinement: bool = True) -> CoefficientReport:
    """Coefficients <M, A>/|A|^2 on the orthogonal basis, with residuals for every n' <= n."""
    if not 0 <= k <= 4:
        raise ValueError("gradient order must be 0..4")
    if n <= k and not (n == 0 == k):
        raise ValueError("the truncation order must exceed the gradient order")
    grid = grid or QuadratureGrid()
    t0 = time.perf_counter()
    recs, res, mnorm = _project_once(kernel, k, n, grid)
    defect = None
    if check_refinement:
        coarse, _, _ = _project_once(kernel, k, n, grid.coarsened())
        defect = max((abs(a["coefficient"] - b["coefficient"]) for a, b in zip(recs, coarse)), default=0.0)
        if defect > REFINE_TOL:
            raise UnderResolvedError(
                f"coefficients moved by {defect:.3g} between the grid {grid.counts} and a coarser one; "
                f"refine the grid (for example {grid.doubled().counts})"
            )
    return CoefficientReport(kernel.name, k, n, grid.counts, recs, res, mnorm, defect, time.perf_counter() - t0)


def plot_residuals(report: CoefficientReport, path: str) -> None:
    """Write the residual-versus-truncation curve as a PNG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ns = [m for m, _ in report.residuals]
    rs = [max(r, 1e-300) for _, r in report.residuals]
    fig, ax = plt.subplots(figsize=(4.5, 3.2), dpi=100)
    ax.semilogy(ns, rs, marker="o")
    ax.set_xlabel("truncation order n")
    ax.set_ylabel("L2 residual")
    ax.set_title(f"{report.kernel}, k = {report.k}")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
