import math
import textwrap

import numpy as np
import pytest
from scipy.integrate import quad

from symexpand.kernelproj import (
    KernelError,
    PairKernel,
    QuadratureGrid,
    UnderResolvedError,
    builtin_kernel,
    isotropic_gaussian,
    load_plugin,
    moment_at,
    moment_m2,
    plant_term,
    planted_bandlimited,
    plot_residuals,
    project,
    radial_bump_integral,
    rotation_distance_gaussian,
    term_at_identity,
)
from symexpand.so3poly import euler_matrix, eval_numeric, eval_numeric_batch, haar_integral_all
from symexpand.tensors import pair_w
from symexpand.terms import m2_swap_partner_set, realize

SMALL = QuadratureGrid(8, 4, 8, 8, 12, 12)


@pytest.fixture(scope="module")
def gaussian_report():
    return project(rotation_distance_gaussian(), 0, 4)


@pytest.fixture(scope="module")
def planted():
    return planted_bandlimited()


def test_orientation_quadrature_matches_exact_haar():
    f = pair_w(2, 1, 1) ** 2
    mats, wts = QuadratureGrid().orientation_nodes()
    assert abs(wts.sum() - 1) < 1e-14
    num = float(wts @ eval_numeric_batch(f, {1: mats}))
    assert abs(num - float(haar_integral_all(f))) < 1e-10


def test_separation_quadrature_integrates_polynomials():
    pts, wts = QuadratureGrid().separation_nodes(2.0)
    g = (1 - np.sum(pts ** 2, axis=1) / 4) ** 2
    assert abs(wts @ g - radial_bump_integral(2.0)) < 1e-12
    assert abs(wts @ (g * pts[:, 0] ** 2) - radial_bump_integral(2.0, 2) / 3) < 1e-12


def test_isotropic_moments():
    kern = isotropic_gaussian()
    m1 = moment_m2(kern, 1, SMALL)
    assert np.max(np.abs(m1.values)) < 1e-12
    m0 = moment_m2(kern, 0, QuadratureGrid(32, 4, 8, 4, 4, 4))
    want = 4 * math.pi * quad(lambda x: math.exp(-x * x / 2) * x * x, 0, 6)[0]
    assert np.allclose(m0.values[:, 0], want, rtol=1e-8, atol=0)


def test_planted_moment_is_separable(planted):
    rng = np.random.default_rng(0)
    for _ in range(3):
        p1 = euler_matrix(*rng.uniform(0, 3, 3))
        p2 = euler_matrix(*rng.uniform(0, 3, 3))
        h = 0.0
        for t, c in planted.planted.items():
            h += c * eval_numeric(realize(t).coeff((0, 0, 0)), {1: p1, 2: p2})
        got = moment_at(planted, 0, p1, p2)[()]
        assert abs(got - h * radial_bump_integral(planted.radius)) < 1e-8


def test_moment_swap_covariance():
    kern = rotation_distance_gaussian()
    rng = np.random.default_rng(1)
    p1, p2 = euler_matrix(*rng.uniform(0, 3, 3)), euler_matrix(*rng.uniform(0, 3, 3))
    for k in range(4):
        a, b = moment_at(kern, k, p1, p2), moment_at(kern, k, p2, p1)
        assert np.allclose(b, (-1) ** k * a, atol=1e-8)


@pytest.mark.parametrize("name", ["isotropic-gaussian", "planted-bandlimited", "rotation-distance-gaussian"])
def test_builtin_kernels_are_swap_symmetric(name):
    assert builtin_kernel(name).swap_defect(np.random.default_rng(2)) < 1e-8


def test_planted_recovery(planted):
    rep = project(planted, 0, 2)
    scale = radial_bump_integral(planted.radius)
    want = {t.label(): c * scale for t, c in planted.planted.items()}
    for t in rep.terms:
        assert abs(t["coefficient"] - want.get(t["label"], 0.0)) <= 1e-8
    assert rep.residuals[-1][1] < 1e-8


def test_antisymmetric_plant_is_invisible():
    kern = planted_bandlimited((("W2_1", "W2_3", 0.5), ("W1_0", "W1_2", 0.3)), swap_sign=-1)
    rep = project(kern, 0, 2, SMALL, check_refinement=False)
    assert max(abs(t["coefficient"]) for t in rep.terms) < 1e-8


def test_isotropic_first_gradient_coefficients_vanish():
    rep = project(isotropic_gaussian(), 1, 2)
    assert max(abs(t["coefficient"]) for t in rep.terms) <= 1e-10


def test_residual_decay(gaussian_report):
    rs = [r for _, r in gaussian_report.residuals]
    assert all(a > b for a, b in zip(rs[1:], rs[2:]))


def test_opposite_swap_set_has_zero_coefficients():
    kern = rotation_distance_gaussian()
    for k in (0, 1):
        s = moment_m2(kern, k, SMALL)
        for t in m2_swap_partner_set(k, 2, -((-1) ** k))[:10]:
            A = term_at_identity(t, s.rotations)
            norm2 = s.weights @ np.sum(A * A, axis=1)
            if norm2 > 1e-12:
                assert abs(s.weights @ np.sum(s.values * A, axis=1)) / norm2 < 1e-8


def test_term_sampling_matches_explicit_realization():
    t = plant_term("W2_1", "W2_3")
    rng = np.random.default_rng(3)
    q = euler_matrix(*rng.uniform(0, 3, 3))
    got = term_at_identity(t, q[None])[0, 0]
    want = eval_numeric(realize(t).coeff((0, 0, 0)), {1: np.eye(3), 2: q})
    assert abs(got - want) < 1e-12


def test_grid_doubling_is_stable_for_band_limited_kernels(planted):
    a = project(planted, 0, 2, SMALL, check_refinement=False)
    b = project(planted, 0, 2, SMALL.doubled(), check_refinement=False)
    for x, y in zip(a.terms, b.terms):
        assert abs(x["coefficient"] - y["coefficient"]) < 1e-6


def test_under_resolved_grid_is_detected():
    with pytest.raises(UnderResolvedError):
        project(rotation_distance_gaussian(), 0, 2, QuadratureGrid(4, 2, 4, 2, 3, 3))


def test_project_argument_errors():
    with pytest.raises(ValueError):
        project(isotropic_gaussian(), 2, 2)
    with pytest.raises(ValueError):
        moment_m2(isotropic_gaussian(), 5)


def test_non_finite_kernel_rejected():
    bad = PairKernel("bad", lambda r, p1, p2: np.full((p2.shape[0], r.shape[0]), np.nan), 1.0, vectorized=True)
    with pytest.raises(KernelError):
        moment_m2(bad, 0, SMALL)


def test_unknown_builtin():
    with pytest.raises(KernelError):
        builtin_kernel("nope")


def test_plugin_forms(tmp_path, monkeypatch):
    (tmp_path / "kplug.py").write_text(textwrap.dedent("""
        import numpy as np
        from symexpand.kernelproj import PairKernel, isotropic_gaussian

        INSTANCE = isotropic_gaussian()

        def factory():
            return isotropic_gaussian(sigma=0.5)

        def pointwise(r, p1, p2):
            return float(np.exp(-r @ r))
        pointwise.radius = 3.0

        NOT_CALLABLE = 3
    """))
    monkeypatch.syspath_prepend(str(tmp_path))
    assert load_plugin("kplug:INSTANCE").name == "isotropic-gaussian"
    assert isinstance(load_plugin("kplug:factory"), PairKernel)
    k = load_plugin("kplug:pointwise")
    assert k.radius == 3.0 and not k.vectorized
    assert abs(k.evaluate(np.zeros((1, 3)), np.eye(3)[None], np.eye(3)[None])[0, 0] - 1.0) < 1e-15
    for bad in ("kplug:NOT_CALLABLE", "kplug:missing", "no_such_module_xyz:f", "kplug"):
        with pytest.raises(KernelError):
            load_plugin(bad)


def test_plot_residuals(tmp_path, gaussian_report):
    out = tmp_path / "res.png"
    plot_residuals(gaussian_report, str(out))
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_isotropic_second_moment_is_a_multiple_of_identity():
    m = moment_at(isotropic_gaussian(), 2, np.eye(3), np.eye(3), SMALL)
    assert m.shape == (3, 3)
    assert np.allclose(m, np.trace(m) / 3 * np.eye(3), atol=1e-10)
