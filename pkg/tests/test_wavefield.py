import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schifferlab.errors import RangeError
from schifferlab.nodal import rotational_derivative_poly
from schifferlab.specfun import bessel_j
from schifferlab.wavefield import (KillingField, TaylorJet, WaveField, analytic_jet,
                                   apply_killing, eval_field, eval_grad, laplacian_residual,
                                   load_field, save_field, second_derivatives, taylor_jet)


def random_field(rng, k=None, order=None, origin=(0.0, 0.0)):
    k = rng.uniform(0.5, 5.0) if k is None else k
    n = int(rng.integers(1, 9)) if order is None else order
    terms = {m: (rng.standard_normal(), rng.standard_normal() if m else 0.0) for m in range(n + 1)}
    return WaveField.from_terms(k, terms, origin)


def random_killing(rng):
    if rng.random() < 0.5:
        return KillingField.constant(*rng.standard_normal(2))
    return KillingField.rotation(tuple(rng.uniform(-2, 2, 2)))


def test_eval_examples():
    f = WaveField.from_terms(1.0, {0: (1.0, 0.0)})
    assert eval_field(f, (0.0, 0.0)) == 1.0
    assert eval_grad(f, (0.0, 0.0)) == pytest.approx((0.0, 0.0), abs=1e-15)
    g = WaveField.from_terms(1.0, {1: (1.0, 0.0)})
    assert eval_grad(g, (0.0, 0.0)) == pytest.approx((0.5, 0.0), abs=1e-15)


def test_eval_matches_bessel_sum():
    f = WaveField.from_terms(2.0, {0: (0.5, 0.0), 2: (1.0, -0.3), 5: (0.0, 2.0)}, origin=(0.2, -0.1))
    x, y = 1.1, 0.7
    r, t = math.hypot(x - 0.2, y + 0.1), math.atan2(y + 0.1, x - 0.2)
    ref = (0.5 * bessel_j(0, 2 * r) + bessel_j(2, 2 * r) * (math.cos(2 * t) - 0.3 * math.sin(2 * t))
           + 2.0 * bessel_j(5, 2 * r) * math.sin(5 * t))
    assert f(x, y) == pytest.approx(ref, abs=1e-14)


def test_range_error():
    f = WaveField.from_terms(10.0, {0: (1.0, 0.0)})
    with pytest.raises(RangeError):
        f(51.0, 0.0)


def test_rotation_about_origin():
    radial = WaveField.from_terms(3.0, {0: (1.0, 0.0)})
    rot = apply_killing(radial, KillingField.rotation((0.0, 0.0)))
    assert np.all(rot.alpha == 0) and np.all(rot.beta == 0)
    g = apply_killing(WaveField.from_terms(2.0, {1: (1.0, 0.0)}), KillingField.rotation((0, 0)))
    assert g.k == 2.0
    assert np.allclose(g.alpha, [0, 0]) and np.allclose(g.beta, [0, -1])


def test_translation_raises_order_by_one():
    f = WaveField.from_terms(1.5, {3: (1.0, 2.0)})
    assert apply_killing(f, KillingField.constant(1, 0)).order == 4


def _fd_along(field, K, x, y, h=1e-5):
    vx, vy = K.vector(x, y)
    return (field(x + h * vx, y + h * vy) - field(x - h * vx, y - h * vy)) / (2 * h)


def test_killing_matches_finite_differences():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        f = random_field(rng)
        K = random_killing(rng)
        x, y = rng.uniform(-2, 2, 2)
        worst = max(worst, abs(apply_killing(f, K)(x, y) - _fd_along(f, K, x, y)))
    assert worst < 1e-7


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(4)
    f = random_field(rng, k=3.0, order=6)
    p = rng.uniform(-1, 1, (20, 2))
    gx, gy = eval_grad(f, p)
    h = 1e-5
    fx = (f(p[:, 0] + h, p[:, 1]) - f(p[:, 0] - h, p[:, 1])) / (2 * h)
    fy = (f(p[:, 0], p[:, 1] + h) - f(p[:, 0], p[:, 1] - h)) / (2 * h)
    assert np.abs(gx - fx).max() < 1e-8 and np.abs(gy - fy).max() < 1e-8


def test_laplacian_residual_examples():
    f = WaveField.from_terms(1.0, {0: (1.0, 0.0)})
    assert abs(laplacian_residual(f, (0.3, 0.7))) < 1e-6
    assert laplacian_residual(WaveField.zero(2.0), (0.4, 0.1)) == 0.0


def test_laplacian_residual_random_and_commutation():
    rng = np.random.default_rng(5)
    for _ in range(20):
        f = random_field(rng, k=3.8317)
        p = rng.uniform(-1.5, 1.5, 2)
        assert abs(laplacian_residual(f, p)) < 1e-5 * f.norm()
        for K in (KillingField.constant(0.3, -1.2), KillingField.rotation(rng.uniform(-1, 1, 2))):
            assert abs(laplacian_residual(apply_killing(f, K), p)) < 1e-5 * f.norm() * 4


def test_second_derivatives_satisfy_helmholtz():
    rng = np.random.default_rng(6)
    f = random_field(rng, k=2.5, order=7)
    p = rng.uniform(-2, 2, (50, 2))
    fxx, _, fyy = second_derivatives(f)
    lap = fxx(p[:, 0], p[:, 1]) + fyy(p[:, 0], p[:, 1])
    assert np.abs(lap + f.k ** 2 * f(p[:, 0], p[:, 1])).max() < 1e-12 * f.k ** 2 * f.norm()


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_killing_is_linear(seed):
    rng = np.random.default_rng(seed)
    f, g = random_field(rng, k=2.0), random_field(rng, k=2.0)
    K = random_killing(rng)
    x, y = rng.uniform(-2, 2, 2)
    lhs = apply_killing(f + g, K)(x, y)
    rhs = apply_killing(f, K)(x, y) + apply_killing(g, K)(x, y)
    assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_rotation_decomposition(seed):
    rng = np.random.default_rng(seed)
    origin = tuple(rng.uniform(-1, 1, 2))
    f = random_field(rng, origin=origin)
    p = rng.uniform(-2, 2, 2)
    x, y = rng.uniform(-2, 2, 2)
    whole = apply_killing(f, KillingField.rotation(p))(x, y)
    parts = (apply_killing(f, KillingField.rotation(origin))(x, y)
             + apply_killing(f, KillingField.constant(p[1] - origin[1], origin[0] - p[0]))(x, y))
    assert abs(whole - parts) < 1e-12 * max(1.0, f.norm() * f.k * 4)


def test_taylor_jet_of_j0():
    jet = taylor_jet(WaveField.from_terms(1.0, {0: (1.0, 0.0)}), (0.0, 0.0), 0.0)
    assert jet[0, 0] == pytest.approx(1.0, abs=1e-9)
    assert abs(jet[1, 0]) < 1e-9 and abs(jet[0, 1]) < 1e-9
    assert jet[2, 0] == pytest.approx(-0.25, abs=1e-7)
    assert jet[0, 2] == pytest.approx(-0.25, abs=1e-7)
    assert jet.harmonic_defect() < 1e-8


def test_fitted_jet_matches_analytic_jet():
    rng = np.random.default_rng(7)
    for _ in range(10):
        f = random_field(rng, order=6)
        base, angle = rng.uniform(-1, 1, 2), rng.uniform(0, 2 * math.pi)
        fit, ref = taylor_jet(f, base, angle), analytic_jet(f, base, angle)
        assert np.abs(fit.w - ref.w).max() < 1e-6 * max(1.0, np.abs(ref.w).max())
        assert fit.harmonic_defect() < 1e-8


def test_jet_of_rotated_field_matches_polynomial_identity():
    rng = np.random.default_rng(8)
    for _ in range(10):
        f = random_field(rng, k=rng.uniform(0.5, 3), order=6)
        base = rng.uniform(-1, 1, 2)
        p = rng.uniform(-2, 2, 2)
        q = p - base
        lhs = taylor_jet(apply_killing(f, KillingField.rotation(p)), base).w
        rhs = rotational_derivative_poly(analytic_jet(f, base).w, q)
        scale = max(1.0, np.abs(rhs).max())
        for i in range(4):
            for j in range(4 - i):  # degree-4 terms of R_q w need degree-5 terms of w
                assert abs(lhs[i, j] - rhs[i, j]) < 1e-6 * scale


def test_jet_frames_roundtrip():
    jet = TaylorJet.from_coeffs({(0, 0): 1.0}, base=(1.0, 2.0), frame_angle=0.7)
    q = jet.to_local((1.5, 2.5))
    assert jet.to_global(q) == pytest.approx((1.5, 2.5), abs=1e-15)


def test_field_file_roundtrip(tmp_path):
    f = WaveField.from_terms(2.5, {0: (1.0, 0.0), 3: (0.25, -0.5)}, origin=(0.1, 0.2))
    path = tmp_path / "f.json"
    save_field(f, path)
    data = json.loads(path.read_text())
    assert set(data) == {"k", "origin", "coeffs"}
    assert data["coeffs"][1] == {"n": 3, "alpha": 0.25, "beta": -0.5}
    g = load_field(path)
    assert g.k == f.k and g.origin == f.origin
    assert np.array_equal(g.alpha, f.alpha) and np.array_equal(g.beta, f.beta)


def test_killing_field_validation():
    with pytest.raises(ValueError):
        KillingField.constant(0, 0)
    assert str(KillingField.rotation((1, 0))) == "rot:1,0"
    assert str(KillingField.constant(0.5, -1)) == "const:0.5,-1"
