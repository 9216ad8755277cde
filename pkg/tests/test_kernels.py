import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schifferlab import _backend, _pykernels

ck = pytest.importorskip("schifferlab._ckernels")


def test_backend_selected():
    assert _backend.BACKEND in ("cython", "python")


@settings(max_examples=100, deadline=None)
@given(rows=st.integers(1, 5), cols=st.integers(1, 40), seed=st.integers(0, 10 ** 6),
       floor=st.floats(0, 0.5))
def test_sign_change_kernels_agree(rows, cols, seed, floor):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((rows, cols))
    v[rng.random((rows, cols)) < 0.2] = 0.0
    a = _pykernels.cyclic_sign_changes(v, floor)
    b = ck.cyclic_sign_changes(v, floor)
    assert np.array_equal(a, b)


def test_all_below_floor_marker():
    for k in (_pykernels, ck):
        assert k.cyclic_sign_changes(np.zeros((1, 5)), 0.0)[0] == -1


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10 ** 6), ny=st.integers(2, 12), nx=st.integers(2, 12))
def test_marching_squares_kernels_agree(seed, ny, nx):
    rng = np.random.default_rng(seed)
    f = rng.standard_normal((ny + 1, nx + 1))
    saddle = (rng.random((ny, nx)) < 0.5).astype(np.uint8)
    pa, ea = _pykernels.marching_squares(f, saddle)
    pb, eb = ck.marching_squares(f, saddle)
    order_a = np.lexsort(ea.T)
    order_b = np.lexsort(eb.T)
    assert np.array_equal(ea[order_a], eb[order_b])
    assert np.allclose(pa[order_a], pb[order_b], atol=1e-15)


@pytest.mark.parametrize("impl", [_pykernels, ck])
def test_marching_squares_saddle_resolution(impl):
    f = np.array([[1.0, -1.0], [-1.0, 1.0]])  # corners 0 and 2 positive
    # center positive: the positive corners connect, so the segments cut off the negative corners
    _, e_pos = impl.marching_squares(f, np.ones((1, 1), np.uint8))
    _, e_neg = impl.marching_squares(f, np.zeros((1, 1), np.uint8))
    assert len(e_pos) == len(e_neg) == 2
    assert {frozenset(p) for p in e_pos.tolist()} != {frozenset(p) for p in e_neg.tolist()}


@pytest.mark.parametrize("impl", [_pykernels, ck])
def test_marching_squares_circle(impl):
    n = 64
    x = np.linspace(-1, 1, n + 1)
    X, Y = np.meshgrid(x, x)
    f = X ** 2 + Y ** 2 - 0.5 ** 2
    pts, _ = impl.marching_squares(f, np.zeros((n, n), np.uint8))
    h = 2 / n
    xs = -1 + h * pts[:, [0, 2]]
    ys = -1 + h * pts[:, [1, 3]]
    assert np.abs(np.hypot(xs, ys) - 0.5).max() < h ** 2


def test_miller_start_agrees():
    for n, x in ((0, 0.5), (10, 100.0), (128, 500.0)):
        assert _pykernels.miller_start(n, x) == ck.miller_start(n, x)
