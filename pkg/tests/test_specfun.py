import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schifferlab import _pykernels
from schifferlab.errors import DomainError
from schifferlab.specfun import (MAX_ARG, MAX_ORDER, bessel_deriv_zero, bessel_j,
                                 bessel_j_deriv, bessel_table, bessel_zero)

from oracles import (DISC_NEUMANN, J0_DERIV_ZEROS, J0_ZEROS, bessel_integral,
                     bessel_integral_deriv)


def test_values_at_origin(backend):
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    assert bessel_j_deriv(0, 0.0) == 0.0
    assert bessel_j_deriv(1, 0.0) == 0.5


def test_first_zero_of_j0(backend):
    assert abs(bessel_j(0, 2.4048255577)) < 1e-10
    assert abs(bessel_j_deriv(0, 3.8317059702)) < 1e-10


def test_integral_representation_point(backend):
    assert bessel_j(5, 7.3) == pytest.approx(bessel_integral(5, 7.3), abs=1e-10)


@pytest.mark.parametrize("n", [0, 1, 2, 5, 13, 40, 90, 128])
def test_matches_integral_oracle(backend, n):
    xs = np.concatenate([np.linspace(0, 20, 41), np.linspace(20, MAX_ARG, 37)])
    got = bessel_j(n, xs)
    ref = np.array([bessel_integral(n, x) for x in xs])
    # relative where the value is not tiny, absolute near zeros and in the evanescent zone
    err = np.abs(got - ref) / np.maximum(np.abs(ref), 1e-3)
    assert err.max() < 1e-11


@pytest.mark.parametrize("n", [0, 1, 3, 8])
def test_derivative_matches_integral_oracle(backend, n):
    xs = np.linspace(0.05, 60, 50)
    got = bessel_j_deriv(n, xs)
    ref = np.array([bessel_integral_deriv(n, x) for x in xs])
    assert np.abs(got - ref).max() < 1e-12


def test_small_values_relative_accuracy(backend):
    # deep in the evanescent region the series branch keeps full relative accuracy
    for n, x in ((30, 1.0), (60, 5.0), (128, 0.5)):
        ref = (x / 2) ** n / math.factorial(n) * (1 - (x / 2) ** 2 / (n + 1))
        assert bessel_j(n, x) == pytest.approx(ref, rel=1e-4 * (x / 2) ** 4 / (n + 1) ** 2 + 1e-13)


def test_series_and_miller_agree_on_overlap():
    x = np.linspace(8, 16, 81)
    series = _pykernels.bessel_series_table(40, x)
    miller = _pykernels.bessel_miller_table(40, x)
    assert np.abs(series - miller).max() < 1e-11


def test_compiled_and_numpy_tables_agree():
    ck = pytest.importorskip("schifferlab._ckernels")
    x = np.linspace(0, 500, 2001)
    assert np.abs(ck.bessel_table(60, x) - _pykernels.bessel_table(60, x)).max() < 1e-13


def test_table_shape_and_consistency(backend):
    x = np.array([[0.5, 3.0], [12.0, 44.0]])
    t = bessel_table(6, x)
    assert t.shape == (7, 2, 2)
    assert t[3, 1, 1] == pytest.approx(bessel_j(3, 44.0), abs=1e-15)


def test_normalization_sum(backend):
    for x in (0.3, 7.0, 25.0, 50.0):
        kmax = int(x) + 40
        t = bessel_table(kmax, np.array([x]))[:, 0]
        assert abs(t[0] ** 2 + 2 * np.sum(t[1:] ** 2) - 1) < 1e-10


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, MAX_ORDER - 1), x=st.floats(1e-3, MAX_ARG))
def test_recurrence_residual(n, x):
    lo, mid, hi = bessel_j(n - 1, x), bessel_j(n, x), bessel_j(n + 1, x)
    assert abs(lo + hi - 2 * n / x * mid) < 1e-10 * max(1.0, abs(mid))


def test_known_derivative_zeros(backend):
    assert bessel_deriv_zero(1, 1) == pytest.approx(1.8411837813, abs=1e-10)
    assert bessel_deriv_zero(0, 1) == pytest.approx(3.8317059702, abs=1e-10)
    assert bessel_deriv_zero(2, 1) == pytest.approx(3.0542369282, abs=1e-10)


def test_zeros_match_bisection_oracle(backend):
    for n, ref in DISC_NEUMANN.items():
        assert bessel_deriv_zero(n, 1) == pytest.approx(ref, abs=1e-11)
    assert bessel_deriv_zero(0, 2) == pytest.approx(J0_DERIV_ZEROS[1], abs=1e-11)
    assert bessel_zero(0, 1) == pytest.approx(J0_ZEROS[0], abs=1e-11)
    assert bessel_zero(0, 2) == pytest.approx(J0_ZEROS[1], abs=1e-11)


def test_deriv_zeros_are_zeros_and_increase(backend):
    zs = [bessel_deriv_zero(3, m) for m in range(1, 21)]
    assert np.all(np.diff(zs) > 0)
    assert max(abs(bessel_j_deriv(3, z)) for z in zs) < 1e-11


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_j(0, -1.0)
    with pytest.raises(DomainError):
        bessel_j(0, MAX_ARG + 1)
    with pytest.raises(DomainError):
        bessel_j(MAX_ORDER + 1, 1.0)
    with pytest.raises(DomainError):
        bessel_j(-1, 1.0)
    with pytest.raises(DomainError):
        bessel_deriv_zero(0, 65)
    with pytest.raises(DomainError):
        bessel_deriv_zero(0, 0)
