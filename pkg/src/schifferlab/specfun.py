"""Bessel functions of the first kind J_n, their derivatives and derivative zeros."""
import math

import numpy as np

from ._backend import kernels
from .errors import DomainError

MAX_ORDER = 128
MAX_ARG = 500.0


def _check(n, x):
    if not (isinstance(n, (int, np.integer)) and 0 <= n <= MAX_ORDER):
        raise DomainError(f"unsupported Bessel order {n!r}")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(xa > MAX_ARG) or np.any(~np.isfinite(xa)):
        raise DomainError(f"argument outside [0, {MAX_ARG}]")
    return xa


def bessel_table(nmax, x):
    """Array of shape ``(nmax + 1,) + x.shape`` holding J_0(x) .. J_nmax(x).

    No range checks; callers in this package keep ``x`` in [0, 500].
    """
    x = np.asarray(x, dtype=float)
    return kernels.bessel_table(int(nmax), x.ravel()).reshape((nmax + 1,) + x.shape)


def bessel_j(n, x):
    """J_n(x) for integer 0 <= n <= 128 and 0 <= x <= 500.

    Ascending series (extended precision) below x = 12, Miller's
    downward recurrence normalized by J_0 + 2*sum(J_2k) = 1 above.
    Accepts scalars or arrays.
    """
    xa = _check(n, x)
    out = bessel_table(n, xa)[n]
    return float(out) if np.ndim(x) == 0 else out


def bessel_j_deriv(n, x):
    """J_n'(x) = (J_{n-1}(x) - J_{n+1}(x)) / 2, with J_0' = -J_1."""
    xa = _check(n, x)
    tab = bessel_table(n + 1, xa)
    out = -tab[1] if n == 0 else 0.5 * (tab[n - 1] - tab[n + 1])
    return float(out) if np.ndim(x) == 0 else out


def _bisect(f, a, b, tol):
    fa = f(a)
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def bessel_deriv_zero(n, m):
    """m-th positive zero of J_n' (x = 0 excluded for n = 0).

    Sign-change scan with step 0.1 from max(n, 0.5), then bisection.
    """
    if not (isinstance(m, (int, np.integer)) and 1 <= m <= 64):
        raise DomainError(f"zero index {m!r} out of range 1..64")
    _check(n, 0.0)
    f = lambda t: bessel_j_deriv(n, t)  # noqa: E731
    step = 0.1
    a = max(float(n), 0.5)
    fa = f(a)
    found = 0
    while a < MAX_ARG:
        b = a + step
        fb = f(b)
        if fa == 0 or (fa > 0) != (fb > 0):
            found += 1
            if found == m:
                return _bisect(f, a, b, 1e-13)
        a, fa = b, fb
    raise DomainError(f"zero ({n}, {m}) beyond supported argument range")


def bessel_zero(n, m):
    """m-th positive zero of J_n, same scan-and-bisect scheme."""
    _check(n, 0.0)
    f = lambda t: bessel_j(n, t)  # noqa: E731
    a = max(float(n), 0.5)
    fa = f(a)
    found = 0
    while a < MAX_ARG:
        b = a + 0.1
        fb = f(b)
        if (fa > 0) != (fb > 0):
            found += 1
            if found == m:
                return _bisect(f, a, b, 1e-13)
        a, fa = b, fb
    raise DomainError(f"zero ({n}, {m}) beyond supported argument range")

