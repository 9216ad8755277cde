"""Reference values computed independently of the package code paths."""
import math

import numpy as np


def bessel_integral(n, x, points=None):
    """J_n(x) = (1/2pi) int_0^{2pi} cos(n t - x sin t) dt by the periodic trapezoid rule.

    The integrand is entire and periodic, so the rule converges geometrically
    once the point count exceeds n + x by a margin.
    """
    m = points or 2 * int(abs(x) + n) + 96
    t = 2 * math.pi * np.arange(m) / m
    return float(np.mean(np.cos(n * t - x * np.sin(t))))


def bessel_integral_deriv(n, x):
    """J_n'(x) = (1/2pi) int sin t sin(n t - x sin t) dt."""
    m = 2 * int(abs(x) + n) + 96
    t = 2 * math.pi * np.arange(m) / m
    return float(np.mean(np.sin(t) * np.sin(n * t - x * np.sin(t))))


def bisect(f, a, b, tol=1e-14):
    fa = f(a)
    if fa * f(b) > 0:
        raise ValueError("no sign change")
    while b - a > tol * max(1.0, abs(a)):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fa * fm <= 0:
            b = mid
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)


def bessel_zero_oracle(n, a, b):
    return bisect(lambda x: bessel_integral(n, x), a, b)


def bessel_deriv_zero_oracle(n, a, b):
    return bisect(lambda x: bessel_integral_deriv(n, x), a, b)


def ellipse_curvature(a, b, phi):
    return a * b / (a ** 2 * math.sin(phi) ** 2 + b ** 2 * math.cos(phi) ** 2) ** 1.5


def ellipse_perimeter(a, b):
    """Gauss-Kummer series, independent of any quadrature in the package."""
    h = ((a - b) / (a + b)) ** 2
    total, term = 1.0, 1.0
    for n in range(1, 60):
        term *= ((2 * n - 3) / (2 * n)) ** 2 if n > 1 else 0.25
        total += term * h ** n
    return math.pi * (a + b) * total


# first zeros, found by bisection on the integral representation
J0_ZEROS = (bessel_zero_oracle(0, 2.0, 3.0), bessel_zero_oracle(0, 5.0, 6.0))
DISC_NEUMANN = {  # j'_{n,1}
    1: bessel_deriv_zero_oracle(1, 1.5, 2.0),
    2: bessel_deriv_zero_oracle(2, 2.8, 3.3),
    0: bessel_deriv_zero_oracle(0, 3.5, 4.0),
    3: bessel_deriv_zero_oracle(3, 4.0, 4.5),
    4: bessel_deriv_zero_oracle(4, 5.0, 5.5),
}
J0_DERIV_ZEROS = (DISC_NEUMANN[0], bessel_deriv_zero_oracle(0, 6.8, 7.2))
