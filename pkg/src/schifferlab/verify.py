"""Numerical checks of boundary identities satisfied by Schiffer solutions.

All boundary integrals are periodic trapezoid sums in the curve parameter
with Jacobian |z'|, which converge geometrically for analytic data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import AllBelowFloorError, PreconditionError
from .geom2d import ArcLengthTable, build_arclength_table, check_central_symmetry
from .wavefield import (KillingField, WaveField, apply_killing, eval_grad,
                        second_derivatives)

DEFAULT_SAMPLES = 1024
SCHIFFER_ACCEPT = 1e-6
DEFAULT_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    table: ArcLengthTable
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        if np.shape(self.values) != (self.table.n,):
            raise ValueError("trace length must match the table sample count")

    def __add__(self, other):
        return BoundaryTrace(self.table, self.values + other.values, self.label)

    def __mul__(self, c):
        return BoundaryTrace(self.table, c * self.values, self.label)

    __rmul__ = __mul__

    def rows(self):
        """(phi, s, theta, value) columns for CSV dumps."""
        t = self.table
        return np.column_stack([t.phi, t.s, t.theta, self.values])


def function_trace(table, fn, label=""):
    """Trace of fn(theta) where theta is the tangent angle, e.g. ``np.cos(4 * theta)``."""
    return BoundaryTrace(table, np.asarray(fn(table.theta), dtype=float), label)


def normal_derivative(field, table):
    """d_nu field at the table's boundary samples (outward normal)."""
    gx, gy = eval_grad(field, np.column_stack([table.z.real, table.z.imag]))
    nu = table.normal
    return nu.real * gx + nu.imag * gy


def normal_derivative_trace(field, domain, killing=None, samples=DEFAULT_SAMPLES):
    table = build_arclength_table(domain, samples)
    target = field if killing is None else apply_killing(field, killing)
    label = "d_nu u" if killing is None else f"d_nu X u, X={killing}"
    return BoundaryTrace(table, normal_derivative(target, table), label)


def schiffer_defect(field, domain, samples=DEFAULT_SAMPLES):
    """RMS of (d_nu u, u - 1) on the boundary, same scaling as the collocation defect."""
    table = build_arclength_table(domain, samples)
    du = normal_derivative(field, table)
    u = field(table.z.real, table.z.imag)
    return float(math.sqrt((np.sum(du ** 2) + np.sum((u - 1) ** 2)) / (2 * table.n)))


def _require_schiffer(field, domain, tol):
    defect = schiffer_defect(field, domain)
    if defect > tol:
        raise PreconditionError(f"field is not a Schiffer solution (defect {defect:.3g} > {tol:g})")


def boundary_second_derivatives(field, domain, samples=DEFAULT_SAMPLES):
    """Errors of the three boundary Hessian formulas, each as an array over the boundary.

    For a Schiffer solution the Hessian on the boundary is lam * u * nu nu^T with
    lam = -k^2 the Laplacian eigenvalue, i.e. u_xx = (1 - cos 2t)/2 lam u,
    u_xy = -sin(2t)/2 lam u, u_yy = (1 + cos 2t)/2 lam u in the tangent angle t.
    """
    table = build_arclength_table(domain, samples)
    x, y = table.z.real, table.z.imag
    uxx, uxy, uyy = (f(x, y) for f in second_derivatives(field))
    u = field(x, y)
    lam = -field.k ** 2
    t2 = 2 * table.theta
    return (np.abs(uxx - 0.5 * (1 - np.cos(t2)) * lam * u),
            np.abs(uxy + 0.5 * np.sin(t2) * lam * u),
            np.abs(uyy - 0.5 * (1 + np.cos(t2)) * lam * u))


def boundary_second_derivative_check(field, domain, samples=DEFAULT_SAMPLES,
                                     accept=SCHIFFER_ACCEPT):
    """Max error of the boundary Hessian formulas; the field must be a Schiffer solution."""
    _require_schiffer(field, domain, accept)
    return float(max(e.max() for e in boundary_second_derivatives(field, domain, samples)))


def boundary_helmholtz_identity(field, domain, samples=DEFAULT_SAMPLES):
    """max |u_xx + u_yy + k^2 u| on the boundary, from the analytic second derivatives."""
    table = build_arclength_table(domain, samples)
    x, y = table.z.real, table.z.imag
    uxx, _, uyy = (f(x, y) for f in second_derivatives(field))
    return float(np.abs(uxx + uyy + field.k ** 2 * field(x, y)).max())


def vanishing_integrals(field, domain, killing, samples=DEFAULT_SAMPLES,
                        accept=SCHIFFER_ACCEPT):
    """|int d_nu(Xu) ds|, |int d_nu(Xu) sin 2t ds|, |int d_nu(Xu) cos 2t ds|,
    each divided by int |d_nu(Xu)| ds (plus a tiny guard)."""
    _require_schiffer(field, domain, accept)
    trace = normal_derivative_trace(field, domain, killing, samples)
    return _three_integrals(trace)


def _three_integrals(trace):
    t = trace.table
    f = trace.values
    denom = t.integrate(np.abs(f)) + 1e-300
    return tuple(abs(t.integrate(f * w)) / denom
                 for w in (1.0, np.sin(2 * t.theta), np.cos(2 * t.theta)))


@dataclass(frozen=True)
class HarmonicCoeffs:
    m_max: int
    c: np.ndarray
    s: np.ndarray

    def max_abs(self, upto=None):
        upto = self.m_max if upto is None else upto
        return float(max(np.abs(self.c[: upto + 1]).max(), np.abs(self.s[: upto + 1]).max()))


def tangent_harmonic_coeffs(trace, m_max):
    """c[m] = int f cos(m theta(s)) ds, s[m] = int f sin(m theta(s)) ds, m = 0..m_max."""
    if m_max > trace.table.n // 8:
        raise ValueError("m_max exceeds table resolution / 8")
    t = trace.table
    m = np.arange(m_max + 1)[:, None]
    wf = t.weights * trace.values
    return HarmonicCoeffs(m_max, np.cos(m * t.theta) @ wf, np.sin(m * t.theta) @ wf)


def sign_changes(trace, noise_floor=None):
    """Sign changes of a closed-loop trace after zeroing |v| <= noise_floor.

    Default floor is 1e-9 * max |trace|. Zeroed runs are skipped, so a run
    between opposite signs counts once and between equal signs not at all.
    """
    values = trace.values if isinstance(trace, BoundaryTrace) else np.asarray(trace, float)
    if noise_floor is None:
        noise_floor = DEFAULT_FLOOR * np.abs(values).max()
    if noise_floor < 0:
        raise ValueError("noise_floor must be nonnegative")
    count = int(kernels.cyclic_sign_changes(np.ascontiguousarray(values[None, :]),
                                            float(noise_floor))[0])
    if count < 0:
        raise AllBelowFloorError("every trace sample is below the noise floor")
    return count


def sturm_trial_counts(m_low, trials, seed, grid=4096, width=4):
    """Sign-change counts of random trig polynomials on harmonics m_low..m_low+width."""
    rng = np.random.default_rng(seed)
    theta = 2 * math.pi * np.arange(grid) / grid
    m = np.arange(m_low, m_low + width + 1)
    cos_t, sin_t = np.cos(np.outer(m, theta)), np.sin(np.outer(m, theta))
    a = rng.standard_normal((trials, m.size))
    b = rng.standard_normal((trials, m.size))
    values = a @ cos_t + b @ sin_t
    floor = DEFAULT_FLOOR * np.abs(values).max(axis=1)
    return kernels.cyclic_sign_changes(np.ascontiguousarray(values), floor)


def sturm_bound_check(m_low, trials=1000, seed=0, grid=4096):
    """True iff every random trig polynomial with lowest harmonic m_low
    changes sign at least 2 * m_low times around the circle."""
    if m_low < 1:
        raise ValueError("m_low must be positive")
    return bool((sturm_trial_counts(m_low, trials, seed, grid) >= 2 * m_low).all())


def interior_grid(domain, n=64):
    poly = domain.polygon()
    lo, hi = poly.min(axis=0), poly.max(axis=0)
    gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], n), np.linspace(lo[1], hi[1], n))
    inside = domain.contains(gx, gy)
    return gx[inside], gy[inside]


def iota_symmetry_defect(field, domain, n=64):
    """max |u(2c - x) - u(x)| / max |u| over interior grid points."""
    if not check_central_symmetry(domain):
        raise ValueError("domain is not centrally symmetric")
    x, y = interior_grid(domain, n)
    cx, cy = domain.center
    u = field(x, y)
    mirrored = field(2 * cx - x, 2 * cy - y)
    peak = np.abs(u).max()
    return float(np.abs(mirrored - u).max() / peak) if peak else 0.0


def green_symmetry(f, g, domain, samples=DEFAULT_SAMPLES):
    """|int (d_nu f g - f d_nu g) ds| / int (|d_nu f g| + |f d_nu g|) ds for same-k fields."""
    if f.k != g.k:
        raise ValueError("Green symmetry needs a common wavenumber")
    table = build_arclength_table(domain, samples)
    x, y = table.z.real, table.z.imag
    a = normal_derivative(f, table) * g(x, y)
    b = f(x, y) * normal_derivative(g, table)
    return abs(table.integrate(a - b)) / (table.integrate(np.abs(a) + np.abs(b)) + 1e-300)


@dataclass(frozen=True)
class CheckRow:
    check_name: str
    value: float
    threshold: float
    passed: bool
    kind: str = "max_error"  # or "count"

    def __post_init__(self):
        cast = int if self.kind == "count" else float
        object.__setattr__(self, "value", cast(self.value))
        object.__setattr__(self, "threshold", cast(self.threshold))
        object.__setattr__(self, "passed", bool(self.passed))

    def to_dict(self):
        key = "count" if self.kind == "count" else "max_error"
        return {"check_name": self.check_name, key: self.value,
                "threshold": self.threshold, "pass": self.passed}


def verification_report(field, domain, killings=None, samples=DEFAULT_SAMPLES,
                        accept=SCHIFFER_ACCEPT):
    """Full check list for an accepted Schiffer solution.

    Returns a list of CheckRow. Raises PreconditionError when the field is
    not a Schiffer solution on ``domain``.
    """
    _require_schiffer(field, domain, accept)
    rows = []
    err = boundary_second_derivative_check(field, domain, samples, accept)
    rows.append(CheckRow("boundary_second_derivatives", err, 1e-7, err < 1e-7))
    hel = boundary_helmholtz_identity(field, domain, samples)
    rows.append(CheckRow("boundary_helmholtz_identity", hel, 1e-9, hel < 1e-9))
    c = domain.center
    if killings is None:
        killings = [KillingField.constant(1, 0), KillingField.constant(0, 1),
                    KillingField.rotation((c.x + 0.3, c.y + 0.4))]
    for K in killings:
        vals = vanishing_integrals(field, domain, K, samples, accept)
        worst = max(vals)
        rows.append(CheckRow(f"vanishing_integrals[{K}]", worst, 1e-8, worst < 1e-8))
    rc = normal_derivative_trace(field, domain, KillingField.rotation(c), samples)
    # natural size of d_nu R_c u: k^2 |u| times the lever arm |z - c|
    table = rc.table
    arm = np.abs(table.z - complex(*c)).max()
    size = field.k ** 2 * np.abs(field(table.z.real, table.z.imag)).max() * arm
    coeffs = tangent_harmonic_coeffs(rc, 3)
    h = coeffs.max_abs(3) / (table.total_length * size)
    rows.append(CheckRow("rotational_trace_harmonics_0_3", h, 1e-8, h < 1e-8))
    try:
        n = sign_changes(rc, DEFAULT_FLOOR * size)
        rows.append(CheckRow("rotational_trace_sign_changes", n, 8, n >= 8, "count"))
    except AllBelowFloorError:
        # identically zero trace (disc): every boundary point is a zero
        rows.append(CheckRow("rotational_trace_sign_changes", -1, 8, True, "count"))
    if check_central_symmetry(domain):
        d = iota_symmetry_defect(field, domain)
        rows.append(CheckRow("iota_symmetry", d, 1e-6, d < 1e-6))
    return rows
