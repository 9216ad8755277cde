"""Entire Helmholtz solutions as Fourier-Bessel expansions.

A field is w = sum_n J_n(k r) (alpha_n cos n t + beta_n sin n t) in polar
coordinates (r, t) about ``origin``; it solves w_xx + w_yy + k^2 w = 0 on
the whole plane. Killing fields (translations, rotations) map such a field
to another one with the same k, so they are applied on coefficients.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import RangeError
from .geom2d import Point
from .specfun import MAX_ARG, bessel_table


@dataclass(frozen=True, eq=False)
class WaveField:
    k: float
    origin: Point
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("wavenumber must be positive")
        alpha = np.array(self.alpha, dtype=float)
        beta = np.array(self.beta, dtype=float)
        if alpha.shape != beta.shape or alpha.ndim != 1 or alpha.size == 0:
            raise ValueError("alpha and beta must be equal-length 1-d arrays")
        beta[0] = 0.0
        alpha.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "origin", Point(*map(float, self.origin)))

    @classmethod
    def from_terms(cls, k, terms, origin=(0.0, 0.0), order=None):
        """``terms``: mapping n -> (alpha_n, beta_n)."""
        top = max(terms, default=0) if order is None else order
        alpha, beta = np.zeros(top + 1), np.zeros(top + 1)
        for n, (a, b) in terms.items():
            alpha[n], beta[n] = a, b
        return cls(float(k), origin, alpha, beta)

    @classmethod
    def zero(cls, k, origin=(0.0, 0.0)):
        return cls(float(k), origin, np.zeros(1), np.zeros(1))

    @property
    def order(self):
        """Angular cutoff N."""
        return self.alpha.size - 1

    @property
    def mu(self):
        return self.k ** 2

    def norm(self):
        """sum |alpha_n| + |beta_n|, an upper bound for sup |w| since |J_n| <= 1."""
        return float(np.abs(self.alpha).sum() + np.abs(self.beta).sum())

    def __add__(self, other):
        if other.k != self.k or other.origin != self.origin:
            raise ValueError("fields must share k and origin")
        n = max(self.order, other.order) + 1
        a, b = np.zeros(n), np.zeros(n)
        a[: self.alpha.size] += self.alpha
        b[: self.beta.size] += self.beta
        a[: other.alpha.size] += other.alpha
        b[: other.beta.size] += other.beta
        return WaveField(self.k, self.origin, a, b)

    def __mul__(self, c):
        return WaveField(self.k, self.origin, c * self.alpha, c * self.beta)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1.0) * other

    def truncated(self, order):
        return WaveField(self.k, self.origin, self.alpha[: order + 1].copy(),
                         self.beta[: order + 1].copy())

    # -- evaluation -------------------------------------------------------
    def _polar(self, x, y):
        dx = np.asarray(x, float) - self.origin.x
        dy = np.asarray(y, float) - self.origin.y
        r = np.hypot(dx, dy)
        if r.size and r.max() * self.k > MAX_ARG:
            raise RangeError(f"point beyond supported radius {MAX_ARG / self.k:g}")
        return r, np.arctan2(dy, dx)

    def basis(self, x, y):
        """J_n(kr) cos(nt), J_n(kr) sin(nt) for n = 0..N, each of shape (N+1,) + x.shape."""
        r, t = self._polar(x, y)
        n = np.arange(self.order + 1).reshape((-1,) + (1,) * r.ndim)
        jn = bessel_table(self.order, self.k * r)
        return jn * np.cos(n * t), jn * np.sin(n * t)

    def __call__(self, x, y):
        c, s = self.basis(x, y)
        return np.tensordot(self.alpha, c, 1) + np.tensordot(self.beta, s, 1)

    # -- two-sided complex form -------------------------------------------
    def _two_sided(self):
        """d_m, m = -N..N, with w = sum_m d_m J_m(kr) e^{imt}."""
        n = self.order
        d = np.zeros(2 * n + 1, dtype=complex)
        d[n] = self.alpha[0]
        m = np.arange(1, n + 1)
        half = (self.alpha[1:] - 1j * self.beta[1:]) / 2
        d[n + m] = half
        d[n - m] = (-1.0) ** m * np.conj(half)
        return d

    @classmethod
    def _from_two_sided(cls, k, origin, d):
        n = (d.size - 1) // 2
        alpha, beta = np.zeros(n + 1), np.zeros(n + 1)
        alpha[0] = d[n].real
        m = np.arange(1, n + 1)
        # average the +m and -m copies; they agree for real fields
        half = 0.5 * (d[n + m] + (-1.0) ** m * np.conj(d[n - m]))
        alpha[1:] = 2 * half.real
        beta[1:] = -2 * half.imag
        return cls(k, origin, alpha, beta)

    def to_dict(self):
        return {"k": self.k, "origin": list(self.origin),
                "coeffs": [{"n": n, "alpha": float(a), "beta": float(b)}
                           for n, (a, b) in enumerate(zip(self.alpha, self.beta))
                           if a or b]}

    @classmethod
    def from_dict(cls, d):
        try:
            terms = {int(c["n"]): (float(c["alpha"]), float(c.get("beta", 0.0)))
                     for c in d["coeffs"]}
            return cls.from_terms(float(d["k"]), terms, tuple(d.get("origin", (0, 0))))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed field description: {exc}") from exc


def load_field(path):
    with open(path) as fh:
        return WaveField.from_dict(json.load(fh))


def save_field(field, path):
    with open(path, "w") as fh:
        json.dump(field.to_dict(), fh, indent=2)


def _xy(p):
    p = np.asarray(p, dtype=float)
    return p[..., 0], p[..., 1]


def eval_field(field, p):
    """Value at a point (or an array of points with trailing axis 2)."""
    out = field(*_xy(p))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class KillingField:
    """Translation a d/dx + b d/dy, or rotation d/dtheta about ``center``."""
    kind: str
    a: float = 0.0
    b: float = 0.0
    center: Point | None = None

    def __post_init__(self):
        if self.kind == "constant":
            if self.a == 0 and self.b == 0:
                raise ValueError("constant Killing field must be nonzero")
        elif self.kind == "rotation":
            object.__setattr__(self, "center", Point(*map(float, self.center)))
        else:
            raise ValueError(f"unknown Killing field kind {self.kind!r}")

    @classmethod
    def constant(cls, a, b):
        return cls("constant", float(a), float(b))

    @classmethod
    def rotation(cls, p):
        return cls("rotation", center=p)

    def vector(self, x, y):
        """Components of the vector field at (x, y)."""
        if self.kind == "constant":
            return np.full_like(np.asarray(x, float), self.a), np.full_like(np.asarray(y, float), self.b)
        return -(np.asarray(y, float) - self.center.y), np.asarray(x, float) - self.center.x

    def __str__(self):
        if self.kind == "constant":
            return f"const:{self.a:g},{self.b:g}"
        return f"rot:{self.center.x:g},{self.center.y:g}"


def _translate(field, a, b):
    d = field._two_sided()
    n = field.order
    padded = np.zeros(2 * n + 5, dtype=complex)
    padded[2:-2] = d
    up, down = padded[2:], padded[:-2]   # d_{m+1}, d_{m-1} for m = -(N+1)..N+1
    half_k = field.k / 2
    e = a * half_k * (up - down) + b * 1j * half_k * (up + down)
    return WaveField._from_two_sided(field.k, field.origin, e)


def _rotate_about_origin(field):
    n = np.arange(field.order + 1)
    return WaveField(field.k, field.origin, n * field.beta, -n * field.alpha)


def apply_killing(field, K):
    """The field X w for a Killing field X, as a new WaveField with the same k.

    Rotation about the expansion origin is diagonal in n. Translations
    shift orders by one, so the cutoff grows by 1. A rotation about another
    point p splits as R_p = R_origin + (p_y - o_y) d/dx + (o_x - p_x) d/dy.
    """
    if K.kind == "constant":
        return _translate(field, K.a, K.b)
    rot = _rotate_about_origin(field)
    a = K.center.y - field.origin.y
    b = field.origin.x - K.center.x
    if a == 0 and b == 0:
        return rot
    return rot + _translate(field, a, b)


def eval_grad(field, p):
    """(w_x, w_y) at p, exact through the translated expansions."""
    x, y = _xy(p)
    gx = _translate(field, 1.0, 0.0)(x, y)
    gy = _translate(field, 0.0, 1.0)(x, y)
    if np.ndim(gx) == 0:
        return float(gx), float(gy)
    return gx, gy


def second_derivatives(field):
    """Fields w_xx, w_xy, w_yy."""
    wx = _translate(field, 1.0, 0.0)
    wy = _translate(field, 0.0, 1.0)
    return _translate(wx, 1.0, 0.0), _translate(wx, 0.0, 1.0), _translate(wy, 0.0, 1.0)


def laplacian_residual(field, p):
    """w_xx + w_yy + k^2 w by 5-point differences; a test probe only."""
    x, y = _xy(p)
    h = 1e-4 * max(1.0, 1.0 / field.k)
    c = field(x, y)
    lap = (field(x + h, y) + field(x - h, y) + field(x, y + h) + field(x, y - h) - 4 * c) / h ** 2
    out = lap + field.k ** 2 * c
    return float(out) if np.ndim(out) == 0 else out


JET_ORDER = 4
JET_RADIUS = 1e-2
JET_STENCIL = 9
JET_FIT_DEGREE = 6


@dataclass(frozen=True, eq=False)
class TaylorJet:
    """Taylor coefficients w[i, j] of d_x^i d_y^j w / (i! j!) in adapted coordinates.

    Adapted coordinates put ``base`` at the origin with the local x-axis
    along the direction ``frame_angle``.
    """
    base: Point
    frame_angle: float
    w: np.ndarray  # (5, 5), entries with i + j > 4 unused
    k: float | None = None

    def __getitem__(self, ij):
        return float(self.w[ij])

    @classmethod
    def from_coeffs(cls, coeffs, base=(0.0, 0.0), frame_angle=0.0, k=None):
        w = np.zeros((JET_ORDER + 1, JET_ORDER + 1))
        for (i, j), v in coeffs.items():
            if i + j > JET_ORDER:
                raise ValueError("jet stores orders up to 4")
            w[i, j] = v
        return cls(Point(*base), frame_angle, w, k)

    def polynomial(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        out = np.zeros(np.broadcast(x, y).shape)
        for i in range(JET_ORDER + 1):
            for j in range(JET_ORDER + 1 - i):
                if self.w[i, j]:
                    out = out + self.w[i, j] * x ** i * y ** j
        return out

    def to_local(self, p):
        """Global point -> adapted coordinates."""
        dx, dy = p[0] - self.base.x, p[1] - self.base.y
        c, s = math.cos(self.frame_angle), math.sin(self.frame_angle)
        return Point(c * dx + s * dy, -s * dx + c * dy)

    def to_global(self, q):
        c, s = math.cos(self.frame_angle), math.sin(self.frame_angle)
        return Point(self.base.x + c * q[0] - s * q[1], self.base.y + s * q[0] + c * q[1])

    def harmonic_defect(self):
        """|2 w20 + 2 w02 + k^2 w00|, relative to the largest term."""
        lhs = 2 * self.w[2, 0] + 2 * self.w[0, 2] + self.k ** 2 * self.w[0, 0]
        scale = abs(2 * self.w[2, 0]) + abs(2 * self.w[0, 2]) + abs(self.k ** 2 * self.w[0, 0])
        return abs(lhs) / scale if scale else abs(lhs)


def _monomials(degree):
    return [(i, j) for d in range(degree + 1) for i in range(d, -1, -1) for j in [d - i]]


def taylor_jet(field, base, frame_angle=0.0, radius=JET_RADIUS, stencil=JET_STENCIL,
               fit_degree=JET_FIT_DEGREE):
    """Least-squares polynomial fit of the field on a square stencil in adapted coordinates.

    The fit uses all monomials of total degree <= ``fit_degree`` (in units of
    the stencil radius) and reports those of degree <= 4; fitting beyond the
    reported order keeps the degree-5 and degree-6 parts from aliasing into
    the reported coefficients.
    """
    base = Point(*base)
    u = np.linspace(-1.0, 1.0, stencil)
    U, V = np.meshgrid(u, u, indexing="ij")
    U, V = U.ravel(), V.ravel()
    c, s = math.cos(frame_angle), math.sin(frame_angle)
    lx, ly = radius * U, radius * V
    values = field(base.x + c * lx - s * ly, base.y + s * lx + c * ly)
    monos = _monomials(fit_degree)
    A = np.column_stack([U ** i * V ** j for i, j in monos])
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    w = np.zeros((JET_ORDER + 1, JET_ORDER + 1))
    for (i, j), v in zip(monos, coef):
        if i + j <= JET_ORDER:
            w[i, j] = v / radius ** (i + j)
    return TaylorJet(base, float(frame_angle), w, field.k)


def analytic_jet(field, base, frame_angle=0.0):
    """Jet from exact repeated translation of the expansion (reference path)."""
    base = Point(*base)
    c, s = math.cos(frame_angle), math.sin(frame_angle)
    w = np.zeros((JET_ORDER + 1, JET_ORDER + 1))
    row = field
    for i in range(JET_ORDER + 1):
        col = row
        for j in range(JET_ORDER + 1 - i):
            w[i, j] = float(col(base.x, base.y)) / (factorial(i) * factorial(j))
            col = _translate(col, -s, c)
        row = _translate(row, c, s)
    return TaylorJet(base, float(frame_angle), w, field.k)
