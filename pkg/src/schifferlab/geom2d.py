"""Closed analytic plane curves given by finite Fourier series.

Two encodings are supported. ``polar``: r(phi) = r0 + sum_k a_k cos(k phi)
+ b_k sin(k phi) about the center. ``direct``: z(phi) = center +
sum_{k != 0} c_k exp(i k phi) with complex c_k. All curves are stored
counterclockwise.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import shapely

from ._backend import kernels
from .errors import (ConvexityError, DegenerateError, FlatPointError,
                     RegularityError, TangencyWarning)

SCAN_GRID = 4096
# grid offset (fraction of a cell) so symmetric roots never land on nodes
_GRID_SHIFT = 0.3819660112501051


class Point(NamedTuple):
    x: float
    y: float


def _grid(n, shift=0.0):
    return 2 * math.pi * (np.arange(n) + shift) / n


@dataclass(frozen=True)
class BoundaryCurve:
    kind: str
    center: Point
    coeffs: tuple  # ((k, a, b), ...)
    r0: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("polar", "direct"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        object.__setattr__(self, "center", Point(float(self.center[0]), float(self.center[1])))
        cleaned = tuple(sorted((int(k), float(a), float(b)) for k, a, b in self.coeffs))
        ks = [k for k, _, _ in cleaned]
        if len(set(ks)) != len(ks):
            raise ValueError("duplicate harmonic index")
        if self.kind == "polar" and any(k < 1 for k in ks):
            raise ValueError("polar harmonics must have k >= 1")
        if self.kind == "direct" and 0 in ks:
            raise ValueError("direct harmonics exclude k = 0 (use center)")
        object.__setattr__(self, "coeffs", cleaned)

    # -- constructors -----------------------------------------------------
    @classmethod
    def polar(cls, r0, harmonics=(), center=(0.0, 0.0), validate=True):
        """``harmonics``: mapping or iterable of (k, a_k, b_k)."""
        if isinstance(harmonics, dict):
            harmonics = [(k, *ab) for k, ab in harmonics.items()]
        curve = cls("polar", center, tuple(harmonics), float(r0))
        return curve.validated() if validate else curve

    @classmethod
    def direct(cls, harmonics, center=(0.0, 0.0), validate=True):
        """``harmonics``: mapping k -> complex c_k, or iterable of (k, Re, Im)."""
        if isinstance(harmonics, dict):
            harmonics = [(k, complex(c).real, complex(c).imag) for k, c in harmonics.items()]
        curve = cls("direct", center, tuple(harmonics))
        return curve.validated() if validate else curve

    @classmethod
    def circle(cls, radius=1.0, center=(0.0, 0.0)):
        return cls.polar(radius, (), center)

    @classmethod
    def ellipse(cls, a, b, center=(0.0, 0.0)):
        """x = a cos(phi), y = b sin(phi) about ``center``."""
        return cls.direct({1: (a + b) / 2, -1: (a - b) / 2}, center)

    # -- evaluation -------------------------------------------------------
    @property
    def harmonic_cutoff(self):
        return max((abs(k) for k, _, _ in self.coeffs), default=0)

    def derivatives(self, phi, order=2):
        """Complex z(phi), z'(phi), ... up to ``order`` as a list of arrays."""
        phi = np.asarray(phi, dtype=float)
        c = complex(*self.center)
        out = []
        if self.kind == "polar":
            r = [np.full_like(phi, self.r0), np.zeros_like(phi), np.zeros_like(phi)]
            for k, a, b in self.coeffs:
                ck, sk = np.cos(k * phi), np.sin(k * phi)
                r[0] = r[0] + a * ck + b * sk
                r[1] = r[1] + k * (-a * sk + b * ck)
                r[2] = r[2] - k * k * (a * ck + b * sk)
            e = np.exp(1j * phi)
            out = [c + r[0] * e, (r[1] + 1j * r[0]) * e,
                   (r[2] + 2j * r[1] - r[0]) * e]
        else:
            out = [np.full(phi.shape, c, dtype=complex),
                   np.zeros(phi.shape, dtype=complex),
                   np.zeros(phi.shape, dtype=complex)]
            for k, a, b in self.coeffs:
                term = complex(a, b) * np.exp(1j * k * phi)
                out[0] = out[0] + term
                out[1] = out[1] + 1j * k * term
                out[2] = out[2] - k * k * term
        return out[: order + 1]

    def z(self, phi):
        return self.derivatives(phi, 0)[0]

    def radius(self, phi):
        """r(phi) for the polar kind."""
        if self.kind != "polar":
            raise TypeError("radius is defined for polar curves only")
        phi = np.asarray(phi, dtype=float)
        r = np.full_like(phi, self.r0)
        for k, a, b in self.coeffs:
            r = r + a * np.cos(k * phi) + b * np.sin(k * phi)
        return r

    def polygon(self, n=SCAN_GRID):
        z = self.z(_grid(n))
        return np.column_stack([z.real, z.imag])

    def scale(self):
        """Characteristic length: max distance from the center on the grid."""
        if "scale" not in self._cache:
            z = self.z(_grid(SCAN_GRID))
            self._cache["scale"] = float(np.abs(z - complex(*self.center)).max())
        return self._cache["scale"]

    def signed_area(self, n=SCAN_GRID):
        z, dz = self.derivatives(_grid(n), 1)
        return float(0.5 * np.mean(np.imag(np.conj(z) * dz)) * 2 * math.pi)

    def contains(self, x, y):
        poly = self._cache.get("shape")
        if poly is None:
            poly = self._cache["shape"] = shapely.Polygon(self.polygon())
        return shapely.contains_xy(poly, np.asarray(x, float), np.asarray(y, float))

    # -- validation -------------------------------------------------------
    def validated(self):
        """Check regularity/simplicity and return a counterclockwise copy."""
        phi = _grid(SCAN_GRID)
        z, dz = self.derivatives(phi, 1)
        if self.kind == "polar" and self.radius(phi).min() <= 0:
            raise RegularityError("polar radius must stay positive")
        if np.abs(dz).min() <= 1e-12:
            raise RegularityError("parametrization has a singular point")
        if not shapely.LinearRing(np.column_stack([z.real, z.imag])).is_simple:
            raise RegularityError("curve self-intersects")
        if self.kind == "direct" and self.signed_area() < 0:
            flipped = tuple((-k, a, b) for k, a, b in self.coeffs)
            return BoundaryCurve("direct", self.center, flipped)
        return self

    def transformed(self, angle=0.0, shift=(0.0, 0.0), scale=1.0):
        """Image under x -> scale * Rot(angle) x + shift."""
        rot = scale * complex(math.cos(angle), math.sin(angle))
        c = rot * complex(*self.center) + complex(*shift)
        if self.kind == "polar":
            coeffs = []
            for k, a, b in self.coeffs:
                ca, sa = math.cos(k * angle), math.sin(k * angle)
                coeffs.append((k, scale * (a * ca - b * sa), scale * (a * sa + b * ca)))
            return BoundaryCurve("polar", (c.real, c.imag), tuple(coeffs), scale * self.r0)
        coeffs = [(k, (rot * complex(a, b)).real, (rot * complex(a, b)).imag)
                  for k, a, b in self.coeffs]
        return BoundaryCurve("direct", (c.real, c.imag), tuple(coeffs))

    # -- file format ------------------------------------------------------
    def to_dict(self):
        d = {"kind": self.kind, "center": [self.center.x, self.center.y]}
        if self.kind == "polar":
            d["r0"] = self.r0
        d["coeffs"] = [{"k": k, "a": a, "b": b} for k, a, b in self.coeffs]
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            kind = d["kind"]
            center = tuple(d["center"])
            coeffs = [(c["k"], c["a"], c["b"]) for c in d.get("coeffs", [])]
            if kind == "polar":
                return cls.polar(d["r0"], coeffs, center)
            return cls.direct(coeffs, center)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed domain description: {exc}") from exc


def load_domain(path):
    with open(path) as fh:
        return BoundaryCurve.from_dict(json.load(fh))


def save_domain(curve, path):
    with open(path, "w") as fh:
        json.dump(curve.to_dict(), fh, indent=2)


def eval_point(curve, phi):
    z = complex(curve.z(float(phi)))
    return Point(z.real, z.imag)


@dataclass(frozen=True)
class ArcLengthTable:
    phi: np.ndarray
    s: np.ndarray
    theta: np.ndarray
    kappa: np.ndarray
    speed: np.ndarray  # |z'(phi)|
    z: np.ndarray      # complex boundary samples
    total_length: float
    rotation_index: int

    @property
    def n(self):
        return self.phi.size

    @property
    def weights(self):
        """Trapezoid weights for periodic integrals in arclength."""
        return self.speed * (2 * math.pi / self.n)

    def integrate(self, values):
        return float(np.dot(self.weights, values))

    @property
    def normal(self):
        """Outward unit normal (sin theta, -cos theta) as complex numbers."""
        return np.sin(self.theta) - 1j * np.cos(self.theta)


def build_arclength_table(curve, n=1024):
    """Sampled arclength, tangent angle and signed curvature at phi = 2 pi i / n."""
    if n < 64:
        raise ValueError("need at least 64 samples")
    phi = _grid(n)
    _, dz, d2z = curve.derivatives(phi, 2)
    speed = np.abs(dz)
    if speed.min() < 1e-12:
        raise RegularityError("parametrization has a singular point")
    # spectral cumulative integral of |z'|
    ck = np.fft.rfft(speed) / n
    mean = ck[0].real
    k = np.arange(1, ck.size)
    wave = np.zeros(ck.size, dtype=complex)
    wave[1:] = ck[1:] / (1j * k)
    if n % 2 == 0:
        wave[-1] = 0.0  # Nyquist term has no antiderivative on the grid
    spectrum = wave * n
    periodic = np.fft.irfft(spectrum, n)
    s = mean * phi + periodic - periodic[0]
    theta = np.unwrap(np.angle(dz))
    end = theta[-1] + np.angle(dz[0] / dz[-1])
    rotation_index = int(round((end - theta[0]) / (2 * math.pi)))
    kappa = np.imag(np.conj(dz) * d2z) / speed ** 3
    return ArcLengthTable(phi, s, theta, kappa, speed, curve.z(phi),
                          float(mean * 2 * math.pi), rotation_index)


def curvature(curve, phi):
    _, dz, d2z = curve.derivatives(np.asarray(phi, float), 2)
    return np.imag(np.conj(dz) * d2z) / np.abs(dz) ** 3


def center_of_curvature(curve, phi):
    """Center of the osculating circle at z(phi)."""
    z, dz, d2z = (complex(v) for v in curve.derivatives(float(phi), 2))
    kappa = (np.conj(dz) * d2z).imag / abs(dz) ** 3
    if abs(kappa) < 1e-12:
        raise FlatPointError(f"curvature vanishes at phi={phi}")
    inward = 1j * dz / abs(dz)
    xi = z + inward / kappa
    return Point(xi.real, xi.imag)


def check_central_symmetry(curve, n=SCAN_GRID):
    """True iff z(phi + pi) + z(phi) = 2 * center on the grid (relative 1e-10)."""
    phi = _grid(n)
    gap = curve.z(phi + math.pi) + curve.z(phi) - 2 * complex(*curve.center)
    return bool(np.abs(gap).max() < 1e-10 * curve.scale())


def is_convex(curve, n=SCAN_GRID):
    kappa = curvature(curve, _grid(n))
    return bool(kappa.min() >= -1e-12 * np.abs(kappa).max())


@dataclass(frozen=True)
class NormalCountReport:
    probe: Point
    count: int
    roots: tuple
    degenerate: bool = False

    def to_dict(self):
        return {"probe": list(self.probe), "count": self.count,
                "roots": list(self.roots), "degenerate": self.degenerate}


def _normal_function(curve, probe):
    p = complex(*probe)

    def g(phi):
        z, dz = curve.derivatives(phi, 1)
        return np.real(np.conj(z - p) * dz)
    return g


def _scan(g, n, floor):
    phi = _grid(n, _GRID_SHIFT)
    vals = g(phi)
    nxt = np.roll(vals, -1)
    pos, pos_next = vals >= 0, nxt >= 0
    cells = np.nonzero(pos != pos_next)[0]
    near = np.abs(vals) < floor
    tangent = near & ~np.isin(np.arange(n), cells) & ~np.isin(np.arange(n), (cells + 1) % n)
    return phi, vals, cells, bool(tangent.any())


def _bisect_brackets(g, a, b, tol=1e-12):
    """Vectorized bisection of g on brackets [a_i, b_i] with a sign change."""
    ga = g(a)
    while np.max(b - a) > tol:
        m = 0.5 * (a + b)
        gm = g(m)
        left = (gm >= 0) != (ga >= 0)
        b = np.where(left, m, b)
        a = np.where(left, a, m)
        ga = np.where(left, ga, gm)
    return 0.5 * (a + b)


def normal_count(curve, probe=None, grid=SCAN_GRID):
    """Count boundary points whose normal line passes through ``probe``.

    Zeros of g(phi) = (z(phi) - probe) . z'(phi), located by a grid scan
    that doubles until the count repeats twice, then refined by bisection
    to 1e-12 in phi. With ``probe`` at the center this is the normal
    count tau of the domain.
    """
    probe = curve.center if probe is None else Point(*probe)
    if not bool(curve.contains(probe.x, probe.y)):
        raise ValueError(f"probe {tuple(probe)} is not inside the curve")
    g = _normal_function(curve, probe)
    phi = _grid(grid)
    z, dz = curve.derivatives(phi, 1)
    scale = np.abs(z - complex(*probe)).max() * np.abs(dz).max()
    floor = 1e-10 * scale
    if np.abs(g(phi)).max() < floor:
        raise DegenerateError("every normal passes through the probe")

    history = []
    n = grid
    while True:
        grid_phi, _, cells, tangent = _scan(g, n, floor)
        history.append(cells.size)
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            break
        if n >= 64 * grid:
            break
        n *= 2
    h = 2 * math.pi / n
    a = grid_phi[cells]
    roots = np.mod(_bisect_brackets(g, a, a + h), 2 * math.pi) if cells.size else np.array([])
    roots = np.sort(roots)
    if roots.size > 1:
        keep = np.concatenate([[True], np.diff(roots) > 1e-9])
        if roots[-1] - roots[0] > 2 * math.pi - 1e-9 and roots.size > 1:
            keep[-1] = False
        roots = roots[keep]
    if tangent:
        warnings.warn("non-transversal normal detected; not counted", TangencyWarning,
                      stacklevel=2)
    return NormalCountReport(probe, int(roots.size), tuple(float(r) for r in roots), tangent)


def sample_interior(curve, count, rng):
    """``count`` uniform points inside the curve by bounding-box rejection."""
    poly = curve.polygon()
    lo, hi = poly.min(axis=0), poly.max(axis=0)
    pts = np.empty((0, 2))
    while pts.shape[0] < count:
        cand = lo + (hi - lo) * rng.random((2 * count + 16, 2))
        inside = curve.contains(cand[:, 0], cand[:, 1])
        pts = np.vstack([pts, cand[inside]])
    return pts[:count]


@dataclass(frozen=True)
class AverageNormalCount:
    mean: float
    samples: int
    skipped: int

    def __float__(self):
        return self.mean


def average_normal_count(curve, samples=10000, seed=0, grid=SCAN_GRID, chunk=256,
                         require_convex=True):
    """Monte-Carlo mean of the normal count over uniform interior probes.

    Probes where every normal passes through the probe are skipped and
    counted in ``skipped``. ``require_convex=False`` lifts the convexity
    check for exploratory use on non-convex curves.
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    if require_convex and not is_convex(curve):
        raise ConvexityError("curvature changes sign")
    rng = np.random.default_rng(seed)
    probes = sample_interior(curve, samples, rng)
    phi = _grid(grid, _GRID_SHIFT)
    z, dz = curve.derivatives(phi, 1)
    zz = np.real(np.conj(z) * dz)
    total, used = 0, 0
    for start in range(0, samples, chunk):
        p = probes[start:start + chunk]
        g = zz[None, :] - p[:, :1] * dz.real[None, :] - p[:, 1:] * dz.imag[None, :]
        scale = (np.abs(z[None, :] - (p[:, 0] + 1j * p[:, 1])[:, None]).max(axis=1)
                 * np.abs(dz).max())
        ok = np.abs(g).max(axis=1) >= 1e-10 * scale
        counts = kernels.cyclic_sign_changes(np.ascontiguousarray(g[ok]), 0.0)
        total += int(counts.sum())
        used += int(ok.sum())
    return AverageNormalCount(total / used if used else float("nan"), used, samples - used)
