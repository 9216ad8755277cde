"""Neumann eigenvalue detection and the overdetermined Schiffer system by collocation.

Both problems use the Fourier-Bessel basis about the domain center and
boundary collocation points equispaced in the curve parameter.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.linalg

from .errors import DegenerateError, IllConditionedWarning
from .geom2d import (check_central_symmetry, is_convex, normal_count)
from .specfun import bessel_table
from .wavefield import WaveField

EIGEN_THRESHOLD = 1e-6
SCHIFFER_THRESHOLD = 1e-8
_RANK_TOL = 1e-14
_GOLDEN = (math.sqrt(5) - 1) / 2


def collocation_count(order):
    return 4 * order + 16


@dataclass(frozen=True)
class Basis:
    """Fourier-Bessel columns (n, 'c' | 's') about ``origin``."""
    origin: complex
    orders: tuple

    @classmethod
    def build(cls, origin, order, even_only=False):
        cols = []
        for n in range(order + 1):
            if even_only and n % 2:
                continue
            cols.append((n, "c"))
            if n:
                cols.append((n, "s"))
        return cls(complex(*origin), tuple(cols))

    @property
    def top(self):
        return max(n for n, _ in self.orders)

    def _angular(self, t):
        n = np.array([n for n, _ in self.orders])[:, None]
        is_cos = np.array([kind == "c" for _, kind in self.orders])[:, None]
        ang = np.where(is_cos, np.cos(n * t), np.sin(n * t))
        dang = np.where(is_cos, -n * np.sin(n * t), n * np.cos(n * t))
        return n.ravel(), ang, dang

    def values(self, k, pts):
        """Matrix (len(pts), ncols) of basis values at complex points."""
        rel = pts - self.origin
        r, t = np.abs(rel), np.angle(rel)
        jn = bessel_table(self.top, k * r)
        n, ang, _ = self._angular(t)
        return (jn[n] * ang).T

    def normal_derivatives(self, k, pts, normals):
        """Matrix of d/dnu of each column at complex points with unit normals."""
        rel = pts - self.origin
        r, t = np.abs(rel), np.angle(rel)
        jn = bessel_table(self.top + 1, k * r)
        n, ang, dang = self._angular(t)
        djn = np.empty((len(n), r.size))
        for i, m in enumerate(n):
            djn[i] = -jn[1] if m == 0 else 0.5 * (jn[m - 1] - jn[m + 1])
        e_r = rel / r
        nu_r = np.real(np.conj(e_r) * normals)
        nu_t = np.real(np.conj(1j * e_r) * normals)
        d_r = k * djn * ang
        d_t = jn[n] * dang / r
        return (d_r * nu_r + d_t * nu_t).T

    def to_field(self, k, coef):
        alpha = np.zeros(self.top + 1)
        beta = np.zeros(self.top + 1)
        for (n, kind), c in zip(self.orders, coef):
            if kind == "c":
                alpha[n] += c
            else:
                beta[n] += c
        return WaveField(k, (self.origin.real, self.origin.imag), alpha, beta)


@dataclass(frozen=True)
class Collocation:
    boundary: np.ndarray   # complex points
    normals: np.ndarray    # outward unit normals
    interior: np.ndarray
    check: np.ndarray      # validation points, none shared with ``boundary``
    check_normals: np.ndarray


def _boundary(domain, count, shift=0.0):
    phi = 2 * math.pi * (np.arange(count) + shift) / count
    z, dz = domain.derivatives(phi, 1)
    return z, -1j * dz / np.abs(dz)


def interior_points(domain, count, seed=0):
    """Random points c + t (z(phi) - c) that lie inside the domain.

    Parametrized through the curve so that a rigid motion of the domain
    moves the points along with it.
    """
    rng = np.random.default_rng(seed)
    c = complex(*domain.center)
    out = np.empty(0, dtype=complex)
    while out.size < count:
        t = 0.9 * np.sqrt(rng.random(2 * count))
        phi = 2 * math.pi * rng.random(2 * count)
        pts = c + t * (domain.z(phi) - c)
        pts = pts[domain.contains(pts.real, pts.imag)]
        out = np.concatenate([out, pts])
    return out[:count]


def collocation(domain, order, m=None, seed=0):
    m = collocation_count(order) if m is None else m
    z, nu = _boundary(domain, m)
    zc, nuc = _boundary(domain, 2 * m, shift=0.25)
    return Collocation(z, nu, interior_points(domain, max(m // 4, 1), seed), zc, nuc)


def _normalize_columns(A):
    norms = np.linalg.norm(A, axis=0)
    nz = norms[norms > 0]
    if nz.size and nz.max() > 1e14 * nz.min():
        warnings.warn("basis column norms span more than 14 orders of magnitude",
                      IllConditionedWarning, stacklevel=3)
    norms = np.where(norms > 0, norms, 1.0)
    return A / norms, norms


@dataclass(frozen=True)
class EigenResult:
    k_star: float
    mu: float
    sigma_min: float
    field: WaveField = dc_field(repr=False)
    neumann_residual: float = float("nan")

    def to_dict(self):
        return {"k_star": self.k_star, "mu": self.mu, "sigma_min": self.sigma_min,
                "neumann_residual": self.neumann_residual}


def _sigma_system(domain, k, order, m, seed, full_basis):
    basis = Basis.build(domain.center, order, even_only=not full_basis)
    col = collocation(domain, order, m, seed)
    B = basis.normal_derivatives(k, col.boundary, col.normals)
    interior = basis.values(k, col.interior)
    A, norms = _normalize_columns(np.vstack([B, interior]))
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    rank = int(np.count_nonzero(s > _RANK_TOL * s[0]))
    Ub = U[: B.shape[0], :rank]
    _, sb, wt = np.linalg.svd(Ub, full_matrices=False)
    return basis, col, (U, s, Vt, rank, norms), sb, wt


def sigma_min(domain, k, order, m=None, seed=0, full_basis=True):
    """Smallest singular value of the boundary block of an orthonormal basis
    for the span of [d_nu basis at boundary; basis at interior points].

    Near zero exactly when some combination has a vanishing normal
    derivative on the boundary without vanishing inside, i.e. close to a
    Neumann eigenvalue k^2. Lies in [0, 1].
    """
    *_, sb, _ = _sigma_system(domain, k, order, m, seed, full_basis)
    return float(sb[-1])


def neumann_eigenfield(domain, k, order, m=None, seed=0, full_basis=True):
    """EigenResult at a fixed k: null-vector field scaled to unit max on samples."""
    basis, col, (U, s, Vt, rank, norms), sb, wt = _sigma_system(
        domain, k, order, m, seed, full_basis)
    v = wt[-1]
    coef = (Vt[:rank].T @ (v / s[:rank])) / norms
    fld = basis.to_field(k, coef)
    samples = np.concatenate([col.interior, col.check])
    peak = np.abs(fld(samples.real, samples.imag)).max()
    fld = fld * (1.0 / peak)
    residual = np.abs(_normal_derivative(fld, col.check, col.check_normals)).max()
    return EigenResult(float(k), float(k) ** 2, float(sb[-1]), fld, float(residual))


def _normal_derivative(fld, pts, normals):
    basis = Basis.build(fld.origin, fld.order)
    coef = []
    for n, kind in basis.orders:
        coef.append(fld.alpha[n] if kind == "c" else fld.beta[n])
    return basis.normal_derivatives(fld.k, pts, normals) @ np.array(coef)


def golden_min(f, a, b, tol=1e-9):
    """Golden-section minimization of a unimodal f on [a, b]."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _grid(k_min, k_max, step):
    count = int(math.floor((k_max - k_min) / step + 1e-9)) + 1
    return k_min + step * np.arange(count)


def sigma_curve(domain, ks, order, m=None, seed=0, full_basis=True):
    return np.array([sigma_min(domain, k, order, m, seed, full_basis) for k in ks])


def _local_minima(values):
    v = np.asarray(values)
    return [i for i in range(1, v.size - 1) if v[i] < v[i - 1] and v[i] <= v[i + 1]]


def scan_neumann_eigs(domain, k_min, k_max, step, order, m=None, seed=0,
                      threshold=EIGEN_THRESHOLD, full_basis=True, return_curve=False):
    """Detected Neumann wavenumbers in [k_min, k_max], sorted.

    Grid minima of sigma_min are refined by golden-section search to 1e-9
    in k and kept when the refined value is below ``threshold``.
    """
    if not 0 < k_min < k_max:
        raise ValueError("need 0 < k_min < k_max")
    if step > 0.01 * (k_max - k_min) + 1e-15:
        raise ValueError("step must be at most 1% of the scan interval")
    ks = _grid(k_min, k_max, step)
    sig = sigma_curve(domain, ks, order, m, seed, full_basis)
    f = lambda k: sigma_min(domain, k, order, m, seed, full_basis)  # noqa: E731
    found = []
    for i in _local_minima(sig):
        k_star, s_star = golden_min(f, ks[i - 1], ks[i + 1])
        if s_star < threshold:
            found.append(neumann_eigenfield(domain, k_star, order, m, seed, full_basis))
    found.sort(key=lambda r: r.k_star)
    return (found, ks, sig) if return_curve else found


@dataclass(frozen=True)
class SchifferResult:
    k: float
    defect: float
    field: WaveField = dc_field(repr=False)

    def to_dict(self):
        return {"k": self.k, "defect": self.defect}


def _schiffer_system(domain, k, order, m, full_basis):
    even = check_central_symmetry(domain) if full_basis is None else not full_basis
    basis = Basis.build(domain.center, order, even_only=even)
    m = collocation_count(order) if m is None else m
    z, nu = _boundary(domain, m)
    A = np.vstack([basis.normal_derivatives(k, z, nu), basis.values(k, z)])
    rhs = np.concatenate([np.zeros(m), np.ones(m)])
    return basis, A, rhs, m


def schiffer_residual(domain, k, order, m=None, full_basis=None):
    """Least-squares defect of d_nu u = 0, u = 1 on the boundary at wavenumber k.

    defect = min ||[d_nu u; u - 1]|| / sqrt(2M) over the span of the basis.
    On centrally symmetric domains only even orders are used unless
    ``full_basis`` is True.
    """
    basis, A, rhs, m = _schiffer_system(domain, k, order, m, full_basis)
    As, norms = _normalize_columns(A)
    coef, *_ = scipy.linalg.lstsq(As, rhs, cond=_RANK_TOL, lapack_driver="gelsd")
    res = np.linalg.norm(As @ coef - rhs) / math.sqrt(2 * m)
    return SchifferResult(float(k), float(res), basis.to_field(k, coef / norms))


def schiffer_curve(domain, ks, order, m=None, full_basis=None):
    return np.array([schiffer_residual(domain, k, order, m, full_basis).defect for k in ks])


@dataclass(frozen=True)
class SchifferScan:
    ks: np.ndarray
    defects: np.ndarray
    k_min: float
    min_defect: float
    accepted: bool
    threshold: float = SCHIFFER_THRESHOLD

    def to_dict(self):
        return {"k_at_min": self.k_min, "min_defect": self.min_defect,
                "accepted": self.accepted, "threshold": self.threshold}


def scan_schiffer(domain, k_min, k_max, step, order, m=None, full_basis=None,
                  threshold=SCHIFFER_THRESHOLD):
    """Defect curve over a k grid; the smallest local minimum is refined by golden section."""
    ks = _grid(k_min, k_max, step)
    defects = schiffer_curve(domain, ks, order, m, full_basis)
    f = lambda k: schiffer_residual(domain, k, order, m, full_basis).defect  # noqa: E731
    best_k, best = float(ks[np.argmin(defects)]), float(defects.min())
    for i in _local_minima(defects):
        k_ref, d_ref = golden_min(f, ks[i - 1], ks[i + 1])
        if d_ref < best:
            best_k, best = float(k_ref), float(d_ref)
    return SchifferScan(ks, defects, best_k, best, best < threshold, threshold)


@dataclass(frozen=True)
class CertificateReport:
    domain_id: str
    centrally_symmetric: bool
    tau_count: int | None
    degenerate: bool
    convex: bool
    conclusion: str  # theorem_applies | hypothesis_fails | degenerate

    def to_dict(self):
        return {"domain_id": self.domain_id,
                "centrally_symmetric": self.centrally_symmetric,
                "tau_count": self.tau_count, "degenerate": self.degenerate,
                "convex": self.convex, "conclusion": self.conclusion}


def certificate(domain, domain_id="domain"):
    """Test the hypothesis of the main theorem: central symmetry and fewer than
    eight boundary normals through the center."""
    symmetric = check_central_symmetry(domain)
    degenerate = False
    tau = None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = normal_count(domain, domain.center)
        tau = report.count
        degenerate = report.degenerate
    except DegenerateError:
        degenerate = True
    except ValueError:
        tau = None  # center outside a non-symmetric domain
    if not symmetric:
        conclusion = "hypothesis_fails"
    elif degenerate:
        conclusion = "degenerate"
    elif tau < 8:
        conclusion = "theorem_applies"
    else:
        conclusion = "hypothesis_fails"
    return CertificateReport(domain_id, symmetric, tau, degenerate, is_convex(domain), conclusion)
