"""Nodal sets of Helmholtz fields and the vertex-degree trichotomy at critical arcs.

Vertex degree is measured as the number of sign changes of the field on a
small circle around the point, stabilized over three radii.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
from numpy.polynomial import polynomial as P

from ._backend import kernels
from .errors import (FlatError, NonzeroWarning, NormalFormError,
                     UnstableCountError)
from .geom2d import Point
from .wavefield import TaylorJet, WaveField, eval_grad, second_derivatives

RING_SAMPLES = 512
RING_DEADBAND = 1e-12
NORMAL_FORM_TOL = 1e-8
DEGENERACY_TOL = 1e-6
ORACLE_RADII = (1e-2, 1e-3)


def _ring_count(f, p, eps, n):
    t = 2 * math.pi * (np.arange(n) + 0.5) / n
    vals = np.asarray(f(p[0] + eps * np.cos(t), p[1] + eps * np.sin(t)), dtype=float)
    peak = np.abs(vals).max()
    c = int(kernels.cyclic_sign_changes(vals[None, :], RING_DEADBAND * peak)[0])
    return max(c, 0)


def ring_degree(f, p, eps, n_samples=RING_SAMPLES):
    """Sign changes of f on circles of radius eps, eps/2, eps/4 about p.

    ``f`` is a vectorized callable f(x, y). Raises UnstableCountError if
    the three counts differ.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if n_samples < 256:
        raise ValueError("need at least 256 ring samples")
    counts = [_ring_count(f, p, eps / d, n_samples) for d in (1, 2, 4)]
    if len(set(counts)) != 1:
        raise UnstableCountError(f"ring counts {counts} at {tuple(p)} disagree")
    return counts[0]


class DegreeClass(enum.Enum):
    TWO = "two"
    FOUR = "four"
    SIX_OR_MORE = "six_or_more"

    @property
    def min_degree(self):
        return {"two": 2, "four": 4, "six_or_more": 6}[self.value]

    def matches(self, degree):
        if self is DegreeClass.SIX_OR_MORE:
            return degree >= 6
        return degree == self.min_degree


def _jet_scale(jet):
    return max(abs(jet[0, 0]), abs(jet[0, 2]), abs(jet[0, 3]))


def check_normal_form(jet, tol=NORMAL_FORM_TOL):
    """Raise NormalFormError unless w10 = w01 = w20 = w11 = w30 = 0 and w00, w02 != 0."""
    scale = _jet_scale(jet)
    for ij in ((1, 0), (0, 1), (2, 0), (1, 1), (3, 0)):
        if abs(jet[ij]) > tol * scale:
            raise NormalFormError(f"jet coefficient w{ij[0]}{ij[1]} = {jet[ij]:.3g} is not zero")
    if abs(jet[0, 0]) <= tol * scale or abs(jet[0, 2]) <= tol * scale:
        raise NormalFormError("normal form needs w00 != 0 and w02 != 0")
    # the cubic partner terms are either omitted or harmonic-consistent
    for ij, partner in (((2, 1), (0, 3)), ((1, 2), (3, 0))):
        if jet[ij] and abs(jet[ij] + 3 * jet[partner]) > tol * scale:
            raise NormalFormError(f"w{ij[0]}{ij[1]} is inconsistent with a harmonic cubic part")


def degeneracy_margin(jet, q):
    """|2 w02 - 6 y_q w03| / (|2 w02| + |6 y_q w03|): the relative size of the
    xy coefficient of R_q w for q = (0, y_q) on the normal."""
    a, b = 2 * jet[0, 2], 6 * q[1] * jet[0, 3]
    return abs(a - b) / (abs(a) + abs(b))


def curvature_center_offset(jet):
    """Signed distance along the adapted y-axis to the degenerate rotation
    center, w02 / (3 w03)."""
    return jet[0, 2] / (3 * jet[0, 3])


def curvature_radius_candidates(jet):
    """Candidate readings of the radius of curvature from a normal-form jet.

    ``center_offset`` = w02 / (3 w03) is the distance to the point where the
    xy term of R_q w cancels; ``osculating`` = 2 w02 / (3 w03) follows from
    y ~ x^2 / (2 rho) combined with the relation 2 f'' w02 = 3 w03.
    """
    return {"center_offset": curvature_center_offset(jet),
            "osculating": 2 * jet[0, 2] / (3 * jet[0, 3]),
            "inverse_ratio": 3 * jet[0, 3] / jet[0, 2]}


def classify_vertex(jet, q, tol=NORMAL_FORM_TOL, degeneracy_tol=DEGENERACY_TOL):
    """Degree class of the base point as a vertex of Z(R_q w).

    ``q`` is in the jet's adapted coordinates. Off the normal (x_q != 0) the
    leading term of R_q w is -2 w02 x_q y, so the degree is two. On the
    normal the leading term is (2 w02 - 6 y_q w03) x y: degree four unless
    that coefficient cancels, which happens at the center of curvature.
    """
    check_normal_form(jet, tol)
    xq, yq = float(q[0]), float(q[1])
    if abs(xq) > 1e-12 * max(1.0, abs(yq)):
        return DegreeClass.TWO
    if abs(jet[0, 3]) <= tol * _jet_scale(jet):
        raise FlatError("w03 = 0: zero curvature, classification on the normal undefined")
    if degeneracy_margin(jet, (xq, yq)) <= degeneracy_tol:
        return DegreeClass.SIX_OR_MORE
    return DegreeClass.FOUR


def _jet_poly(jet):
    """Coefficient array of the normal-form polynomial.

    The cubic part is completed to w30 (x^3 - 3xy^2) + w03 (y^3 - 3x^2 y):
    with no linear terms the Helmholtz equation makes it harmonic, so jets
    may list w03 alone.
    """
    c = np.array(jet.w, dtype=float)
    c[2, 1] = -3 * jet[0, 3]
    c[1, 2] = -3 * jet[3, 0]
    return c


def rotational_derivative_poly(c, q):
    """Coefficient array of R_q w = (x - x_q) w_y - (y - y_q) w_x for w = sum c[i, j] x^i y^j."""
    wx = P.polyder(c, axis=0)
    wy = P.polyder(c, axis=1)
    size = c.shape[0] + 1
    out = np.zeros((size, size))
    # x * w_y and y * w_x are index shifts
    out[1:1 + wy.shape[0], : wy.shape[1]] += wy
    out[: wy.shape[0], : wy.shape[1]] -= q[0] * wy
    out[: wx.shape[0], 1:1 + wx.shape[1]] -= wx
    out[: wx.shape[0], : wx.shape[1]] += q[1] * wx
    return out


def ring_count_for_jet(jet, q, eps, n_samples=RING_SAMPLES):
    """Stabilized ring count of R_q applied to the normal-form jet polynomial at the origin."""
    c = rotational_derivative_poly(_jet_poly(jet), q)
    return ring_degree(lambda x, y: P.polyval2d(x, y, c), (0.0, 0.0), eps, n_samples)


def classify_vs_ring_oracle(jet, q, radii=ORACLE_RADII):
    """True iff the brute-force ring count agrees with classify_vertex at every radius.

    Degrees two and four must be stable over each ring triple; for
    six_or_more every ring must show at least six sign changes, since
    higher-order terms can add zeros near a degenerate vertex.
    """
    cls = classify_vertex(jet, q)
    c = rotational_derivative_poly(_jet_poly(jet), q)

    def f(x, y):
        return P.polyval2d(x, y, c)

    for eps in radii:
        counts = [_ring_count(f, (0.0, 0.0), eps / d, RING_SAMPLES) for d in (1, 2, 4)]
        if cls is DegreeClass.SIX_OR_MORE:
            if min(counts) < 6:
                return False
        elif len(set(counts)) != 1 or not cls.matches(counts[0]):
            return False
    return True


# -- nodal graph extraction ----------------------------------------------

@dataclass(frozen=True)
class Vertex:
    point: Point
    degree: int
    kind: str = "interior"  # or "boundary" (edge leaves the box)
    tangential: bool = False


@dataclass(frozen=True, eq=False)
class Edge:
    points: np.ndarray  # (n, 2)
    start: int | None   # vertex index, None for closed loops
    end: int | None

    @property
    def closed(self):
        return self.start is None


@dataclass(eq=False)
class NodalGraph:
    vertices: list
    edges: list
    cell_size: float
    bbox: tuple = (0.0, 0.0, 1.0, 1.0)
    segments: np.ndarray = dc_field(default_factory=lambda: np.zeros((0, 4)))

    @property
    def interior_vertices(self):
        return [v for v in self.vertices if v.kind == "interior"]

    def loops(self):
        return [e for e in self.edges if e.closed]

    def edge_points(self):
        if not self.edges:
            return np.zeros((0, 2))
        return np.vstack([e.points for e in self.edges])

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("x1,y1,x2,y2\n")
            for x1, y1, x2, y2 in self.segments:
                fh.write(f"{x1:.17g},{y1:.17g},{x2:.17g},{y2:.17g}\n")

    def to_svg(self, path, size=800):
        x0, y0, x1, y1 = self.bbox
        scale = size / max(x1 - x0, y1 - y0)

        def tr(p):
            return (p[0] - x0) * scale, (y1 - p[1]) * scale

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{(x1 - x0) * scale:.1f}" '
               f'height="{(y1 - y0) * scale:.1f}">',
               '<rect width="100%" height="100%" fill="white"/>']
        for e in self.edges:
            pts = " ".join("{:.3f},{:.3f}".format(*tr(p)) for p in e.points)
            out.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1"/>')
        for v in self.interior_vertices:
            cx, cy = tr(v.point)
            out.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="4" fill="red"/>')
            out.append(f'<text x="{cx + 6:.3f}" y="{cy - 6:.3f}" font-size="12">{v.degree}</text>')
        out.append("</svg>")
        with open(path, "w") as fh:
            fh.write("\n".join(out) + "\n")


def _eval_rows(f, X, Y, rows=64):
    out = np.empty_like(X)
    for i in range(0, X.shape[0], rows):
        out[i:i + rows] = f(X[i:i + rows], Y[i:i + rows])
    return out


def _chains(eids):
    """Group segments into chains of edge ids; returns lists of ids and closed flags."""
    nbrs = {}
    for a, b in eids:
        nbrs.setdefault(int(a), []).append(int(b))
        nbrs.setdefault(int(b), []).append(int(a))
    seen = set()
    chains = []
    # open chains start at ids with a single neighbour
    starts = [i for i, n in nbrs.items() if len(n) == 1] + list(nbrs)
    for s in starts:
        if s in seen:
            continue
        chain = [s]
        seen.add(s)
        prev, cur = None, s
        closed = False
        while True:
            nxt = [n for n in nbrs[cur] if n != prev]
            if not nxt:
                break
            step = nxt[0]
            if step == s:
                closed = True
                break
            if step in seen:
                break
            chain.append(step)
            seen.add(step)
            prev, cur = cur, step
        chains.append((chain, closed))
    return chains


def _newton_critical(field, start, cell, steps=20):
    """Nodal critical point near ``start`` by Newton's method on grad = 0."""
    fxx, fxy, fyy = second_derivatives(field)
    p = np.array(start, dtype=float)
    for _ in range(steps):
        gx, gy = eval_grad(field, p)
        H = np.array([[fxx(*p), fxy(*p)], [fxy(*p), fyy(*p)]], dtype=float)
        try:
            delta = np.linalg.solve(H, -np.array([gx, gy]))
        except np.linalg.LinAlgError:
            return None
        p = p + delta
        if np.hypot(*delta) < 1e-12 * max(1.0, cell):
            break
    if np.hypot(*(p - start)) > 2 * cell:
        return None
    return p


def _candidate_nodes(F):
    """Grid nodes whose surrounding 2x2 cell block has >= 4 sign changes on its rim."""
    pos = F >= 0
    rim = [pos[:-2, :-2], pos[:-2, 1:-1], pos[:-2, 2:], pos[1:-1, 2:],
           pos[2:, 2:], pos[2:, 1:-1], pos[2:, :-2], pos[1:-1, :-2]]
    changes = sum((rim[i] != rim[(i + 1) % 8]).astype(int) for i in range(8))
    ii, jj = np.nonzero(changes >= 4)
    return ii + 1, jj + 1


def _incident_angles_small(field, v, radius, degree, n=720):
    t = 2 * math.pi * (np.arange(n) + 0.5) / n
    vals = field(v[0] + radius * np.cos(t), v[1] + radius * np.sin(t))
    s = np.sign(vals)
    idx = np.nonzero(s != np.roll(s, 1))[0]
    if idx.size < 2:
        return False
    gaps = np.diff(np.concatenate([t[idx], [t[idx[0]] + 2 * math.pi]]))
    return bool(gaps.min() < math.radians(5.0))


def trace_nodal(field, bbox, cells):
    """Zero level set of a WaveField on ``bbox = (x0, y0, x1, y1)`` as a graph.

    Marching squares with linear interpolation, saddle cells resolved by the
    field value at the cell center. Vertices are nodal critical points found
    from grid nodes whose 2x2 block rim has at least four sign changes,
    polished by Newton's method on the gradient and kept when the ring
    degree at twice the cell diagonal exceeds two.
    """
    nx, ny = (cells, cells) if np.isscalar(cells) else cells
    if nx < 64 or ny < 64:
        raise ValueError("need at least 64 x 64 cells")
    x0, y0, x1, y1 = map(float, bbox)
    dx, dy = (x1 - x0) / nx, (y1 - y0) / ny
    diag = math.hypot(dx, dy)
    xs, ys = x0 + dx * np.arange(nx + 1), y0 + dy * np.arange(ny + 1)
    X, Y = np.meshgrid(xs, ys)
    F = _eval_rows(field, X, Y)
    if not np.any(F):
        warnings.warn("field vanishes identically; empty nodal graph", NonzeroWarning,
                      stacklevel=2)
        return NodalGraph([], [], diag, (x0, y0, x1, y1))

    pos = F >= 0
    case = pos[:-1, :-1] * 1 + pos[:-1, 1:] * 2 + pos[1:, 1:] * 4 + pos[1:, :-1] * 8
    saddle_sign = np.zeros((ny, nx), dtype=np.uint8)
    si, sj = np.nonzero((case == 5) | (case == 10))
    if si.size:
        centre = field(x0 + dx * (sj + 0.5), y0 + dy * (si + 0.5))
        saddle_sign[si, sj] = centre >= 0
    frac, eids = kernels.marching_squares(F, saddle_sign)
    seg = np.column_stack([x0 + dx * frac[:, 0], y0 + dy * frac[:, 1],
                           x0 + dx * frac[:, 2], y0 + dy * frac[:, 3]])

    # coordinates of every crossing, keyed by grid-edge id
    coords = {}
    for (a, b), s in zip(eids, seg):
        coords[int(a)] = s[:2]
        coords[int(b)] = s[2:]

    # vertices
    vertices = []
    ci, cj = _candidate_nodes(F)
    found = []
    for i, j in zip(ci, cj):
        p = _newton_critical(field, (xs[j], ys[i]), diag)
        if p is None or not (x0 < p[0] < x1 and y0 < p[1] < y1):
            continue
        if any(np.hypot(*(p - q)) < diag for q in found):
            continue
        try:
            deg = ring_degree(field, p, 2 * diag)
        except UnstableCountError:
            deg = _ring_count(field, p, 2 * diag, RING_SAMPLES)
        if deg > 2:
            found.append(p)
            vertices.append(Vertex(Point(float(p[0]), float(p[1])), deg, "interior",
                                   _incident_angles_small(field, p, 2 * diag, deg)))
    vradius = 1.5 * diag

    edges = []

    def add_boundary_vertex(pt):
        vertices.append(Vertex(Point(float(pt[0]), float(pt[1])), 1, "boundary"))
        return len(vertices) - 1

    def near_vertex(pt):
        for idx, v in enumerate(vertices):
            if v.kind == "interior" and math.hypot(pt[0] - v.point.x, pt[1] - v.point.y) < vradius:
                return idx
        return None

    for chain, closed in _chains(eids):
        pts = np.array([coords[e] for e in chain])
        tags = [near_vertex(p) for p in pts]
        if all(t is None for t in tags):
            if closed:
                edges.append(Edge(np.vstack([pts, pts[:1]]), None, None))
            else:
                edges.append(Edge(pts, add_boundary_vertex(pts[0]), add_boundary_vertex(pts[-1])))
            continue
        if closed:
            # rotate so the chain starts inside a vertex disc
            k = next(i for i, t in enumerate(tags) if t is not None)
            pts = np.vstack([pts[k:], pts[:k], pts[k:k + 1]])
            tags = tags[k:] + tags[:k] + tags[k:k + 1]
        pieces, current, start_v = [], [], None
        for p, t in zip(pts, tags):
            if t is None:
                current.append(p)
                continue
            if current:
                pieces.append((start_v, current, t))
                current = []
            start_v = t
        if current:
            pieces.append((start_v, current, None))
        for sv, body, ev in pieces:
            body = np.array(body)
            if sv is None:
                sv = add_boundary_vertex(body[0])
            else:
                body = np.vstack([np.array(vertices[sv].point), body])
            if ev is None:
                ev = add_boundary_vertex(body[-1])
            else:
                body = np.vstack([body, np.array(vertices[ev].point)])
            edges.append(Edge(body, sv, ev))
    return NodalGraph(vertices, edges, diag, (x0, y0, x1, y1), seg)


def edge_residual(field, graph, samples=100, seed=0):
    """Max over random edge points of |f| / (cell diagonal * local |grad f|)."""
    pts = graph.edge_points()
    if pts.shape[0] == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    pick = pts[rng.choice(pts.shape[0], size=min(samples, pts.shape[0]), replace=False)]
    vals = np.abs(field(pick[:, 0], pick[:, 1]))
    gx, gy = eval_grad(field, pick)
    bound = graph.cell_size * np.maximum(np.hypot(gx, gy), 1e-300)
    return float((vals / bound).max())
