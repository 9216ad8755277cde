"""Pure numpy implementations of the hot kernels.

Same signatures as the compiled ``_ckernels`` module. Used when the
extension is not built or when ``SCHIFFERLAB_PURE_PYTHON`` is set.
"""
import math

import numpy as np

SERIES_CUTOFF = 12.0
_RESCALE = 1e250


def miller_start(nmax, x):
    """Even trial order for the downward recurrence."""
    top = max(nmax, int(math.ceil(x)))
    m = top + 20 + int(math.sqrt(40.0 * top + 40.0))
    return m + (m & 1)


def bessel_series_table(nmax, x):
    """J_0..J_nmax by the ascending series, summed in extended precision."""
    x = np.asarray(x, dtype=np.longdouble)
    half = x / 2
    q = -half * half
    out = np.empty((nmax + 1, x.size), dtype=np.float64)
    lead = np.ones_like(x)
    for n in range(nmax + 1):
        if n:
            lead = lead * half / n
        term = lead.copy()
        total = lead.copy()
        k = 0
        while True:
            k += 1
            term = term * q / (k * (n + k))
            total += term
            scale = np.abs(total)
            small = np.abs(term) <= 1e-17 * np.where(scale > 0, scale, 1)
            if np.all(small | (term == 0)):
                break
        out[n] = total.astype(np.float64)
    return out


def bessel_miller_table(nmax, x):
    """J_0..J_nmax by Miller's downward recurrence; requires x > 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros((nmax + 1, x.size))
    if x.size == 0:
        return out
    m = miller_start(nmax, float(x.max()))
    two_over_x = 2.0 / x
    jp = np.zeros_like(x)
    j = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    for k in range(m, 0, -1):
        jm = k * two_over_x * j - jp
        jp, j = j, jm
        order = k - 1
        if order <= nmax:
            out[order] = j
        if order % 2 == 0:
            norm += 2.0 * j if order else j
        big = np.abs(j) > _RESCALE
        if big.any():
            j[big] /= _RESCALE
            jp[big] /= _RESCALE
            norm[big] /= _RESCALE
            if order <= nmax:
                out[order:, big] /= _RESCALE
    return out / norm


def bessel_table(nmax, x):
    """Rows n = 0..nmax of J_n at the (flat, nonnegative) points x."""
    x = np.asarray(x, dtype=np.float64).ravel()
    out = np.empty((nmax + 1, x.size))
    lo = x < SERIES_CUTOFF
    if lo.any():
        out[:, lo] = bessel_series_table(nmax, x[lo])
    if (~lo).any():
        out[:, ~lo] = bessel_miller_table(nmax, x[~lo])
    return out


def cyclic_sign_changes(values, floor):
    """Sign changes around each closed row, ignoring entries with |v| <= floor.

    Returns -1 for rows where every entry is under the floor.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    floor = np.broadcast_to(np.asarray(floor, dtype=np.float64), (values.shape[0],))
    counts = np.empty(values.shape[0], dtype=np.int64)
    for i, row in enumerate(values):
        s = np.sign(row[np.abs(row) > floor[i]])
        if s.size == 0:
            counts[i] = -1
        else:
            counts[i] = int(np.count_nonzero(s != np.roll(s, 1)))
    return counts


def marching_squares(f, saddle_sign):
    """Zero-level segments of the node grid ``f`` (shape ny+1, nx+1).

    ``saddle_sign[i, j]`` is the sign (>= 0 -> 1, else 0) of the field at the
    center of cell (i, j); only read for saddle cells.

    Returns ``(pts, eids)``: pts[s] = (x0, y0, x1, y1) in fractional grid
    units (column, row), eids[s] = ids of the grid edges holding each end.
    Horizontal edge (i, j)-(i, j+1) has id i*nx + j; vertical edge
    (i, j)-(i+1, j) has id (ny+1)*nx + i*(nx+1) + j.
    """
    f = np.asarray(f, dtype=np.float64)
    ny, nx = f.shape[0] - 1, f.shape[1] - 1
    pos = f >= 0
    hoff = (ny + 1) * nx

    # crossing parameter along every horizontal and vertical edge
    with np.errstate(divide="ignore", invalid="ignore"):
        th = f[:, :-1] / (f[:, :-1] - f[:, 1:])
        tv = f[:-1, :] / (f[:-1, :] - f[1:, :])

    b0 = pos[:-1, :-1]
    b1 = pos[:-1, 1:]
    b2 = pos[1:, 1:]
    b3 = pos[1:, :-1]
    case = b0 * 1 + b1 * 2 + b2 * 4 + b3 * 8
    ii, jj = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")

    def edge(e, i, j):
        # e: 0 bottom, 1 right, 2 top, 3 left
        if e == 0:
            return j + th[i, j], i.astype(float), i * nx + j
        if e == 1:
            return (j + 1).astype(float), i + tv[i, j + 1], hoff + i * (nx + 1) + j + 1
        if e == 2:
            return j + th[i + 1, j], (i + 1).astype(float), (i + 1) * nx + j
        return j.astype(float), i + tv[i, j], hoff + i * (nx + 1) + j

    table = {
        1: [(0, 3)], 2: [(0, 1)], 3: [(1, 3)], 4: [(1, 2)], 6: [(0, 2)],
        7: [(2, 3)], 8: [(2, 3)], 9: [(0, 2)], 11: [(1, 2)], 12: [(1, 3)],
        13: [(0, 1)], 14: [(0, 3)],
    }
    pts, eids = [], []

    def emit(mask, pairs):
        i, j = ii[mask], jj[mask]
        for ea, eb in pairs:
            xa, ya, ida = edge(ea, i, j)
            xb, yb, idb = edge(eb, i, j)
            pts.append(np.stack([xa, ya, xb, yb], axis=1))
            eids.append(np.stack([ida, idb], axis=1))

    for c, pairs in table.items():
        emit(case == c, pairs)
    saddle = (case == 5) | (case == 10)
    same = np.asarray(saddle_sign, dtype=bool) == b0
    emit(saddle & same, [(0, 1), (2, 3)])
    emit(saddle & ~same, [(3, 0), (1, 2)])

    if not pts:
        return np.zeros((0, 4)), np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(pts), np.concatenate(eids).astype(np.int64)
