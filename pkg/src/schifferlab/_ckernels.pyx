# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, ceil

cnp.import_array()

DEF SERIES_CUTOFF = 12.0
DEF RESCALE = 1e250


cdef inline long _miller_start(long nmax, double x) nogil:
    cdef long top = nmax
    cdef long cx = <long>ceil(x)
    if cx > top:
        top = cx
    cdef long m = top + 20 + <long>sqrt(40.0 * top + 40.0)
    return m + (m & 1)


def miller_start(long nmax, double x):
    return _miller_start(nmax, x)


cdef void _series(long nmax, double xd, double[:, ::1] out, Py_ssize_t col) nogil:
    cdef long double x = xd
    cdef long double half = x / 2
    cdef long double q = -half * half
    cdef long double lead = 1.0
    cdef long double term, total
    cdef long n, k
    for n in range(nmax + 1):
        if n:
            lead = lead * half / n
        term = lead
        total = lead
        k = 0
        while term != 0:
            k += 1
            term = term * q / (k * (n + k))
            total += term
            if fabs(<double>term) <= 1e-17 * fabs(<double>total):
                break
        out[n, col] = <double>total


cdef void _miller(long nmax, double x, double[:, ::1] out, Py_ssize_t col) nogil:
    cdef long m = _miller_start(nmax, x)
    cdef double two_over_x = 2.0 / x
    cdef double jp = 0.0, j = 1e-300, jm, norm = 0.0
    cdef long k, order, r
    for r in range(nmax + 1):
        out[r, col] = 0.0
    for k in range(m, 0, -1):
        jm = k * two_over_x * j - jp
        jp = j
        j = jm
        order = k - 1
        if order <= nmax:
            out[order, col] = j
        if order % 2 == 0:
            if order:
                norm += 2.0 * j
            else:
                norm += j
        if fabs(j) > RESCALE:
            j /= RESCALE
            jp /= RESCALE
            norm /= RESCALE
            if order <= nmax:
                for r in range(order, nmax + 1):
                    out[r, col] /= RESCALE
    for r in range(nmax + 1):
        out[r, col] /= norm


def bessel_series_table(long nmax, x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.empty((nmax + 1, xv.shape[0]))
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            _series(nmax, xv[i], ov, i)
    return out


def bessel_miller_table(long nmax, x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.empty((nmax + 1, xv.shape[0]))
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            _miller(nmax, xv[i], ov, i)
    return out


def bessel_table(long nmax, x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.empty((nmax + 1, xv.shape[0]))
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            if xv[i] < SERIES_CUTOFF:
                _series(nmax, xv[i], ov, i)
            else:
                _miller(nmax, xv[i], ov, i)
    return out


def cyclic_sign_changes(values, floor):
    cdef const double[:, ::1] v = np.ascontiguousarray(np.atleast_2d(values), dtype=np.float64)
    cdef const double[::1] fl = np.ascontiguousarray(
        np.broadcast_to(np.asarray(floor, dtype=np.float64), (v.shape[0],)))
    counts = np.empty(v.shape[0], dtype=np.int64)
    cdef long long[::1] cv = counts
    cdef Py_ssize_t i, j
    cdef int first, prev, s
    cdef long long c
    with nogil:
        for i in range(v.shape[0]):
            first = 0
            prev = 0
            c = 0
            for j in range(v.shape[1]):
                if fabs(v[i, j]) <= fl[i]:
                    continue
                s = 1 if v[i, j] > 0 else -1
                if first == 0:
                    first = s
                elif s != prev:
                    c += 1
                prev = s
            if first == 0:
                cv[i] = -1
            else:
                if prev != first:
                    c += 1
                cv[i] = c
    return counts


def marching_squares(f, saddle_sign):
    cdef const double[:, ::1] F = np.ascontiguousarray(f, dtype=np.float64)
    cdef const cnp.uint8_t[:, ::1] S = np.ascontiguousarray(saddle_sign, dtype=np.uint8)
    cdef Py_ssize_t ny = F.shape[0] - 1, nx = F.shape[1] - 1
    cdef long long hoff = (ny + 1) * nx
    # at most two segments per cell
    pts = np.empty((2 * ny * nx, 4))
    eids = np.empty((2 * ny * nx, 2), dtype=np.int64)
    cdef double[:, ::1] P = pts
    cdef long long[:, ::1] E = eids
    cdef Py_ssize_t i, j, ns = 0
    cdef int case, a, b, p
    cdef int pairs[4]
    cdef int npair
    cdef double ex[4]
    cdef double ey[4]
    cdef long long eid[4]
    cdef double v0, v1, v2, v3
    with nogil:
        for i in range(ny):
            for j in range(nx):
                v0 = F[i, j]
                v1 = F[i, j + 1]
                v2 = F[i + 1, j + 1]
                v3 = F[i + 1, j]
                case = (v0 >= 0) + 2 * (v1 >= 0) + 4 * (v2 >= 0) + 8 * (v3 >= 0)
                if case == 0 or case == 15:
                    continue
                if (v0 >= 0) != (v1 >= 0):
                    ex[0] = j + v0 / (v0 - v1)
                    ey[0] = i
                    eid[0] = i * nx + j
                if (v1 >= 0) != (v2 >= 0):
                    ex[1] = j + 1
                    ey[1] = i + v1 / (v1 - v2)
                    eid[1] = hoff + i * (nx + 1) + j + 1
                if (v3 >= 0) != (v2 >= 0):
                    ex[2] = j + v3 / (v3 - v2)
                    ey[2] = i + 1
                    eid[2] = (i + 1) * nx + j
                if (v0 >= 0) != (v3 >= 0):
                    ex[3] = j
                    ey[3] = i + v0 / (v0 - v3)
                    eid[3] = hoff + i * (nx + 1) + j
                npair = 1
                if case == 1 or case == 14:
                    pairs[0] = 0; pairs[1] = 3
                elif case == 2 or case == 13:
                    pairs[0] = 0; pairs[1] = 1
                elif case == 3 or case == 12:
                    pairs[0] = 1; pairs[1] = 3
                elif case == 4 or case == 11:
                    pairs[0] = 1; pairs[1] = 2
                elif case == 6 or case == 9:
                    pairs[0] = 0; pairs[1] = 2
                elif case == 7 or case == 8:
                    pairs[0] = 2; pairs[1] = 3
                else:
                    npair = 2
                    if (S[i, j] != 0) == (v0 >= 0):
                        pairs[0] = 0; pairs[1] = 1; pairs[2] = 2; pairs[3] = 3
                    else:
                        pairs[0] = 3; pairs[1] = 0; pairs[2] = 1; pairs[3] = 2
                for p in range(npair):
                    a = pairs[2 * p]
                    b = pairs[2 * p + 1]
                    P[ns, 0] = ex[a]
                    P[ns, 1] = ey[a]
                    P[ns, 2] = ex[b]
                    P[ns, 3] = ey[b]
                    E[ns, 0] = eid[a]
                    E[ns, 1] = eid[b]
                    ns += 1
    return pts[:ns], eids[:ns]
