# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled interpolation kernels (multilinear, clamped and periodic).

Signature-compatible with sdnse.kernels._reference; selected at import
when the extension built successfully.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def interp_linear(values, origin, spacing, points):
    values = np.ascontiguousarray(values, dtype=np.float64)
    points = np.ascontiguousarray(points, dtype=np.float64)
    origin = np.ascontiguousarray(origin, dtype=np.float64)
    spacing = np.ascontiguousarray(spacing, dtype=np.float64)
    ndim = values.ndim - 1
    if ndim == 1:
        return _interp1(values, origin, spacing, points)
    if ndim == 2:
        return _interp2(values, origin, spacing, points)
    if ndim == 3:
        return _interp3(values, origin, spacing, points)
    raise ValueError("only 1, 2 or 3 grid dimensions are supported")


def interp_linear_periodic(values, box_length, points):
    values = np.ascontiguousarray(values, dtype=np.float64)
    points = np.ascontiguousarray(points, dtype=np.float64)
    ndim = values.ndim - 1
    if ndim == 1:
        return _interp1p(values, float(box_length), points)
    if ndim == 2:
        return _interp2p(values, float(box_length), points)
    if ndim == 3:
        return _interp3p(values, float(box_length), points)
    raise ValueError("only 1, 2 or 3 grid dimensions are supported")


cdef inline double _wrapf(double x, double L) nogil:
    cdef double t = x % L
    if t < 0.0:
        t += L
    if t >= L:
        t = 0.0
    return t


cdef inline double _clampf(double t, double hi) nogil:
    if t < 0.0:
        return 0.0
    if t > hi:
        return hi
    return t


def _interp1(double[:, ::1] v, double[::1] org, double[::1] sp,
             double[:, ::1] pts):
    cdef Py_ssize_t m = pts.shape[0], C = v.shape[0], n1 = v.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((m, C))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t p, c, i
    cdef double t, w
    for p in range(m):
        t = (pts[p, 0] - org[0]) / sp[0]
        if t < -1e-12 or t > n1 - 1 + 1e-12:
            continue
        t = _clampf(t, n1 - 1)
        i = <Py_ssize_t>t
        if i > n1 - 2:
            i = n1 - 2
        w = t - i
        for c in range(C):
            o[p, c] = (1.0 - w) * v[c, i] + w * v[c, i + 1]
    return out


def _interp2(double[:, :, ::1] v, double[::1] org, double[::1] sp,
             double[:, ::1] pts):
    cdef Py_ssize_t m = pts.shape[0], C = v.shape[0]
    cdef Py_ssize_t n1 = v.shape[1], n2 = v.shape[2]
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((m, C))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t p, c, i, j
    cdef double t1, t2, w1, w2
    for p in range(m):
        t1 = (pts[p, 0] - org[0]) / sp[0]
        t2 = (pts[p, 1] - org[1]) / sp[1]
        if (t1 < -1e-12 or t1 > n1 - 1 + 1e-12 or
                t2 < -1e-12 or t2 > n2 - 1 + 1e-12):
            continue
        t1 = _clampf(t1, n1 - 1)
        t2 = _clampf(t2, n2 - 1)
        i = <Py_ssize_t>t1
        j = <Py_ssize_t>t2
        if i > n1 - 2:
            i = n1 - 2
        if j > n2 - 2:
            j = n2 - 2
        w1 = t1 - i
        w2 = t2 - j
        for c in range(C):
            o[p, c] = ((1 - w1) * (1 - w2) * v[c, i, j]
                       + w1 * (1 - w2) * v[c, i + 1, j]
                       + (1 - w1) * w2 * v[c, i, j + 1]
                       + w1 * w2 * v[c, i + 1, j + 1])
    return out


def _interp3(double[:, :, :, ::1] v, double[::1] org, double[::1] sp,
             double[:, ::1] pts):
    cdef Py_ssize_t m = pts.shape[0], C = v.shape[0]
    cdef Py_ssize_t n1 = v.shape[1], n2 = v.shape[2], n3 = v.shape[3]
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((m, C))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t p, c, i, j, k
    cdef double t1, t2, t3, w1, w2, w3, a, b
    for p in range(m):
        t1 = (pts[p, 0] - org[0]) / sp[0]
        t2 = (pts[p, 1] - org[1]) / sp[1]
        t3 = (pts[p, 2] - org[2]) / sp[2]
        if (t1 < -1e-12 or t1 > n1 - 1 + 1e-12 or
                t2 < -1e-12 or t2 > n2 - 1 + 1e-12 or
                t3 < -1e-12 or t3 > n3 - 1 + 1e-12):
            continue
        t1 = _clampf(t1, n1 - 1)
        t2 = _clampf(t2, n2 - 1)
        t3 = _clampf(t3, n3 - 1)
        i = <Py_ssize_t>t1
        j = <Py_ssize_t>t2
        k = <Py_ssize_t>t3
        if i > n1 - 2:
            i = n1 - 2
        if j > n2 - 2:
            j = n2 - 2
        if k > n3 - 2:
            k = n3 - 2
        w1 = t1 - i
        w2 = t2 - j
        w3 = t3 - k
        for c in range(C):
            a = ((1 - w1) * (1 - w2) * v[c, i, j, k]
                 + w1 * (1 - w2) * v[c, i + 1, j, k]
                 + (1 - w1) * w2 * v[c, i, j + 1, k]
                 + w1 * w2 * v[c, i + 1, j + 1, k])
            b = ((1 - w1) * (1 - w2) * v[c, i, j, k + 1]
                 + w1 * (1 - w2) * v[c, i + 1, j, k + 1]
                 + (1 - w1) * w2 * v[c, i, j + 1, k + 1]
                 + w1 * w2 * v[c, i + 1, j + 1, k + 1])
            o[p, c] = (1 - w3) * a + w3 * b
    return out


def _interp1p(double[:, ::1] v, double L, double[:, ::1] pts):
    cdef Py_ssize_t m = pts.shape[0], C = v.shape[0], N = v.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((m, C))
    cdef double[:, ::1] o = out
    cdef double h = L / N
    cdef Py_ssize_t p, c, i0, i1
    cdef double t, w
    for p in range(m):
        t = _wrapf(pts[p, 0], L) / h
        i0 = (<Py_ssize_t>t) % N
        i1 = (i0 + 1) % N
        w = t - (<Py_ssize_t>t)
        for c in range(C):
            o[p, c] = (1 - w) * v[c, i0] + w * v[c, i1]
    return out


def _interp2p(double[:, :, ::1] v, double L, double[:, ::1] pts):
    cdef Py_ssize_t m = pts.shape[0], C = v.shape[0], N = v.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((m, C))
    cdef double[:, ::1] o = out
    cdef double h = L / N
    cdef Py_ssize_t p, c, i0, i1, j0, j1
    cdef double t1, t2, w1, w2
    for p in range(m):
        t1 = _wrapf(pts[p, 0], L) / h
        t2 = _wrapf(pts[p, 1], L) / h
        i0 = (<Py_ssize_t>t1) % N
        j0 = (<Py_ssize_t>t2) % N
        i1 = (i0 + 1) % N
        j1 = (j0 + 1) % N
        w1 = t1 - (<Py_ssize_t>t1)
        w2 = t2 - (<Py_ssize_t>t2)
        for c in range(C):
            o[p, c] = ((1 - w1) * (1 - w2) * v[c, i0, j0]
                       + w1 * (1 - w2) * v[c, i1, j0]
                       + (1 - w1) * w2 * v[c, i0, j1]
                       + w1 * w2 * v[c, i1, j1])
    return out


def _interp3p(double[:, :, :, ::1] v, double L, double[:, ::1] pts):
    cdef Py_ssize_t m = pts.shape[0], C = v.shape[0], N = v.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((m, C))
    cdef double[:, ::1] o = out
    cdef double h = L / N
    cdef Py_ssize_t p, c, i0, i1, j0, j1, k0, k1
    cdef double t1, t2, t3, w1, w2, w3, a, b
    for p in range(m):
        t1 = _wrapf(pts[p, 0], L) / h
        t2 = _wrapf(pts[p, 1], L) / h
        t3 = _wrapf(pts[p, 2], L) / h
        i0 = (<Py_ssize_t>t1) % N
        j0 = (<Py_ssize_t>t2) % N
        k0 = (<Py_ssize_t>t3) % N
        i1 = (i0 + 1) % N
        j1 = (j0 + 1) % N
        k1 = (k0 + 1) % N
        w1 = t1 - (<Py_ssize_t>t1)
        w2 = t2 - (<Py_ssize_t>t2)
        w3 = t3 - (<Py_ssize_t>t3)
        for c in range(C):
            a = ((1 - w1) * (1 - w2) * v[c, i0, j0, k0]
                 + w1 * (1 - w2) * v[c, i1, j0, k0]
                 + (1 - w1) * w2 * v[c, i0, j1, k0]
                 + w1 * w2 * v[c, i1, j1, k0])
            b = ((1 - w1) * (1 - w2) * v[c, i0, j0, k1]
                 + w1 * (1 - w2) * v[c, i1, j0, k1]
                 + (1 - w1) * w2 * v[c, i0, j1, k1]
                 + w1 * w2 * v[c, i1, j1, k1])
            o[p, c] = (1 - w3) * a + w3 * b
    return out
