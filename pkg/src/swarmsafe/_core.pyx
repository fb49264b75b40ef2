# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels: Gaussian rasterisation and fixed-width sparse apply.

Each function matches the NumPy fallback in ``_kernels_np`` operation for
operation so the backends agree to rounding error.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, rint

cnp.import_array()


def gaussian_field(Py_ssize_t nx, Py_ssize_t ny, double cell, double ox, double oy,
                   double cx, double cy, double pxx, double pxy, double pyy):
    out = np.empty(nx * ny, dtype=np.float64)
    dxs = np.empty(nx, dtype=np.float64)
    dys = np.empty(ny, dtype=np.float64)
    cdef double[::1] o = out
    cdef double[::1] dxv = dxs
    cdef double[::1] dyv = dys
    cdef double lx = nx * cell
    cdef double ly = ny * cell
    cdef double s = 2.0 * pxy
    cdef double d, dx, dy, quad
    cdef Py_ssize_t i, j, base
    for i in range(nx):
        d = ox + cell * i - cx
        d -= lx * rint(d / lx)
        dxv[i] = d
    for j in range(ny):
        d = oy + cell * j - cy
        d -= ly * rint(d / ly)
        dyv[j] = d
    for j in range(ny):
        dy = dyv[j]
        base = j * nx
        for i in range(nx):
            dx = dxv[i]
            quad = pxx * (dx * dx) + s * (dy * dx) + pyy * (dy * dy)
            o[base + i] = exp(-0.5 * quad)
    return out


def uniform_matvec(const cnp.int64_t[:, ::1] indices, const double[:, ::1] data,
                   const double[::1] x):
    cdef Py_ssize_t n = indices.shape[0]
    cdef Py_ssize_t k = indices.shape[1]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t r, c
    cdef double acc
    for r in range(n):
        acc = 0.0
        for c in range(k):
            acc += data[r, c] * x[indices[r, c]]
        o[r] = acc
    return out


def uniform_rows_matvec(const cnp.int64_t[:, ::1] indices, const double[:, ::1] data,
                        const double[::1] x, const cnp.int64_t[::1] rows):
    cdef Py_ssize_t n = rows.shape[0]
    cdef Py_ssize_t k = indices.shape[1]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t m, r, c
    cdef double acc
    for m in range(n):
        r = rows[m]
        acc = 0.0
        for c in range(k):
            acc += data[r, c] * x[indices[r, c]]
        o[m] = acc
    return out
