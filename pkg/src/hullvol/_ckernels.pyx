# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: planar hull, shoelace area, half-space rejection."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _cross(const double[:, :] p, Py_ssize_t o, Py_ssize_t a,
                          Py_ssize_t b) noexcept nogil:
    return ((p[a, 0] - p[o, 0]) * (p[b, 1] - p[o, 1])
            - (p[a, 1] - p[o, 1]) * (p[b, 0] - p[o, 0]))


def monotone_chain(const double[:, :] points, const cnp.int64_t[:] order,
                   double tol):
    """Counter-clockwise hull vertex indices of a planar point set.

    ``order`` must sort the points lexicographically by (x, y); equal
    coordinates must already be removed. Points on an edge are dropped.
    """
    cdef Py_ssize_t n = order.shape[0]
    cdef cnp.int64_t[:] stack = np.empty(2 * n + 1, dtype=np.int64)
    cdef Py_ssize_t k = 0, i, lower_size
    cdef cnp.int64_t idx
    if n <= 2:
        return np.asarray(order).copy()
    with nogil:
        for i in range(n):
            idx = order[i]
            while k >= 2 and _cross(points, stack[k - 2], stack[k - 1], idx) <= tol:
                k -= 1
            stack[k] = idx
            k += 1
        lower_size = k + 1
        for i in range(n - 2, -1, -1):
            idx = order[i]
            while k >= lower_size and _cross(points, stack[k - 2], stack[k - 1], idx) <= tol:
                k -= 1
            stack[k] = idx
            k += 1
    return np.asarray(stack[:k - 1]).copy()


def shoelace(const double[:, :] points, const cnp.int64_t[:] ring):
    cdef Py_ssize_t m = ring.shape[0], i
    cdef double acc = 0.0
    cdef cnp.int64_t a, b
    with nogil:
        for i in range(m):
            a = ring[i]
            b = ring[(i + 1) % m]
            acc += points[a, 0] * points[b, 1] - points[b, 0] * points[a, 1]
    return 0.5 * acc


def outside_mask(const double[:, :] points, const double[:, :] normals,
                 const double[:] offsets, double tol):
    """True where some facet satisfies ``normal . x + offset > tol``."""
    cdef Py_ssize_t n = points.shape[0], f = normals.shape[0]
    cdef Py_ssize_t d = points.shape[1], i, j, c
    cdef double s
    out = np.zeros(n, dtype=np.bool_)
    cdef cnp.uint8_t[:] view = out.view(np.uint8)
    with nogil:
        for i in range(n):
            for j in range(f):
                s = offsets[j]
                for c in range(d):
                    s += normals[j, c] * points[i, c]
                if s > tol:
                    view[i] = 1
                    break
    return out
