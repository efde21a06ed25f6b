# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled reductions over weighted node stencils.

Every quantity in the package reduces to a weighted sum of |v|^p over the
nodes of a ball, a disc column or a local zoom lattice.  The stencils are
given as parallel index/weight arrays so the same loops serve all three.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow, sqrt

cnp.import_array()


def power_sum(const double[:, :, :, ::1] values,
              const Py_ssize_t[::1] i,
              const Py_ssize_t[::1] j,
              const Py_ssize_t[::1] k,
              const double[::1] w,
              double p):
    cdef Py_ssize_t m, c
    cdef Py_ssize_t ncomp = values.shape[0]
    cdef Py_ssize_t npts = w.shape[0]
    cdef double s2, a, total = 0.0
    cdef double half_p = 0.5 * p
    for m in range(npts):
        s2 = 0.0
        for c in range(ncomp):
            a = values[c, i[m], j[m], k[m]]
            s2 += a * a
        if p == 2.0:
            total += w[m] * s2
        elif p == 1.0:
            total += w[m] * sqrt(s2)
        elif s2 > 0.0:
            total += w[m] * pow(s2, half_p)
    return total


def max_norm(const double[:, :, :, ::1] values,
             const Py_ssize_t[::1] i,
             const Py_ssize_t[::1] j,
             const Py_ssize_t[::1] k):
    cdef Py_ssize_t m, c
    cdef Py_ssize_t ncomp = values.shape[0]
    cdef double s2, a, best = 0.0
    for m in range(i.shape[0]):
        s2 = 0.0
        for c in range(ncomp):
            a = values[c, i[m], j[m], k[m]]
            s2 += a * a
        if s2 > best:
            best = s2
    return sqrt(best)


def weighted_sum(const double[:, :, ::1] values,
                 const Py_ssize_t[::1] i,
                 const Py_ssize_t[::1] j,
                 const Py_ssize_t[::1] k,
                 const double[::1] w):
    cdef Py_ssize_t m
    cdef double total = 0.0
    for m in range(w.shape[0]):
        total += w[m] * values[i[m], j[m], k[m]]
    return total


def slice_sums(const double[:, :, ::1] values,
               const Py_ssize_t[::1] i,
               const Py_ssize_t[::1] j,
               const double[::1] w):
    cdef Py_ssize_t m, z
    cdef Py_ssize_t nz = values.shape[2]
    out = np.zeros(nz, dtype=np.float64)
    cdef double[::1] acc = out
    for m in range(w.shape[0]):
        for z in range(nz):
            acc[z] += w[m] * values[i[m], j[m], z]
    return out
