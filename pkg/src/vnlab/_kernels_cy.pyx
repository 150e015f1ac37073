# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernels; semantics match _kernels_py exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def poly_eval_batch(cnp.ndarray[cnp.complex128_t, ndim=1] coef,
                    cnp.ndarray[cnp.int64_t, ndim=2] idx,
                    points_in):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] points = np.ascontiguousarray(
        points_in, dtype=np.complex128)
    cdef Py_ssize_t nb = points.shape[0]
    cdef Py_ssize_t m = idx.shape[0]
    cdef Py_ssize_t k = idx.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] values = np.zeros(nb, dtype=np.complex128)
    cdef Py_ssize_t b, t, u
    cdef double complex acc, prod
    for b in range(nb):
        acc = 0
        for t in range(m):
            prod = coef[t]
            for u in range(k):
                prod = prod * points[b, idx[t, u]]
            acc = acc + prod
        values[b] = acc
    return values


def poly_eval_grad_batch(cnp.ndarray[cnp.complex128_t, ndim=1] coef,
                         cnp.ndarray[cnp.int64_t, ndim=2] idx,
                         points_in):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] points = np.ascontiguousarray(
        points_in, dtype=np.complex128)
    cdef Py_ssize_t nb = points.shape[0]
    cdef Py_ssize_t n = points.shape[1]
    cdef Py_ssize_t m = idx.shape[0]
    cdef Py_ssize_t k = idx.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] values = np.zeros(nb, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] grads = np.zeros((nb, n), dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] prefix = np.empty(k, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] suffix = np.empty(k, dtype=np.complex128)
    cdef Py_ssize_t b, t, u
    cdef double complex acc, c
    for b in range(nb):
        acc = 0
        for t in range(m):
            prefix[0] = 1
            for u in range(1, k):
                prefix[u] = prefix[u - 1] * points[b, idx[t, u - 1]]
            suffix[k - 1] = 1
            for u in range(k - 2, -1, -1):
                suffix[u] = suffix[u + 1] * points[b, idx[t, u + 1]]
            c = coef[t]
            acc = acc + c * prefix[k - 1] * points[b, idx[t, k - 1]]
            for u in range(k):
                grads[b, idx[t, u]] = grads[b, idx[t, u]] + c * prefix[u] * suffix[u]
        values[b] = acc
    return values, grads
