# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops; mirrors ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def moebius(double[::1] table):
    """Subset-difference transform, in place on a length-2**n table."""
    cdef Py_ssize_t size = table.shape[0]
    cdef Py_ssize_t bit = 1
    cdef Py_ssize_t mask
    while bit < size:
        for mask in range(size):
            if mask & bit:
                table[mask] -= table[mask ^ bit]
        bit <<= 1


def zeta(double[::1] table):
    """Subset-sum transform, in place; inverse of :func:`moebius`."""
    cdef Py_ssize_t size = table.shape[0]
    cdef Py_ssize_t bit = 1
    cdef Py_ssize_t mask
    while bit < size:
        for mask in range(size):
            if mask & bit:
                table[mask] += table[mask ^ bit]
        bit <<= 1


def hamming_matrix(const cnp.int64_t[::1] left, const cnp.int64_t[::1] right,
                   int n, int d):
    cdef Py_ssize_t rows = left.shape[0]
    cdef Py_ssize_t cols = right.shape[0]
    out = np.empty((rows, cols), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] view = out
    cdef Py_ssize_t i, j
    cdef int k, dist
    cdef cnp.int64_t a, b
    for i in range(rows):
        for j in range(cols):
            a = left[i]
            b = right[j]
            dist = 0
            if d == 2:
                a = a ^ b
                while a:
                    a &= a - 1
                    dist += 1
            else:
                for k in range(n):
                    if a % d != b % d:
                        dist += 1
                    a //= d
                    b //= d
            view[i, j] = dist
    return out
