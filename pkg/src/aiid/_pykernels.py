"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``."""

import numpy as np


def moebius(table):
    size = table.shape[0]
    bit = 1
    while bit < size:
        view = table.reshape(-1, 2, bit)
        view[:, 1, :] -= view[:, 0, :]
        bit <<= 1


def zeta(table):
    size = table.shape[0]
    bit = 1
    while bit < size:
        view = table.reshape(-1, 2, bit)
        view[:, 1, :] += view[:, 0, :]
        bit <<= 1


def hamming_matrix(left, right, n, d):
    left = np.asarray(left, dtype=np.int64)
    right = np.asarray(right, dtype=np.int64)
    out = np.zeros((left.size, right.size), dtype=np.int64)
    a = left[:, None].copy()
    b = right[None, :].copy()
    for _ in range(n):
        out += (a % d) != (b % d)
        a //= d
        b //= d
    return out
