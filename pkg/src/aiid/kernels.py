"""Kernel selection: the compiled extension when it imports, numpy otherwise.

Set ``AIID_PURE_PYTHON=1`` to force the fallback (used by the benchmark and
by the cross-check tests).
"""

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("AIID_PURE_PYTHON"):
        raise ImportError("fallback forced by AIID_PURE_PYTHON")
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"


def moebius_transform(values, backend=None):
    """Return ``c`` with ``c[S] = sum_{T <= S} (-1)^{|S|-|T|} values[T]`` over bitmasks."""
    impl = _pick(backend)
    table = np.array(values, dtype=np.float64, copy=True).ravel()
    _check_pow2(table.size)
    impl.moebius(table)
    return table


def zeta_transform(values, backend=None):
    """Return ``f`` with ``f[S] = sum_{T <= S} values[T]`` over bitmasks."""
    impl = _pick(backend)
    table = np.array(values, dtype=np.float64, copy=True).ravel()
    _check_pow2(table.size)
    impl.zeta(table)
    return table


def hamming_matrix(left_codes, right_codes, n, d, backend=None):
    """Pairwise Hamming distances between base-``d`` encoded length-``n`` strings."""
    impl = _pick(backend)
    left = np.ascontiguousarray(left_codes, dtype=np.int64)
    right = np.ascontiguousarray(right_codes, dtype=np.int64)
    return impl.hamming_matrix(left, right, int(n), int(d))


def _pick(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _pykernels
    if backend == "cython":
        if _impl is _pykernels:
            raise ImportError("compiled kernels are not built")
        return _impl
    raise ValueError(f"unknown backend {backend!r}")


def _check_pow2(size):
    if size < 1 or size & (size - 1):
        raise ValueError(f"table length {size} is not a power of two")
