"""Multilinear polynomials on {0,1}^n, Moebius inversion and slice obstructions.

Points ``x = (x_1, ..., x_n)`` are indexed big-endian: the table index of
``x`` is the integer with binary digits ``x_1 ... x_n``, so site ``i``
corresponds to bit ``n - i``. Subsets ``S`` of sites use the same bitmask.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .kernels import moebius_transform, zeta_transform
from .tensor import DensityOperator, GuardError

MAX_SITES = 20
MAX_TABLE_SITES = 16
MAX_SLICE_SITES = 12
RANK_RTOL = 1e-9
COEFF_TOL = 1e-12


def subset_mask(n: int, sites: Iterable[int]) -> int:
    mask = 0
    for i in sites:
        if not 1 <= i <= n:
            raise ValueError(f"site {i} outside 1..{n}")
        mask |= 1 << (n - i)
    return mask


def mask_subset(n: int, mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(1, n + 1) if mask >> (n - i) & 1)


def point_index(x: Iterable[int]) -> int:
    idx = 0
    for b in x:
        if b not in (0, 1):
            raise ValueError(f"point coordinates must be 0/1, got {b}")
        idx = idx << 1 | b
    return idx


def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    out = np.zeros(2**n, dtype=np.int64)
    for b in range(n):
        out += (idx >> b) & 1
    return out


@dataclass
class MultilinearPolynomial:
    """``sum_S c_S prod_{i in S} x_i`` with coefficients keyed by bitmask."""

    n: int
    coeffs: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        full = (1 << self.n) - 1
        for m in self.coeffs:
            if m & ~full:
                raise ValueError(f"mask {m:b} is not a subset of {self.n} sites")

    @classmethod
    def from_subsets(cls, n: int, coeffs: dict) -> "MultilinearPolynomial":
        return cls(n, {subset_mask(n, s): float(c) for s, c in coeffs.items()})

    @classmethod
    def from_dense(cls, n: int, table: np.ndarray, tol: float = 0.0) -> "MultilinearPolynomial":
        idx = np.flatnonzero(np.abs(table) > tol)
        return cls(n, {int(m): float(table[m]) for m in idx})

    def coefficient(self, sites: Iterable[int]) -> float:
        return self.coeffs.get(subset_mask(self.n, sites), 0.0)

    def by_subset(self) -> dict[tuple[int, ...], float]:
        return {mask_subset(self.n, m): c for m, c in sorted(self.coeffs.items())}

    def dense(self) -> np.ndarray:
        if self.n > MAX_SITES:
            raise GuardError(f"dense coefficient table limited to n <= {MAX_SITES}")
        out = np.zeros(2**self.n)
        for m, c in self.coeffs.items():
            out[m] = c
        return out

    def table(self) -> np.ndarray:
        """Values on all of ``{0,1}^n`` (subset-sum of the coefficients)."""
        return zeta_transform(self.dense())


def evaluate(p: MultilinearPolynomial, x) -> float:
    x = list(x)
    if len(x) != p.n:
        raise ValueError(f"point has {len(x)} coordinates, polynomial has {p.n}")
    xm = point_index(x)
    return math.fsum(c for m, c in p.coeffs.items() if m & ~xm == 0)


def degree(p: MultilinearPolynomial, tol: float = COEFF_TOL) -> int:
    """Largest ``|S|`` with ``|c_S| > tol``; ``-1`` for the zero polynomial."""
    live = [bin(m).count("1") for m, c in p.coeffs.items() if abs(c) > tol]
    return max(live, default=-1)


class BooleanFunction:
    """Real function on ``{0,1}^n`` stored as a table of ``2^n`` values."""

    def __init__(self, n: int, table):
        table = np.asarray(table, dtype=float).ravel()
        if n > MAX_TABLE_SITES:
            raise GuardError(f"table mode limited to n <= {MAX_TABLE_SITES}")
        if table.size != 2**n:
            raise ValueError(f"table has {table.size} entries, expected {2**n}")
        if not np.all(np.isfinite(table)):
            raise ValueError("Boolean function values must be finite")
        self.n = n
        self.table = table
        self.table.setflags(write=False)

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[tuple[int, ...]], float]) -> "BooleanFunction":
        if n > MAX_SITES:
            raise GuardError(f"n <= {MAX_SITES} required")
        vals = np.array([fn(x) for x in itertools.product((0, 1), repeat=n)], dtype=float)
        obj = cls.__new__(cls)
        if not np.all(np.isfinite(vals)):
            raise ValueError("Boolean function values must be finite")
        obj.n, obj.table = n, vals
        obj.table.setflags(write=False)
        return obj

    def __call__(self, x) -> float:
        return float(self.table[point_index(x)])

    def restrict_last(self, bit: int) -> "BooleanFunction":
        """Fix ``x_n = bit``; the result lives on the first ``n - 1`` sites."""
        if bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")
        return BooleanFunction(self.n - 1, self.table[bit::2])

    def weights(self) -> np.ndarray:
        return _popcounts(self.n)


def moebius_coefficients(f: BooleanFunction, backend: str | None = None) -> MultilinearPolynomial:
    """``c_S = sum_{T subset S} (-1)^{|S|-|T|} f(1_T)``."""
    if f.n > MAX_SITES:
        raise GuardError(f"n <= {MAX_SITES} required")
    coeffs = moebius_transform(np.array(f.table), backend=backend)
    return MultilinearPolynomial.from_dense(f.n, coeffs)


def junta(n: int, sites: Iterable[int], values, base: float = 0.0) -> BooleanFunction:
    """Function of the listed coordinates only; ``values`` is indexed by their bits in order."""
    sites = list(sites)
    values = np.asarray(values, dtype=float)
    if values.size != 2 ** len(sites):
        raise ValueError("values must have 2^|sites| entries")
    pts = np.array(list(itertools.product((0, 1), repeat=n)))
    idx = np.zeros(len(pts), dtype=np.int64)
    for i in sites:
        idx = idx * 2 + pts[:, i - 1]
    return BooleanFunction(n, values[idx] + base)


def _monomial_matrix(n: int, deg: int, rows: np.ndarray | None = None) -> tuple[np.ndarray, list[int]]:
    masks = [m for m in range(2**n) if bin(m).count("1") <= deg]
    pts = np.arange(2**n) if rows is None else rows
    mat = (np.array(masks)[None, :] & ~pts[:, None]) == 0
    return mat.astype(float), masks


def _null_dim(mat: np.ndarray) -> int:
    cols = mat.shape[1]
    if mat.shape[0] == 0:
        return cols
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return cols
    return cols - int(np.sum(s > RANK_RTOL * s[0]))


@dataclass
class SliceCertificate:
    n: int
    r: int
    unknowns: int
    equations: int
    rank: int
    null_vector: dict[tuple[int, ...], float] | None


def middle_slice_rank_test(n: int, r: int) -> tuple[int, SliceCertificate]:
    """Dimension of degree-``<= r`` polynomials vanishing off the middle slice.

    Zero means only the zero polynomial survives; a positive answer comes with
    one null vector as a certificate.
    """
    if n % 2 or n < 2:
        raise ValueError("n must be even and positive")
    if n > MAX_SLICE_SITES:
        raise GuardError(f"n <= {MAX_SLICE_SITES} required")
    if r < 0:
        raise ValueError("r must be non-negative")
    w = _popcounts(n)
    rows = np.flatnonzero(w != n // 2)
    mat, masks = _monomial_matrix(n, r, rows)
    dim = _null_dim(mat)
    null = None
    if dim > 0:
        _, s, vh = np.linalg.svd(mat)
        v = vh[-1]
        v = v / np.max(np.abs(v))
        null = {mask_subset(n, m): float(c) for m, c in zip(masks, v) if abs(c) > 1e-9}
    rank = len(masks) - dim
    return dim, SliceCertificate(n, r, len(masks), len(rows), rank, null)


def diagonal_function(rho: DensityOperator) -> BooleanFunction:
    """``f(x) = <x|rho|x>`` for a qubit state."""
    if rho.site_dim != 2:
        raise ValueError("diagonal_function requires qubits (d = 2)")
    if rho.n_sites > MAX_SLICE_SITES:
        raise GuardError(f"n <= {MAX_SLICE_SITES} required")
    return BooleanFunction(rho.n_sites, np.real(np.diag(rho.matrix)))


def diagonal_pieces(rho: DensityOperator) -> list[BooleanFunction]:
    """The diagonal function itself for even ``n``; its two halves ``x_n = 0, 1`` for odd ``n``."""
    f = diagonal_function(rho)
    if f.n % 2 == 0:
        return [f]
    return [f.restrict_last(0), f.restrict_last(1)]


def low_degree_fit_residual(f: BooleanFunction, deg: int) -> float:
    """Euclidean residual of the best degree-``<= deg`` least-squares fit over all points."""
    if deg < 0:
        raise ValueError("deg must be non-negative")
    mat, _ = _monomial_matrix(f.n, min(deg, f.n))
    coef, *_ = np.linalg.lstsq(mat, f.table, rcond=None)
    return float(np.linalg.norm(mat @ coef - f.table))
