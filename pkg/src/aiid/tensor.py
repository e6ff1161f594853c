"""Dense linear algebra on multipartite operators.

Sites are numbered ``1..n`` and ordered big-endian: site 1 is the most
significant digit of a computational-basis label, and the leftmost factor of
every Kronecker product. All entropies are in nats.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
EIG_CLIP = 1e-14
MAX_SUBSETS = 10**6
MAX_SIDE = 2**12


class GuardError(ValueError):
    """A problem is too large for the exact (enumerative) code path."""


def hermitize(x: np.ndarray) -> np.ndarray:
    return (x + x.conj().T) / 2


def _site_count(side: int, d: int) -> int:
    n = round(math.log(side, d)) if side > 1 else 0
    if d**n != side:
        raise ValueError(f"matrix side {side} is not a power of site_dim {d}")
    return n


@dataclass(frozen=True)
class SiteSubset:
    """Strictly increasing site labels drawn from ``{1, ..., n}``."""

    n: int
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"subset indices must be strictly increasing: {idx}")
        if idx and (idx[0] < 1 or idx[-1] > self.n):
            raise ValueError(f"subset {idx} not contained in [1, {self.n}]")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, n: int, indices: Iterable[int]) -> "SiteSubset":
        return cls(n, tuple(sorted(set(indices))))

    def complement(self) -> "SiteSubset":
        keep = set(self.indices)
        return SiteSubset(self.n, tuple(i for i in range(1, self.n + 1) if i not in keep))

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


@dataclass(frozen=True)
class Permutation:
    """Site permutation; ``image[i - 1]`` is where site ``i`` is sent."""

    image: tuple[int, ...]

    def __post_init__(self):
        img = tuple(int(i) for i in self.image)
        if sorted(img) != list(range(1, len(img) + 1)):
            raise ValueError(f"{img} is not a permutation of 1..{len(img)}")
        object.__setattr__(self, "image", img)

    @property
    def n(self) -> int:
        return len(self.image)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.image, start=1):
            inv[j - 1] = i
        return Permutation(tuple(inv))

    def __call__(self, i: int) -> int:
        return self.image[i - 1]


@dataclass(frozen=True, eq=False)
class Operator:
    """A (not necessarily Hermitian) operator on ``n_sites`` sites of dimension ``site_dim``."""

    matrix: np.ndarray
    site_dim: int
    n_sites: int = field(default=-1)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {m.shape}")
        if m.shape[0] > MAX_SIDE:
            raise GuardError(f"matrix side {m.shape[0]} exceeds {MAX_SIDE}")
        if self.site_dim < 2:
            raise ValueError("site_dim must be at least 2")
        n = _site_count(m.shape[0], self.site_dim)
        if self.n_sites not in (-1, n):
            raise ValueError(f"matrix side {m.shape[0]} does not match {self.n_sites} sites")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "n_sites", n)
        self._validate()

    def _validate(self):
        pass

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def __sub__(self, other: "Operator") -> "Operator":
        _same_shape(self, other)
        return Operator(self.matrix - other.matrix, self.site_dim)

    def __add__(self, other: "Operator") -> "Operator":
        _same_shape(self, other)
        return Operator(self.matrix + other.matrix, self.site_dim)

    def __mul__(self, c) -> "Operator":
        return Operator(c * self.matrix, self.site_dim)

    __rmul__ = __mul__

    def __repr__(self):
        return f"{type(self).__name__}(site_dim={self.site_dim}, n_sites={self.n_sites})"


class HermitianObservable(Operator):
    def _validate(self):
        if np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("observable is not Hermitian")


class DensityOperator(HermitianObservable):
    """Validated density matrix: Hermitian, unit trace, positive semidefinite."""

    def _validate(self):
        super()._validate()
        m = hermitize(self.matrix)
        tr = np.trace(m).real
        if abs(tr - 1) > TRACE_TOL:
            raise ValueError(f"density operator has trace {tr}")
        lo = np.linalg.eigvalsh(m).min()
        if lo < -PSD_TOL:
            raise ValueError(f"density operator has negative eigenvalue {lo}")


def _same_shape(a: Operator, b: Operator):
    if a.site_dim != b.site_dim or a.n_sites != b.n_sites:
        raise ValueError(
            f"shape mismatch: (d={a.site_dim}, n={a.n_sites}) vs (d={b.site_dim}, n={b.n_sites})"
        )


def _rewrap(template: Operator, matrix: np.ndarray, site_dim: int | None = None) -> Operator:
    d = template.site_dim if site_dim is None else site_dim
    if isinstance(template, DensityOperator):
        return DensityOperator(hermitize(matrix), d)
    if isinstance(template, HermitianObservable):
        return HermitianObservable(hermitize(matrix), d)
    return Operator(matrix, d)


def density(matrix, site_dim: int = 2) -> DensityOperator:
    return DensityOperator(hermitize(np.asarray(matrix, dtype=complex)), site_dim)


def pure(vector, site_dim: int = 2) -> DensityOperator:
    v = np.asarray(vector, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return DensityOperator(np.outer(v, v.conj()), site_dim)


def basis_state(label: str | Sequence[int], site_dim: int = 2) -> DensityOperator:
    """``|x><x|`` for a digit string such as ``"0110"``."""
    digits = [int(c) for c in label]
    if site_dim ** len(digits) > MAX_SIDE:
        raise GuardError(f"{len(digits)} sites of dimension {site_dim} exceed matrix side {MAX_SIDE}")
    index = 0
    for c in digits:
        index = index * site_dim + c
    v = np.zeros(site_dim ** len(digits), dtype=complex)
    v[index] = 1
    return DensityOperator(np.outer(v, v), site_dim)


def tensor_product(a: Operator, b: Operator) -> Operator:
    if a.site_dim != b.site_dim:
        raise ValueError(f"site_dim mismatch: {a.site_dim} vs {b.site_dim}")
    m = np.kron(a.matrix, b.matrix)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(m, a.site_dim)
    if isinstance(a, HermitianObservable) and isinstance(b, HermitianObservable):
        return HermitianObservable(m, a.site_dim)
    return Operator(m, a.site_dim)


def tensor_power(a: Operator, n: int) -> Operator:
    if n < 1:
        raise ValueError("tensor power needs n >= 1")
    out = a
    for _ in range(n - 1):
        out = tensor_product(out, a)
    return out


def kron_all(ops: Sequence[Operator]) -> Operator:
    out = ops[0]
    for op in ops[1:]:
        out = tensor_product(out, op)
    return out


def partial_trace_matrix(m: np.ndarray, d: int, keep: Sequence[int]) -> np.ndarray:
    """Trace out every site not in ``keep`` (1-based, increasing) from a raw matrix."""
    n = _site_count(m.shape[0], d)
    keep0 = [i - 1 for i in keep]
    drop0 = [i for i in range(n) if i not in set(keep0)]
    if not drop0:
        return np.array(m, copy=True)
    t = m.reshape((d,) * (2 * n))
    order = keep0 + drop0 + [n + i for i in keep0] + [n + i for i in drop0]
    dk, dt = d ** len(keep0), d ** len(drop0)
    t = t.transpose(order).reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def partial_trace(op: Operator, keep: SiteSubset | Iterable[int]) -> Operator:
    """Reduced operator on the sites in ``keep``; Tr over the complement."""
    if not isinstance(keep, SiteSubset):
        keep = SiteSubset.of(op.n_sites, keep)
    if keep.n != op.n_sites:
        raise ValueError(f"subset over {keep.n} sites used on a {op.n_sites}-site operator")
    if len(keep) == 0:
        raise ValueError("empty keep set; use Operator.trace() for the full trace")
    return _rewrap(op, partial_trace_matrix(op.matrix, op.site_dim, keep.indices))


def permute_sites(op: Operator, perm: Permutation) -> Operator:
    """Conjugate by the unitary sending the factor on site ``i`` to site ``perm(i)``."""
    n, d = op.n_sites, op.site_dim
    if perm.n != n:
        raise ValueError(f"permutation on {perm.n} sites applied to {n}-site operator")
    inv = perm.inverse().image
    axes = [inv[j] - 1 for j in range(n)]
    t = op.matrix.reshape((d,) * (2 * n)).transpose(axes + [n + a for a in axes])
    return _rewrap(op, t.reshape(op.dim, op.dim))


def permutation_unitary(perm: Permutation, d: int) -> np.ndarray:
    n = perm.n
    eye = np.eye(d**n).reshape((d,) * n + (d**n,))
    inv = perm.inverse().image
    return eye.transpose([inv[j] - 1 for j in range(n)] + [n]).reshape(d**n, d**n)


def _eigvalsh(x: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(hermitize(x))


def _check_hermitian(x: np.ndarray, tol: float = 1e-9):
    scale = max(1.0, float(np.max(np.abs(x), initial=0.0)))
    if np.max(np.abs(x - x.conj().T), initial=0.0) > tol * scale:
        raise ValueError("input is not Hermitian")


def _as_matrix(x) -> np.ndarray:
    return x.matrix if isinstance(x, Operator) else np.asarray(x, dtype=complex)


def trace_norm(x) -> float:
    m = _as_matrix(x)
    _check_hermitian(m)
    return float(np.sum(np.abs(_eigvalsh(m))))


def operator_norm(x) -> float:
    m = _as_matrix(x)
    _check_hermitian(m)
    return float(np.max(np.abs(_eigvalsh(m)), initial=0.0))


def _entropy_of_spectrum(evals: np.ndarray) -> float:
    p = evals[evals > EIG_CLIP]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(rho: Operator) -> float:
    """S(rho) = -Tr rho ln rho, in nats."""
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho.matrix, rho.site_dim)
    return max(0.0, _entropy_of_spectrum(_eigvalsh(rho.matrix)))


def relative_entropy(rho: Operator, sigma: Operator) -> float:
    """D(rho||sigma) in nats; ``inf`` when supp rho is not inside supp sigma."""
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho.matrix, rho.site_dim)
    if not isinstance(sigma, DensityOperator):
        sigma = DensityOperator(sigma.matrix, sigma.site_dim)
    _same_shape(rho, sigma)
    lam, vec = np.linalg.eigh(hermitize(rho.matrix))
    mu, w = np.linalg.eigh(hermitize(sigma.matrix))
    support = mu > EIG_CLIP
    # weight of rho on ker(sigma)
    overlap = np.abs(w.conj().T @ vec) ** 2
    leak = float(np.sum(overlap[~support] @ lam)) if np.any(~support) else 0.0
    if leak > TRACE_TOL:
        return math.inf
    lam_pos = lam[lam > EIG_CLIP]
    neg_ent = float(np.sum(lam_pos * np.log(lam_pos)))
    cross = float(np.sum((overlap[support] @ np.clip(lam, 0, None)) * np.log(mu[support])))
    return max(0.0, neg_ent - cross)


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log(x) - (1 - x) * math.log(1 - x)


def purify(rho: DensityOperator) -> np.ndarray:
    """Canonical purification ``sum_i sqrt(lam_i) |v_i>|i>``.

    Eigenvalues are taken in nonincreasing order, with ties broken by the
    lexicographic order of the (phase-fixed) eigenvectors. The result is a
    state vector on ``rho.dim ** 2`` amplitudes; the first tensor factor is
    the original system.
    """
    lam, vec = np.linalg.eigh(hermitize(rho.matrix))
    lam = np.clip(lam, 0.0, None)
    cols = []
    for j in range(vec.shape[1]):
        v = vec[:, j]
        k = int(np.argmax(np.abs(v) > 1e-12))
        v = v * (abs(v[k]) / v[k])
        cols.append(v)
    keys = [
        (-round(float(lam[j]), 12), tuple(np.round(np.concatenate([cols[j].real, cols[j].imag]), 12)))
        for j in range(len(cols))
    ]
    order = sorted(range(len(cols)), key=lambda j: keys[j])
    dim = rho.dim
    psi = np.zeros(dim * dim, dtype=complex)
    for slot, j in enumerate(order):
        e = np.zeros(dim)
        e[slot] = 1
        psi += math.sqrt(lam[j]) * np.kron(cols[j], e)
    return psi / np.linalg.norm(psi)


def subset_average(n: int, k: int, f: Callable[[SiteSubset], float]) -> float:
    """Exact mean of ``f`` over all ``k``-subsets of ``[n]``."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    count = math.comb(n, k)
    if count > MAX_SUBSETS:
        raise GuardError(f"C({n},{k}) = {count} subsets exceeds {MAX_SUBSETS}; use sampling")
    total = math.fsum(f(SiteSubset(n, c)) for c in itertools.combinations(range(1, n + 1), k))
    return total / count


def random_density(n_sites: int, site_dim: int = 2, rng=None, rank: int | None = None) -> DensityOperator:
    """Normalized ``G G^dagger`` with standard complex Gaussian ``G``."""
    rng = np.random.default_rng(rng)
    dim = site_dim**n_sites
    r = dim if rank is None else rank
    g = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    m = g @ g.conj().T
    return DensityOperator(hermitize(m / np.trace(m).real), site_dim)


def random_pure(n_sites: int, site_dim: int = 2, rng=None) -> DensityOperator:
    return random_density(n_sites, site_dim, rng, rank=1)


def random_hermitian(dim: int, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return hermitize(g)


# -- JSON operator files ---------------------------------------------------


def operator_to_json(op: Operator, **extra) -> dict:
    doc = {
        "site_dim": op.site_dim,
        "n_sites": op.n_sites,
        "re": op.matrix.real.tolist(),
        "im": op.matrix.imag.tolist(),
    }
    doc.update(extra)
    return doc


def operator_from_json(doc: dict, kind: type = DensityOperator) -> Operator:
    m = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)
    op = kind(hermitize(m) if kind is not Operator else m, int(doc["site_dim"]))
    if op.n_sites != int(doc["n_sites"]):
        raise ValueError(f"n_sites={doc['n_sites']} inconsistent with matrix side {m.shape[0]}")
    return op


def load_operator(path, kind: type = DensityOperator) -> Operator:
    with open(path) as fh:
        return operator_from_json(json.load(fh), kind)
