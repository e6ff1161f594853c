"""Distributions on ``{0..d-1}^n``, Hamming-cost transport and the method of types.

Strings are keyed by their digit representation (``"0110"``), site 1 first.
Internally a distribution also carries integer codes in base ``d`` with the
same big-endian ordering as the quantum basis labels, so lexicographic key
order and numeric code order coincide.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.optimize
import scipy.sparse as sp

from .kernels import hamming_matrix
from .tensor import MAX_SUBSETS, DensityOperator, GuardError

MAX_ENUM_SITES = 20
MAX_SUPPORT = 2**21
MAX_COUPLING = 10**6
MAX_DENSITY_DIM = 2**12
PROB_TOL = 1e-12


def _encode(key: str, d: int) -> int:
    code = 0
    for c in key:
        code = code * d + int(c)
    return code


def _decode(code: int, d: int, n: int) -> str:
    digits = []
    for _ in range(n):
        code, r = divmod(code, d)
        digits.append(str(r))
    return "".join(reversed(digits))


@dataclass(frozen=True, eq=False)
class ClassicalDistribution:
    d: int
    n: int
    probs: dict[str, float]
    _codes: np.ndarray = field(init=False, repr=False)
    _weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.d < 2 or self.d > 10:
            raise ValueError("alphabet size must be between 2 and 10")
        items = []
        for key, w in self.probs.items():
            w = float(w)
            if len(key) != self.n or any(not c.isdigit() or int(c) >= self.d for c in key):
                raise ValueError(f"key {key!r} is not a length-{self.n} string over {self.d} symbols")
            if w < 0:
                raise ValueError(f"negative probability {w} at {key!r}")
            if w > 0:
                items.append((key, w))
        items.sort()
        total = math.fsum(w for _, w in items)
        if abs(total - 1) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total}")
        object.__setattr__(self, "probs", dict(items))
        codes = np.array([_encode(k, self.d) for k, _ in items], dtype=np.int64)
        object.__setattr__(self, "_codes", codes)
        object.__setattr__(self, "_weights", np.array([w for _, w in items]))

    @classmethod
    def from_arrays(cls, d: int, n: int, codes, weights) -> "ClassicalDistribution":
        codes = np.asarray(codes, dtype=np.int64)
        weights = np.asarray(weights, dtype=float)
        acc: dict[int, float] = {}
        for c, w in zip(codes.tolist(), weights.tolist()):
            acc[c] = acc.get(c, 0.0) + w
        total = math.fsum(acc.values())
        return cls(d, n, {_decode(c, d, n): w / total for c, w in acc.items() if w > 0})

    @property
    def codes(self) -> np.ndarray:
        return self._codes

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def support_size(self) -> int:
        return len(self.probs)

    def digits(self) -> np.ndarray:
        """``(support, n)`` array of symbols, site 1 in column 0."""
        out = np.empty((self._codes.size, self.n), dtype=np.int64)
        c = self._codes.copy()
        for j in range(self.n - 1, -1, -1):
            out[:, j] = c % self.d
            c //= self.d
        return out

    def marginal(self, sites: Iterable[int]) -> "ClassicalDistribution":
        """Marginal on the given 1-based sites, kept in increasing order."""
        sites = sorted(set(int(i) for i in sites))
        if not sites or sites[0] < 1 or sites[-1] > self.n:
            raise ValueError(f"invalid site subset {sites} for n={self.n}")
        dig = self.digits()[:, [i - 1 for i in sites]]
        codes = dig @ (self.d ** np.arange(len(sites) - 1, -1, -1))
        return ClassicalDistribution.from_arrays(self.d, len(sites), codes, self._weights)

    def single_site_marginals(self) -> list[np.ndarray]:
        dig = self.digits()
        return [np.bincount(dig[:, j], weights=self._weights, minlength=self.d) for j in range(self.n)]

    def dense(self) -> np.ndarray:
        out = np.zeros(self.d**self.n)
        out[self._codes] = self._weights
        return out

    def __repr__(self):
        return f"ClassicalDistribution(d={self.d}, n={self.n}, support={self.support_size})"


def point_mass(key: str, d: int = 2) -> ClassicalDistribution:
    return ClassicalDistribution(d, len(key), {key: 1.0})


def _single(p: Sequence[float]) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 2 or np.any(p < 0) or abs(p.sum() - 1) > PROB_TOL:
        raise ValueError(f"{p} is not a distribution on at least two symbols")
    return p


# -- transport -------------------------------------------------------------


@dataclass
class Coupling:
    mass: dict[tuple[str, str], float]
    p: ClassicalDistribution
    q: ClassicalDistribution

    def marginal_errors(self) -> tuple[float, float]:
        rows: dict[str, float] = {}
        cols: dict[str, float] = {}
        for (x, y), m in self.mass.items():
            rows[x] = rows.get(x, 0.0) + m
            cols[y] = cols.get(y, 0.0) + m
        er = max(abs(rows.get(k, 0.0) - v) for k, v in self.p.probs.items())
        ec = max(abs(cols.get(k, 0.0) - v) for k, v in self.q.probs.items())
        return er, ec

    def cost(self) -> float:
        return math.fsum(m * sum(a != b for a, b in zip(x, y)) for (x, y), m in self.mass.items())


def hamming_w1(p: ClassicalDistribution, q: ClassicalDistribution) -> tuple[float, Coupling]:
    """Optimal transport cost between ``p`` and ``q`` under the Hamming metric."""
    if (p.d, p.n) != (q.d, q.n):
        raise ValueError("distributions live on different spaces")
    m, k = p.support_size, q.support_size
    if m * k > MAX_COUPLING:
        raise GuardError(f"coupling has {m * k} variables; limit is {MAX_COUPLING}")
    cost = hamming_matrix(p.codes, q.codes, p.n, p.d).astype(float)
    rows = sp.kron(sp.eye(m), np.ones((1, k)), format="csr")
    cols = sp.kron(np.ones((1, m)), sp.eye(k), format="csr")
    a_eq = sp.vstack([rows, cols[:-1]], format="csr")
    b_eq = np.concatenate([p.weights, q.weights[:-1]])
    res = scipy.optimize.linprog(
        cost.ravel(),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    x = np.clip(res.x.reshape(m, k), 0.0, None)
    pk = list(p.probs)
    qk = list(q.probs)
    nz = np.argwhere(x > 1e-15)
    mass = {(pk[i], qk[j]): float(x[i, j]) for i, j in nz}
    return float(res.fun), Coupling(mass, p, q)


# -- types -----------------------------------------------------------------


def _check_type(t: Sequence[int]) -> tuple[int, ...]:
    t = tuple(int(c) for c in t)
    if len(t) < 2 or any(c < 0 for c in t) or sum(t) < 1:
        raise ValueError(f"{t} is not a type vector")
    return t


def type_class_size(t: Sequence[int]) -> int:
    t = _check_type(t)
    out = math.factorial(sum(t))
    for c in t:
        out //= math.factorial(c)
    return out


def _multiset_strings(t: list[int], n: int):
    if n == 0:
        yield ""
        return
    for s, c in enumerate(t):
        if c:
            t[s] -= 1
            for rest in _multiset_strings(t, n - 1):
                yield str(s) + rest
            t[s] += 1


def type_class_uniform(t: Sequence[int]) -> ClassicalDistribution:
    """Uniform distribution on the strings with symbol counts ``t``."""
    t = _check_type(t)
    n, d = sum(t), len(t)
    size = type_class_size(t)
    if n > MAX_ENUM_SITES or size > MAX_SUPPORT:
        raise GuardError(f"type class of size {size} (n={n}) is too large to enumerate")
    w = 1.0 / size
    return ClassicalDistribution(d, n, {s: w for s in _multiset_strings(list(t), n)})


def type_distribution(t: Sequence[int]) -> np.ndarray:
    t = _check_type(t)
    return np.array(t, dtype=float) / sum(t)


def log_type_class_lower_bound(t: Sequence[int]) -> float:
    """``ln |T_t| >= n H(t) - (d - 1) ln(n + 1)`` (nats)."""
    t = _check_type(t)
    n, d = sum(t), len(t)
    return n * shannon_entropy(type_distribution(t)) - (d - 1) * math.log(n + 1)


def quantitative_wass_bound(t: Sequence[int], n: int | None = None) -> float:
    """Upper bound ``sqrt((d-1) ln(n+1) / (2n))`` on the per-site Hamming W1 between
    the uniform distribution on a type class and the matching i.i.d. law."""
    t = _check_type(t)
    if n is None:
        n = sum(t)
    if n != sum(t):
        raise ValueError(f"type {t} does not sum to n={n}")
    return math.sqrt((len(t) - 1) * math.log(n + 1) / (2 * n))


# -- sources ---------------------------------------------------------------


def iid_distribution(p: Sequence[float], n: int) -> ClassicalDistribution:
    p = _single(p)
    if n > MAX_ENUM_SITES:
        raise GuardError(f"i.i.d. enumeration limited to n <= {MAX_ENUM_SITES}")
    syms = np.flatnonzero(p > 0)
    if syms.size**n > MAX_SUPPORT:
        raise GuardError(f"support {syms.size}^{n} too large")
    d = p.size
    codes = np.zeros(1, dtype=np.int64)
    weights = np.ones(1)
    for _ in range(n):
        codes = (codes[:, None] * d + syms[None, :]).ravel()
        weights = (weights[:, None] * p[syms][None, :]).ravel()
    return ClassicalDistribution(d, n, {_decode(c, d, n): w for c, w in zip(codes.tolist(), weights.tolist())})


@dataclass(frozen=True)
class PairedSource:
    """Odd positions i.i.d. from ``p``; each even position repeats its predecessor.

    Marginals are computed structurally, so ``n`` may be far beyond what
    :meth:`distribution` can enumerate.
    """

    p: tuple[float, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(_single(self.p).tolist()))
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def d(self) -> int:
        return len(self.p)

    def marginal(self, sites: Iterable[int]) -> ClassicalDistribution:
        sites = sorted(set(int(i) for i in sites))
        if not sites or sites[0] < 1 or sites[-1] > self.n:
            raise ValueError(f"invalid site subset {sites} for n={self.n}")
        groups: dict[int, list[int]] = {}
        for pos, s in enumerate(sites):
            groups.setdefault((s + 1) // 2, []).append(pos)
        group_list = list(groups.values())
        if self.d ** len(group_list) > MAX_SUPPORT:
            raise GuardError("marginal support too large")
        pv = np.asarray(self.p)
        syms = [s for s in range(self.d) if pv[s] > 0]
        probs: dict[str, float] = {}
        for assign in itertools.product(syms, repeat=len(group_list)):
            digits = [0] * len(sites)
            w = 1.0
            for sym, members in zip(assign, group_list):
                w *= pv[sym]
                for pos in members:
                    digits[pos] = sym
            key = "".join(map(str, digits))
            probs[key] = probs.get(key, 0.0) + w
        return ClassicalDistribution(self.d, len(sites), probs)

    def distribution(self) -> ClassicalDistribution:
        if self.n > 2 * MAX_ENUM_SITES:
            raise GuardError(f"paired source enumeration limited to n <= {2 * MAX_ENUM_SITES}")
        return self.marginal(range(1, self.n + 1))


def paired_source(p: Sequence[float], n: int) -> ClassicalDistribution:
    return PairedSource(tuple(p), n).distribution()


def xi_distribution(n: int) -> ClassicalDistribution:
    """Uniform on balanced bit strings (even ``n``); odd ``n`` appends a fresh uniform bit."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n % 2 == 0:
        return type_class_uniform((n // 2, n // 2))
    if n == 1:
        return ClassicalDistribution(2, 1, {"0": 0.5, "1": 0.5})
    base = xi_distribution(n - 1)
    probs = {}
    for k, w in base.probs.items():
        probs[k + "0"] = w / 2
        probs[k + "1"] = w / 2
    return ClassicalDistribution(2, n, probs)


# -- marginal statistics ---------------------------------------------------


def tv_l1(p: ClassicalDistribution, q: ClassicalDistribution) -> float:
    """``sum_x |p(x) - q(x)|`` (trace-norm convention, no factor 1/2)."""
    keys = set(p.probs) | set(q.probs)
    return math.fsum(abs(p.probs.get(k, 0.0) - q.probs.get(k, 0.0)) for k in keys)


def _iid_dense(p: np.ndarray, k: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(k):
        out = np.kron(out, p)
    return out


def _marginal_gap(source, p: np.ndarray, sites) -> float:
    m = source.marginal(sites)
    return float(np.abs(m.dense() - _iid_dense(p, len(sites))).sum())


def avg_marginal_tv(source, p: Sequence[float], k: int) -> float:
    """Exact ``E_{|I|=k} sum |(p_n)_I - p^{x k}|`` by enumerating all ``k``-subsets.

    ``source`` is anything with ``n`` and ``marginal(sites)``.
    """
    p = _single(p)
    n = source.n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    count = math.comb(n, k)
    if count > MAX_SUBSETS:
        raise GuardError(f"C({n},{k}) = {count} subsets exceeds {MAX_SUBSETS}")
    vals = [_marginal_gap(source, p, c) for c in itertools.combinations(range(1, n + 1), k)]
    return math.fsum(vals) / count


def avg_marginal_tv_sampled(source, p: Sequence[float], k: int, samples: int, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo version of :func:`avg_marginal_tv`; returns ``(mean, stderr)``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    p = _single(p)
    rng = np.random.default_rng(seed)
    n = source.n
    vals = np.array(
        [_marginal_gap(source, p, np.sort(rng.choice(n, size=k, replace=False)) + 1) for _ in range(samples)]
    )
    err = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return float(vals.mean()), err


# -- information measures --------------------------------------------------


def shannon_entropy(p: Sequence[float]) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def classical_entropy(p: ClassicalDistribution) -> float:
    return shannon_entropy(p.weights)


def kl_divergence(p: ClassicalDistribution, q: ClassicalDistribution) -> float:
    if (p.d, p.n) != (q.d, q.n):
        raise ValueError("distributions live on different spaces")
    total = []
    for k, w in p.probs.items():
        v = q.probs.get(k, 0.0)
        if v <= 0:
            return math.inf
        total.append(w * math.log(w / v))
    return max(0.0, math.fsum(total))


def classical_to_density(p: ClassicalDistribution) -> DensityOperator:
    dim = p.d**p.n
    if dim > MAX_DENSITY_DIM:
        raise GuardError(f"density of side {dim} exceeds {MAX_DENSITY_DIM}")
    return DensityOperator(np.diag(p.dense()).astype(complex), p.d)


def diagonal_distribution(rho: DensityOperator) -> ClassicalDistribution:
    diag = np.clip(np.real(np.diag(rho.matrix)), 0.0, None)
    codes = np.flatnonzero(diag > 0)
    return ClassicalDistribution.from_arrays(rho.site_dim, rho.n_sites, codes, diag[codes])


def random_distribution(d: int, n: int, rng=None, support: int | None = None) -> ClassicalDistribution:
    """Normalized squared Gaussians on all (or ``support`` random) strings."""
    rng = np.random.default_rng(rng)
    size = d**n
    codes = np.arange(size) if support is None else np.sort(rng.choice(size, size=support, replace=False))
    w = rng.standard_normal(codes.size) ** 2
    return ClassicalDistribution.from_arrays(d, n, codes, w / w.sum())


# -- JSON ------------------------------------------------------------------


def distribution_to_json(p: ClassicalDistribution) -> dict:
    return {"d": p.d, "n": p.n, "probs": dict(p.probs)}


def distribution_from_json(doc: dict) -> ClassicalDistribution:
    return ClassicalDistribution(int(doc["d"]), int(doc["n"]), {str(k): float(v) for k, v in doc["probs"].items()})


def load_distribution(path) -> ClassicalDistribution:
    with open(path) as fh:
        return distribution_from_json(json.load(fh))
