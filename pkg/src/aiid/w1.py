"""Quantum Wasserstein-1 distance, Lipschitz constants and the local-variation norm.

The W1 norm of a traceless Hermitian ``D = rho - sigma`` is

    min  sum_i ||X_i||_1 / 2   s.t.  D = sum_i X_i,  Tr_{A_i} X_i = 0,

solved with the split ``X_i = P_i - Q_i`` (``P_i, Q_i >= 0``), which makes
the objective ``1/2 sum_i Tr(P_i + Q_i)``. Writing ``X_i = c_i (tau_i - eta_i)``
with ``tau_i, eta_i`` the normalized positive and negative parts of ``X_i``
recovers the neighbouring-state form; ``Tr_{A_i} X_i = 0`` is exactly
``Tr_{A_i} tau_i = Tr_{A_i} eta_i``.

The dual maximizes ``Tr[D H]`` over observables with ``||H - 1_i (x) M_i|| <= 1/2``
for every site ``i``, i.e. quantum Lipschitz constant at most one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import conic
from .tensor import (
    DensityOperator,
    GuardError,
    Operator,
    SiteSubset,
    _same_shape,
    binary_entropy,
    hermitize,
    kron_all,
    partial_trace_matrix,
    relative_entropy,
    trace_norm,
)

LV_EXACT_MAX_SITES = 12


def insert_identity(m: np.ndarray, d: int, n: int, site: int) -> np.ndarray:
    """``1_{A_site} (x) M`` with ``M`` acting on the other ``n - 1`` sites, in site order."""
    left = d ** (site - 1)
    right = d ** (n - site)
    t = np.asarray(m).reshape(left, right, left, right)
    out = np.einsum("abce,st->asbcte", t, np.eye(d))
    return out.reshape(d**n, d**n)


def _drop_site(m: np.ndarray, d: int, n: int, site: int) -> np.ndarray:
    return partial_trace_matrix(m, d, [j for j in range(1, n + 1) if j != site])


def _difference(rho, sigma) -> tuple[np.ndarray, int, int]:
    if isinstance(rho, Operator) and isinstance(sigma, Operator):
        _same_shape(rho, sigma)
        return rho.matrix - sigma.matrix, rho.site_dim, rho.n_sites
    raise TypeError("expected two Operator instances")


# -- trace distance --------------------------------------------------------


def trace_distance(rho: Operator, sigma: Operator) -> float:
    delta, _, _ = _difference(rho, sigma)
    return min(1.0, 0.5 * trace_norm(hermitize(delta)))


def helstrom_success(rho: Operator, sigma: Operator) -> float:
    """Optimal probability of telling ``rho`` from ``sigma`` under a uniform prior."""
    return 0.5 * (1 + trace_distance(rho, sigma))


# -- W1 primal -------------------------------------------------------------


@dataclass
class W1Certificate:
    """A feasible decomposition ``rho - sigma = sum_i X_i`` with ``Tr_{A_i} X_i = 0``."""

    value: float
    parts: list[np.ndarray]
    site_dim: int
    n_sites: int
    solver: conic.SolverResult | None = None

    @property
    def weights(self) -> list[float]:
        return [0.5 * float(np.abs(np.linalg.eigvalsh(hermitize(x))).sum()) for x in self.parts]

    def neighbour_pair(self, i: int) -> tuple[float, np.ndarray, np.ndarray]:
        """``(c_i, tau_i, eta_i)`` for site ``i`` (1-based)."""
        x = hermitize(self.parts[i - 1])
        lam, vec = np.linalg.eigh(x)
        c = 0.5 * float(np.abs(lam).sum())
        dim = x.shape[0]
        if c <= 1e-9:
            fixed = np.eye(dim) / dim
            return c, fixed, fixed.copy()
        pos = (vec * np.clip(lam, 0, None)) @ vec.conj().T
        neg = (vec * np.clip(-lam, 0, None)) @ vec.conj().T
        return c, pos / c, neg / c

    def residuals(self, delta: np.ndarray) -> tuple[float, float]:
        """Max-abs residual of the sum constraint and of the partial-trace constraints."""
        total = np.max(np.abs(sum(self.parts) - delta))
        local = max(
            float(np.max(np.abs(_drop_site(x, self.site_dim, self.n_sites, i + 1))))
            for i, x in enumerate(self.parts)
        )
        return float(total), local


def w1_primal(rho: Operator, sigma: Operator, tol: float = conic.DEFAULT_TOL) -> W1Certificate:
    delta, d, n = _difference(rho, sigma)
    delta = hermitize(delta)
    dim = d**n
    if np.max(np.abs(delta)) == 0:
        return W1Certificate(0.0, [np.zeros((dim, dim), dtype=complex) for _ in range(n)], d, n)

    p = conic.ConicProblem()
    for i in range(1, n + 1):
        p.add_block(f"P{i}", dim)
        p.add_block(f"Q{i}", dim)
        p.set_objective(f"P{i}", 0.5 * np.eye(dim))
        p.set_objective(f"Q{i}", 0.5 * np.eye(dim))

    ident = lambda x: x  # noqa: E731
    neg = lambda x: -x  # noqa: E731
    maps = {}
    for i in range(1, n + 1):
        maps[f"P{i}"] = ident
        maps[f"Q{i}"] = neg
    # trace row is implied by the local constraints when Tr D = 0
    p.add_matrix_equality(maps, delta, skip=(0,) if abs(np.trace(delta)) < 1e-12 else ())
    for i in range(1, n + 1):
        p.add_matrix_equality(
            {
                f"P{i}": lambda x, i=i: _drop_site(x, d, n, i),
                f"Q{i}": lambda x, i=i: -_drop_site(x, d, n, i),
            },
            np.zeros((dim // d, dim // d)),
        )
    res = conic.solve_or_raise(p, tol)
    parts = [res.blocks[f"P{i}"] - res.blocks[f"Q{i}"] for i in range(1, n + 1)]
    return W1Certificate(res.primal_value, parts, d, n, res)


def hybrid_decomposition(rho: Operator, sigma: Operator) -> W1Certificate:
    """Explicit feasible decomposition with value at most ``n * d_tr(rho, sigma)``.

    Split ``rho - sigma = c (rho' - sigma')`` into orthogonal states and walk
    through the hybrids ``h_k = sigma'_{1..k} (x) rho'_{k+1..n}``; consecutive
    hybrids agree once site ``k`` is discarded.
    """
    delta, d, n = _difference(rho, sigma)
    delta = hermitize(delta)
    lam, vec = np.linalg.eigh(delta)
    c = float(np.clip(lam, 0, None).sum())
    dim = d**n
    if c <= 1e-15:
        return W1Certificate(0.0, [np.zeros((dim, dim), dtype=complex) for _ in range(n)], d, n)
    rp = (vec * np.clip(lam, 0, None)) @ vec.conj().T / c
    sp = (vec * np.clip(-lam, 0, None)) @ vec.conj().T / c

    def hybrid(k):
        if k == 0:
            return rp
        if k == n:
            return sp
        left = partial_trace_matrix(sp, d, range(1, k + 1))
        right = partial_trace_matrix(rp, d, range(k + 1, n + 1))
        return np.kron(left, right)

    hs = [hybrid(k) for k in range(n + 1)]
    parts = [c * (hs[k - 1] - hs[k]) for k in range(1, n + 1)]
    cert = W1Certificate(0.0, parts, d, n)
    cert.value = float(sum(cert.weights))
    return cert


# -- W1 dual / Lipschitz ---------------------------------------------------


@dataclass
class LipschitzWitness:
    observable: np.ndarray
    compressions: list[np.ndarray]
    value: float
    site_dim: int
    n_sites: int
    solver: conic.SolverResult | None = None

    def site_norms(self) -> list[float]:
        """``||H - 1_i (x) M_i||`` per site; all at most 1/2 for a unit-Lipschitz witness."""
        out = []
        for i, m in enumerate(self.compressions, start=1):
            diff = self.observable - insert_identity(m, self.site_dim, self.n_sites, i)
            out.append(float(np.abs(np.linalg.eigvalsh(hermitize(diff))).max()))
        return out


def w1_dual(rho: Operator, sigma: Operator, tol: float = conic.DEFAULT_TOL) -> LipschitzWitness:
    delta, d, n = _difference(rho, sigma)
    delta = hermitize(delta)
    dim = d**n
    sub = dim // d
    if np.max(np.abs(delta)) == 0:
        zero = np.zeros((dim, dim), dtype=complex)
        return LipschitzWitness(zero, [np.zeros((sub, sub), dtype=complex)] * n, 0.0, d, n)

    p = conic.ConicProblem()
    p.add_block("H", dim, psd=False)
    p.set_objective("H", -delta)
    # H -> H + c 1 leaves the objective unchanged; pin it
    p.add_constraint({"H": np.eye(dim)}, 0.0)
    half = 0.5 * np.eye(dim)
    for i in range(1, n + 1):
        name = f"M{i}"
        p.add_block(name, sub, psd=False)
        emb = lambda m, i=i: insert_identity(m, d, n, i)  # noqa: E731
        p.add_lmi({"H": lambda x: -x, name: emb}, half)
        p.add_lmi({"H": lambda x: x, name: lambda m, emb=emb: -emb(m)}, half)
    res = conic.solve_or_raise(p, tol)
    h = res.blocks["H"]
    ms = [res.blocks[f"M{i}"] for i in range(1, n + 1)]
    return LipschitzWitness(h, ms, float(np.real(np.trace(delta @ h))), d, n, res)


@dataclass
class LipschitzResult:
    value: float
    per_site: list[float]
    compressions: list[np.ndarray]


def site_dependence(x: np.ndarray, d: int, n: int, site: int, tol: float = conic.DEFAULT_TOL):
    """``2 min_M ||X - 1_site (x) M||`` and the minimizing ``M``."""
    x = hermitize(np.asarray(x, dtype=complex))
    dim = d**n
    sub = dim // d
    p = conic.ConicProblem()
    p.add_block("t", 1, complex=False, psd=False)
    p.add_block("M", sub, psd=False)
    p.set_objective("t", np.ones((1, 1)))
    emb = lambda m: insert_identity(m, d, n, site)  # noqa: E731
    eye = np.eye(dim)
    p.add_lmi({"t": lambda t: t[0, 0] * eye, "M": lambda m: emb(m)}, -x)
    p.add_lmi({"t": lambda t: t[0, 0] * eye, "M": lambda m: -emb(m)}, x)
    res = conic.solve_or_raise(p, tol)
    return 2 * res.primal_value, res.blocks["M"]


def lipschitz_constant(x, tol: float = conic.DEFAULT_TOL, site_dim: int | None = None) -> LipschitzResult:
    """Quantum Lipschitz constant ``max_i 2 min_M ||X - 1_i (x) M||``."""
    if isinstance(x, Operator):
        m, d, n = x.matrix, x.site_dim, x.n_sites
    else:
        if site_dim is None:
            raise ValueError("site_dim is required for a raw matrix")
        m, d = np.asarray(x, dtype=complex), site_dim
        n = round(math.log(m.shape[0], d))
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.conj().T)) > 1e-9 * scale:
        raise ValueError("lipschitz_constant needs a Hermitian observable")
    per_site, comps = [], []
    # per-site problems are independent; reduce in index order
    for i in range(1, n + 1):
        v, comp = site_dependence(m, d, n, i, tol)
        per_site.append(max(0.0, v))
        comps.append(comp)
    return LipschitzResult(max(per_site), per_site, comps)


# -- local variation norm --------------------------------------------------


def _marginal_trace_norm(delta: np.ndarray, d: int, subset) -> float:
    return float(np.abs(np.linalg.eigvalsh(hermitize(partial_trace_matrix(delta, d, subset)))).sum())


def lv_norm(rho: Operator, sigma: Operator) -> float:
    """``1/2 sum_k 2^{-k} E_{|I|=k} ||Tr_{I^c}(rho - sigma)||_1`` by full enumeration."""
    delta, d, n = _difference(rho, sigma)
    if n > LV_EXACT_MAX_SITES:
        raise GuardError(f"exact LV norm limited to n <= {LV_EXACT_MAX_SITES}; use lv_norm_sampled")
    return lv_norm_matrix(delta, d, n)


def lv_norm_matrix(delta: np.ndarray, d: int, n: int) -> float:
    total = 0.0
    for k in range(1, n + 1):
        norms = [_marginal_trace_norm(delta, d, c) for c in itertools.combinations(range(1, n + 1), k)]
        total += 2.0**-k * math.fsum(norms) / len(norms)
    return 0.5 * total


def lv_layer_means(delta: np.ndarray, d: int, n: int) -> list[float]:
    """``E_{|I|=k} ||Tr_{I^c} delta||_1`` for ``k = 1..n``."""
    out = []
    for k in range(1, n + 1):
        norms = [_marginal_trace_norm(delta, d, c) for c in itertools.combinations(range(1, n + 1), k)]
        out.append(math.fsum(norms) / len(norms))
    return out


def lv_norm_sampled(rho: Operator, sigma: Operator, samples: int, seed: int = 0) -> tuple[float, float]:
    """Stratified estimate of the LV norm; returns ``(estimate, standard error)``.

    Each size-``k`` stratum is estimated from ``samples`` uniform subsets
    (drawn with replacement), or enumerated exactly when it has at most
    ``samples`` members.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    delta, d, n = _difference(rho, sigma)
    rng = np.random.default_rng(seed)
    est, var = 0.0, 0.0
    for k in range(1, n + 1):
        w = 2.0**-k
        if math.comb(n, k) <= samples:
            vals = [_marginal_trace_norm(delta, d, c) for c in itertools.combinations(range(1, n + 1), k)]
            est += w * float(np.mean(vals))
            continue
        vals = np.array(
            [
                _marginal_trace_norm(delta, d, np.sort(rng.choice(n, size=k, replace=False)) + 1)
                for _ in range(samples)
            ]
        )
        est += w * float(vals.mean())
        if samples > 1:
            var += w * w * float(vals.var(ddof=1)) / samples
    return 0.5 * est, 0.5 * math.sqrt(var)


# -- closed-form bounds ----------------------------------------------------


def marton_bound(rho: DensityOperator, factors: list[DensityOperator]) -> float:
    """``sqrt(n/2 * D(rho || omega_1 (x) ... (x) omega_n))``; ``inf`` off support."""
    if not isinstance(factors, (list, tuple)) or not factors:
        raise ValueError("the product state must be given as a list of single-site factors")
    if any(f.n_sites != 1 for f in factors):
        raise ValueError("every factor must be a single-site state")
    omega = kron_all(list(factors))
    n = rho.n_sites
    if len(factors) != n:
        raise ValueError(f"{len(factors)} factors supplied for a {n}-site state")
    div = relative_entropy(rho, omega)
    if math.isinf(div):
        return math.inf
    return math.sqrt(n / 2 * div)


def entropy_continuity_bound(w: float, n: int, d: int) -> float:
    """``h2(w) + w ln(d^2 - 1)``, bounding the per-site entropy gap at W1-per-site ``w``.

    ``n`` is accepted for signature symmetry; the bound is already per site.
    """
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"w = {w} outside [0, 1]")
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    return binary_entropy(w) + w * math.log(d * d - 1)


def _defect_rate_bound(p: float, d: int) -> float:
    extra = p * math.log(d - 1) if d > 2 else 0.0
    return math.sqrt(max(0.0, binary_entropy(p) + extra) / 2) + p


def pure_product_bound(rho: DensityOperator, phis: list[DensityOperator]) -> float:
    """Upper bound on ``(1/n) ||rho - phi_1 (x) ... (x) phi_n||_W1`` from the average infidelity."""
    n, d = rho.n_sites, rho.site_dim
    if len(phis) != n:
        raise ValueError(f"{len(phis)} reference states supplied for {n} sites")
    infid = []
    for i, phi in enumerate(phis, start=1):
        m = hermitize(phi.matrix)
        if phi.n_sites != 1 or abs(np.trace(m @ m).real - 1) > 1e-9:
            raise ValueError(f"reference state {i} is not a pure single-site state")
        marg = partial_trace_matrix(rho.matrix, d, [i])
        infid.append(1 - float(np.real(np.trace(marg @ m))))
    p = min(1.0, max(0.0, math.fsum(infid) / n))
    return _defect_rate_bound(p, d)


def average_infidelity(rho: DensityOperator, phis: list[DensityOperator]) -> float:
    d = rho.site_dim
    vals = [
        1 - float(np.real(np.trace(partial_trace_matrix(rho.matrix, d, [i]) @ phi.matrix)))
        for i, phi in enumerate(phis, start=1)
    ]
    return math.fsum(vals) / len(vals)


def msr_epsilon(n: int, r: int, d: int) -> float:
    """Per-site W1 radius guaranteed for a state with ``r`` defects out of ``n``."""
    if not 0 <= r <= n:
        raise ValueError(f"need 0 <= r <= n, got r={r}, n={n}")
    return _defect_rate_bound(r / n, d)


def invert_entropy_continuity(gap: float, d: int, tol: float = 1e-12) -> float:
    """Smallest ``w`` in ``[0, 1/2]`` with ``h2(w) + w ln(d^2-1) >= gap`` (bisection).

    Returns ``nan`` when even ``w = 1/2`` does not reach ``gap``.
    """
    f = lambda w: entropy_continuity_bound(w, 1, d) - gap  # noqa: E731
    if gap <= 0:
        return 0.0
    lo, hi = 0.0, 0.5
    if f(hi) < 0:
        return math.nan
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi
