"""Constructors for the state families used throughout the package.

Span projectors follow the defect picture: ``V^n_r(psi)`` is spanned by
vectors that equal ``psi`` on all but ``r`` sites and are arbitrary on the
remaining ``r`` ("defect") sites.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .tensor import (
    DensityOperator,
    GuardError,
    Operator,
    Permutation,
    hermitize,
    partial_trace_matrix,
    permute_sites,
    purify,
    tensor_power,
    trace_norm,
)

MAX_DIM = 2**12
SPAN_CUTOFF = 1e-9


def _guard_dim(d: int, n: int):
    if d**n > MAX_DIM:
        raise GuardError(f"dimension {d}^{n} exceeds {MAX_DIM}")


def maximally_mixed(d: int, n: int = 1) -> DensityOperator:
    _guard_dim(d, n)
    dim = d**n
    return DensityOperator(np.eye(dim, dtype=complex) / dim, d)


def iid_state(rho: DensityOperator, n: int) -> DensityOperator:
    if rho.n_sites != 1:
        raise ValueError("iid_state expects a single-site state")
    _guard_dim(rho.site_dim, n)
    return tensor_power(rho, n)


def _placement_perm(n: int, positions: tuple[int, ...]) -> Permutation:
    """Send the last ``k`` sites to ``positions`` and the rest, in order, to the free sites."""
    k = len(positions)
    free = [i for i in range(1, n + 1) if i not in positions]
    image = free + list(positions)
    assert len(image) == n and k <= n
    return Permutation(tuple(image))


def defect_state(rho: DensityOperator, omega: DensityOperator | None, n: int) -> DensityOperator:
    """Permutation average of ``rho^{(x) n-k} (x) omega``.

    Since ``rho^{(x) n-k}`` is itself symmetric, averaging over the
    ``n!/(n-k)!`` ordered placements of the ``k`` defect sites equals the full
    average over ``S_n``.
    """
    if rho.n_sites != 1:
        raise ValueError("reference state must be single-site")
    d = rho.site_dim
    _guard_dim(d, n)
    if omega is None or omega.n_sites == 0:
        return iid_state(rho, n)
    k = omega.n_sites
    if omega.site_dim != d:
        raise ValueError("defect and reference have different site dimensions")
    if k > n:
        raise ValueError(f"{k} defects do not fit in {n} sites")
    if k == n:
        base = omega
    else:
        base = DensityOperator(np.kron(tensor_power(rho, n - k).matrix, omega.matrix), d)
    acc = np.zeros((d**n, d**n), dtype=complex)
    count = 0
    for positions in itertools.permutations(range(1, n + 1), k):
        acc += permute_sites(base, _placement_perm(n, positions)).matrix
        count += 1
    return DensityOperator(hermitize(acc / count), d)


def symmetrize(op: DensityOperator) -> DensityOperator:
    """Full ``S_n`` average; factorial cost, intended as a test oracle for small ``n``."""
    n = op.n_sites
    acc = np.zeros_like(op.matrix)
    perms = list(itertools.permutations(range(1, n + 1)))
    for img in perms:
        acc = acc + permute_sites(op, Permutation(img)).matrix
    return DensityOperator(hermitize(acc / len(perms)), op.site_dim)


# -- MSR span projectors ---------------------------------------------------


@dataclass
class SpanProjector:
    n: int
    r: int
    site_dim: int
    psi: np.ndarray
    matrix: np.ndarray
    rank: int

    def weight(self, state: Operator) -> float:
        """``Tr[Pi rho]``."""
        return float(np.real(np.trace(self.matrix @ state.matrix)))

    def contains(self, vec: np.ndarray, tol: float = 1e-8) -> bool:
        return float(np.linalg.norm(vec - self.matrix @ vec)) <= tol


def _unit(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).ravel()
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("reference vector is zero")
    return v / nrm


def span_generators(psi: np.ndarray, n: int, r: int) -> np.ndarray:
    """Columns ``psi`` off the defect set, basis vectors on it; one per (subset, label)."""
    psi = _unit(psi)
    d = psi.size
    if not 0 <= r <= n:
        raise ValueError(f"need 0 <= r <= n, got r={r}, n={n}")
    _guard_dim(d, n)
    eye = np.eye(d, dtype=complex)
    cols = []
    for positions in itertools.combinations(range(n), r):
        for label in itertools.product(range(d), repeat=r):
            slot = dict(zip(positions, label))
            v = np.ones(1, dtype=complex)
            for site in range(n):
                v = np.kron(v, eye[slot[site]] if site in slot else psi)
            cols.append(v)
    return np.array(cols).T


def v_span_projector(psi, n: int, r: int) -> SpanProjector:
    """Orthogonal projector onto ``span V^n_r(psi)``."""
    psi = _unit(psi)
    gens = span_generators(psi, n, r)
    u, s, _ = np.linalg.svd(gens, full_matrices=False)
    rank = int(np.sum(s > SPAN_CUTOFF * s[0]))
    basis = u[:, :rank]
    proj = basis @ basis.conj().T
    return SpanProjector(n, r, psi.size, psi, hermitize(proj), rank)


def span_projector_family(psi, n: int) -> list[SpanProjector]:
    return [v_span_projector(psi, n, r) for r in range(n + 1)]


@dataclass(frozen=True)
class TailWeight:
    """Defect-count penalty ``f(r)``.

    kinds: ``cutoff`` (+inf above ``r0``), ``indicator`` (1 above ``r0``),
    ``linear`` (``r/n``), ``exp`` (``exp(lam * r)``).
    """

    kind: str
    r0: int = 0
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in ("cutoff", "indicator", "linear", "exp"):
            raise ValueError(f"unknown tail weight kind {self.kind!r}")

    def __call__(self, r: int, n: int) -> float:
        if self.kind == "cutoff":
            return math.inf if r > self.r0 else 0.0
        if self.kind == "indicator":
            return 1.0 if r > self.r0 else 0.0
        if self.kind == "linear":
            return r / n
        return math.exp(self.lam * r)

    @classmethod
    def parse(cls, spec: str) -> "TailWeight":
        """Parse ``cutoff:R``, ``indicator:R``, ``linear`` or ``exp:LAMBDA``."""
        name, _, arg = spec.partition(":")
        if name == "linear":
            return cls("linear")
        if name in ("cutoff", "indicator"):
            return cls(name, r0=int(arg))
        if name == "exp":
            return cls("exp", lam=float(arg))
        raise ValueError(f"cannot parse tail weight {spec!r}")


@dataclass
class TailResult:
    value: float
    increments: list[float]
    weights: list[float]


def tail_functional(
    rho_ext: DensityOperator, psi, f: TailWeight, zero_defect_projector: bool = False
) -> TailResult:
    """``sum_{r=1}^n f(r) Tr[(Pi_r - Pi_{r-1}) rho]`` with ``0 * inf = 0``.

    By default ``Pi_0 = 0``, so the ``r = 1`` increment is all of ``Pi_1``.
    With ``zero_defect_projector`` the projector onto ``psi^{(x) n}`` is used
    for ``Pi_0`` instead, which makes ``cutoff:0`` test membership in the
    span of the pure i.i.d. vector.
    """
    psi = _unit(psi)
    n = rho_ext.n_sites
    if rho_ext.site_dim != psi.size:
        raise ValueError("extension site dimension does not match the reference vector")
    prev = v_span_projector(psi, n, 0).weight(rho_ext) if zero_defect_projector else 0.0
    incs, ws, terms = [], [], []
    for r in range(1, n + 1):
        cur = 1.0 if r == n else v_span_projector(psi, n, r).weight(rho_ext)
        inc = max(0.0, cur - prev)
        w = f(r, n)
        incs.append(inc)
        ws.append(w)
        if math.isinf(w):
            terms.append(math.inf if inc > 1e-10 else 0.0)
        else:
            terms.append(w * inc)
        prev = cur
    value = math.inf if any(math.isinf(t) for t in terms) else math.fsum(terms)
    return TailResult(value, incs, ws)


def fidelity_count(rho_ext: DensityOperator, psi) -> float:
    """``sum_i <psi| (rho_ext)_i |psi>``."""
    psi = _unit(psi)
    d, n = rho_ext.site_dim, rho_ext.n_sites
    proj = np.outer(psi, psi.conj())
    return math.fsum(
        float(np.real(np.trace(partial_trace_matrix(rho_ext.matrix, d, [i]) @ proj))) for i in range(1, n + 1)
    )


# -- MSR certificates ------------------------------------------------------


def trace_out_purifiers(ext: DensityOperator, d: int) -> DensityOperator:
    """Reduce an operator on ``n`` sites of dimension ``d*d`` (``A_i E_i`` pairs) to ``A^n``."""
    big = ext.site_dim
    if big != d * d:
        raise ValueError(f"extension site dimension {big} is not {d}^2")
    n = ext.n_sites
    t = ext.matrix.reshape((d, d) * n + (d, d) * n)
    a_rows = [2 * i for i in range(n)]
    e_rows = [2 * i + 1 for i in range(n)]
    off = 2 * n
    order = a_rows + e_rows + [off + i for i in a_rows] + [off + i for i in e_rows]
    da, de = d**n, d**n
    t = t.transpose(order).reshape(da, de, da, de)
    return DensityOperator(hermitize(np.einsum("ajbj->ab", t)), d)


def interleave_purification(vec: np.ndarray, d: int, k: int) -> np.ndarray:
    """Reorder a vector on ``A^k E^k`` (system first) into ``(A_1 E_1) ... (A_k E_k)``."""
    t = np.asarray(vec).reshape((d,) * (2 * k))
    order = [x for i in range(k) for x in (i, k + i)]
    return t.transpose(order).reshape(-1)


def defect_extension(rho: DensityOperator, omega: DensityOperator | None, n: int) -> tuple[DensityOperator, np.ndarray]:
    """Canonical permutation-invariant extension of :func:`defect_state` and its reference vector.

    Sites of the extension are ``A_i E_i`` pairs of dimension ``d^2``. The
    reference is the canonical purification of ``rho``; the defect block is the
    canonical purification of ``omega``, regrouped site by site.
    """
    d = rho.site_dim
    psi_rho = purify(rho)
    ref = DensityOperator(np.outer(psi_rho, psi_rho.conj()), d * d)
    if omega is None:
        return defect_state(ref, None, n), psi_rho
    k = omega.n_sites
    big = interleave_purification(purify(omega), d, k)
    omega_ext = DensityOperator(np.outer(big, big.conj()), d * d)
    return defect_state(ref, omega_ext, n), psi_rho


@dataclass
class MSRCertificate:
    """Evaluation of the two MSR conditions on a concrete extension."""

    marginal_error: float
    permutation_error: float
    span_weight: float
    r: int
    tol: float = 1e-8
    notes: list[str] = field(default_factory=list)

    @property
    def extends(self) -> bool:
        return self.marginal_error <= self.tol

    @property
    def permutation_invariant(self) -> bool:
        return self.permutation_error <= self.tol

    @property
    def supported_in_span(self) -> bool:
        return self.span_weight >= 1 - self.tol

    @property
    def certifies(self) -> bool:
        return self.extends and self.permutation_invariant and self.supported_in_span


def msr_certificate(rho_n: DensityOperator, extension: DensityOperator, psi_rho, r: int, tol: float = 1e-8) -> MSRCertificate:
    """Check a user-supplied extension against the MSR conditions.

    The permutation-invariance and span-support conditions are reported
    separately; only the supplied extension is examined.
    """
    d = rho_n.site_dim
    n = rho_n.n_sites
    if extension.n_sites != n:
        raise ValueError("extension has a different number of sites")
    reduced = trace_out_purifiers(extension, d)
    marg_err = float(np.max(np.abs(reduced.matrix - rho_n.matrix)))
    perm_err = 0.0
    for i in range(1, n):
        img = list(range(1, n + 1))
        img[i - 1], img[i] = img[i], img[i - 1]
        swapped = permute_sites(extension, Permutation(tuple(img)))
        perm_err = max(perm_err, float(np.max(np.abs(swapped.matrix - extension.matrix))))
    weight = v_span_projector(psi_rho, n, r).weight(extension)
    return MSRCertificate(marg_err, perm_err, weight, r, tol)


# -- gentle measurement ----------------------------------------------------


@dataclass
class GentleReport:
    lhs: float
    rhs: float
    weight: float
    eta: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-12


def gentle_projection_check(rho: DensityOperator, proj: np.ndarray, eta: float) -> GentleReport:
    """``1/2 ||rho - Pi rho Pi||_1 <= sqrt(eta)`` given ``Tr[Pi rho] >= 1 - eta``."""
    proj = np.asarray(proj, dtype=complex)
    if np.max(np.abs(proj @ proj - proj)) > 1e-9 or np.max(np.abs(proj - proj.conj().T)) > 1e-9:
        raise ValueError("Pi is not an orthogonal projector")
    weight = float(np.real(np.trace(proj @ rho.matrix)))
    if weight < 1 - eta - 1e-12:
        raise ValueError(f"Tr[Pi rho] = {weight} < 1 - eta = {1 - eta}")
    lhs = 0.5 * trace_norm(hermitize(rho.matrix - proj @ rho.matrix @ proj))
    return GentleReport(lhs, math.sqrt(eta), weight, eta)


def gentle_instance(dim: int, eta: float, rng=None, rank: int | None = None, mix: int = 3):
    """Random projector ``Pi`` and state with ``Tr[Pi rho] = 1 - eta`` exactly.

    The state mixes ``mix`` pure states ``sqrt(1-eta)|a> + sqrt(eta)|b>`` with
    ``a`` in the range of ``Pi`` and ``b`` in its complement, so coherences
    between the two subspaces are present.
    """
    rng = np.random.default_rng(rng)
    if rank is None:
        rank = int(rng.integers(1, dim))
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, _ = np.linalg.qr(g)
    inside, outside = q[:, :rank], q[:, rank:]
    proj = inside @ inside.conj().T
    acc = np.zeros((dim, dim), dtype=complex)
    probs = rng.dirichlet(np.ones(mix))
    for w in probs:
        a = inside @ (rng.standard_normal(rank) + 1j * rng.standard_normal(rank))
        b = outside @ (rng.standard_normal(dim - rank) + 1j * rng.standard_normal(dim - rank))
        v = math.sqrt(1 - eta) * a / np.linalg.norm(a) + math.sqrt(eta) * b / np.linalg.norm(b)
        acc += w * np.outer(v, v.conj())
    return hermitize(proj), DensityOperator(hermitize(acc), dim)


# -- five-qubit code -------------------------------------------------------

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

FIVE_QUBIT_STABILIZERS = ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")


def pauli_string(label: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for c in label:
        out = np.kron(out, _PAULI[c])
    return out


def maximal_marginal_deviation(state: DensityOperator, max_size: int) -> float:
    """Largest entrywise distance of any marginal of size ``<= max_size`` from ``1/d^k``."""
    d, n = state.site_dim, state.n_sites
    worst = 0.0
    for k in range(1, max_size + 1):
        target = np.eye(d**k) / d**k
        for c in itertools.combinations(range(1, n + 1), k):
            worst = max(worst, float(np.max(np.abs(partial_trace_matrix(state.matrix, d, c) - target))))
    return worst


def five_qubit_code_state() -> DensityOperator:
    """Logical ``|0>`` of the five-qubit perfect code.

    Fixed by the four cyclic stabilizers plus ``ZZZZZ``; every one- and
    two-qubit marginal is maximally mixed, which is checked before returning.
    """
    proj = np.eye(32, dtype=complex)
    for label in FIVE_QUBIT_STABILIZERS + ("ZZZZZ",):
        proj = proj @ (np.eye(32) + pauli_string(label)) / 2
    lam, vec = np.linalg.eigh(hermitize(proj))
    if not (abs(lam[-1] - 1) < 1e-10 and abs(lam[-2]) < 1e-10):
        raise RuntimeError("stabilizer group does not fix a unique state")
    v = vec[:, -1]
    k = int(np.argmax(np.abs(v)))
    v = v * (abs(v[k]) / v[k])
    state = DensityOperator(np.outer(v, v.conj()), 2)
    dev = maximal_marginal_deviation(state, 2)
    if dev > 1e-9:
        raise RuntimeError(f"five-qubit state marginals deviate by {dev}")
    return state
