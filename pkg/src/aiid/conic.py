"""Small semidefinite-programming layer over real symmetric cones.

Problems are stated over named Hermitian (or real symmetric) matrix blocks.
Complex blocks are realified with :func:`hermitian_real_embedding`, so the
backend only ever sees real symmetric cones. The backend is cvxopt's
primal-dual interior-point cone solver (``cvxopt.solvers.conelp``).

Each block is parameterized by its coordinates in an orthonormal basis of
Hermitian matrices under ``<A, B> = Re Tr(A B)``; the linear objective and
equality rows live in that coordinate space.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.linalg as la

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-7
DEFAULT_MAXITERS = 500

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical-failure"


class SolverError(RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


def hermitian_real_embedding(h: np.ndarray) -> np.ndarray:
    """Map ``H = A + iB`` to the real symmetric ``[[A, -B], [B, A]]``.

    ``H >= 0`` iff the embedding is PSD, and its trace is ``2 Tr H``.
    """
    h = np.asarray(h)
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    if np.max(np.abs(h - h.conj().T), initial=0.0) > 1e-9 * scale:
        raise ValueError("hermitian_real_embedding needs a Hermitian matrix")
    a, b = h.real, h.imag
    return np.block([[a, -b], [b, a]])


def real_embedding_inverse(y: np.ndarray) -> np.ndarray:
    """Average a real symmetric ``2D x 2D`` matrix back to a ``D x D`` Hermitian one."""
    d = y.shape[0] // 2
    a = (y[:d, :d] + y[d:, d:]) / 2
    b = (y[d:, :d] - y[:d, d:]) / 2
    h = a + 1j * b
    return (h + h.conj().T) / 2


@lru_cache(maxsize=64)
def _basis(side: int, is_complex: bool) -> np.ndarray:
    """Orthonormal Hermitian basis, shape ``(p, side, side)``."""
    mats = []
    r2 = 1 / math.sqrt(2)
    for i in range(side):
        e = np.zeros((side, side), dtype=complex)
        e[i, i] = 1
        mats.append(e)
    for i in range(side):
        for j in range(i + 1, side):
            e = np.zeros((side, side), dtype=complex)
            e[i, j] = e[j, i] = r2
            mats.append(e)
            if is_complex:
                e = np.zeros((side, side), dtype=complex)
                e[i, j], e[j, i] = 1j * r2, -1j * r2
                mats.append(e)
    out = np.array(mats)
    out.setflags(write=False)
    return out


def coordinates(x: np.ndarray, is_complex: bool = True) -> np.ndarray:
    """Coordinates of a Hermitian matrix in the block basis."""
    side = x.shape[0]
    iu = np.triu_indices(side, 1)
    xs = (np.asarray(x) + np.asarray(x).conj().T) / 2
    diag = xs.diagonal().real
    off = xs[iu] * math.sqrt(2)
    if not is_complex:
        return np.concatenate([diag, off.real])
    inter = np.empty(2 * off.size)
    inter[0::2] = off.real
    inter[1::2] = off.imag
    return np.concatenate([diag, inter])


def from_coordinates(c: np.ndarray, side: int, is_complex: bool = True) -> np.ndarray:
    return np.tensordot(np.asarray(c, dtype=float), _basis(side, is_complex), axes=1)


@dataclass
class Block:
    name: str
    side: int
    complex: bool = True
    psd: bool = True

    @property
    def n_params(self) -> int:
        return self.side**2 if self.complex else self.side * (self.side + 1) // 2


@dataclass
class LMI:
    """``constant + sum_b maps[b](X_b) >= 0`` on a ``side x side`` Hermitian space."""

    maps: dict[str, Callable[[np.ndarray], np.ndarray]]
    constant: np.ndarray
    complex: bool = True

    @property
    def side(self) -> int:
        return self.constant.shape[0]


@dataclass
class ConicProblem:
    """``min sum_b <C_b, X_b>`` over Hermitian blocks subject to affine equalities.

    Blocks flagged ``psd`` are constrained positive semidefinite; other
    blocks are free. Extra linear matrix inequalities may be attached with
    :meth:`add_lmi`.
    """

    blocks: list[Block] = field(default_factory=list)
    objective: dict[str, np.ndarray] = field(default_factory=dict)
    eq_rows: list[tuple[dict[str, np.ndarray], np.ndarray]] = field(default_factory=list)
    lmis: list[LMI] = field(default_factory=list)

    def add_block(self, name: str, side: int, complex: bool = True, psd: bool = True) -> Block:
        if any(b.name == name for b in self.blocks):
            raise ValueError(f"duplicate block {name!r}")
        blk = Block(name, side, complex, psd)
        self.blocks.append(blk)
        return blk

    def block(self, name: str) -> Block:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def set_objective(self, name: str, cost: np.ndarray):
        self.objective[name] = np.asarray(cost)

    def add_constraint(self, coeffs: dict[str, np.ndarray], rhs: float):
        """Scalar equality ``sum_b <A_b, X_b> = rhs``."""
        rows = {
            name: coordinates(a, self.block(name).complex)[None, :] for name, a in coeffs.items()
        }
        self.eq_rows.append((rows, np.array([float(rhs)])))

    def add_matrix_equality(
        self,
        maps: dict[str, Callable[[np.ndarray], np.ndarray]],
        rhs: np.ndarray,
        complex: bool = True,
        skip: tuple[int, ...] = (),
    ):
        """Hermitian matrix equality ``sum_b maps[b](X_b) = rhs``, one row per coordinate.

        ``skip`` lists coordinates to leave out, for rows the caller knows are
        implied by other constraints.
        """
        rows = {name: self._map_matrix(name, fn, complex) for name, fn in maps.items()}
        rhs_c = coordinates(rhs, complex)
        if skip:
            keep = np.setdiff1d(np.arange(rhs_c.size), skip)
            rows = {k: v[keep] for k, v in rows.items()}
            rhs_c = rhs_c[keep]
        self.eq_rows.append((rows, rhs_c))

    def add_lmi(self, maps: dict[str, Callable[[np.ndarray], np.ndarray]], constant: np.ndarray, complex: bool = True):
        self.lmis.append(LMI(maps, np.asarray(constant), complex))

    def _map_matrix(self, name, fn, out_complex):
        blk = self.block(name)
        cols = [coordinates(fn(e), out_complex) for e in _basis(blk.side, blk.complex)]
        return np.array(cols).T


@dataclass
class SolverResult:
    status: str
    primal_value: float
    dual_value: float
    gap: float
    blocks: dict[str, np.ndarray]
    residual: float = math.nan
    iterations: int = 0
    eq_duals: np.ndarray | None = None
    lmi_duals: list[np.ndarray] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def _offsets(blocks):
    out, pos = {}, 0
    for b in blocks:
        out[b.name] = (pos, pos + b.n_params)
        pos += b.n_params
    return out, pos


def _cone_columns(side, is_complex, coords_to_matrix):
    """Column-major vectorized real matrices for each coordinate direction."""
    mats = coords_to_matrix
    if is_complex:
        mats = np.array([hermitian_real_embedding(m) for m in mats])
    else:
        mats = mats.real
    return mats.transpose(0, 2, 1).reshape(mats.shape[0], -1).T


def _independent_rows(a: np.ndarray, b: np.ndarray, tol: float = 1e-10):
    if a.shape[0] == 0:
        return a, b, 0
    _, r, piv = la.qr(a.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > tol * max(1.0, diag[0] if diag.size else 1.0)))
    keep = np.sort(piv[:rank])
    dropped = a.shape[0] - rank
    if dropped:
        log.warning("dropping %d linearly dependent equality rows", dropped)
        sol, *_ = np.linalg.lstsq(a[keep].T, a.T, rcond=None)
        if np.max(np.abs(sol.T @ b[keep] - b), initial=0.0) > 1e-8 * max(1.0, np.max(np.abs(b))):
            raise SolverError("inconsistent equality constraints")
    return a[keep], b[keep], dropped


def solve(p: ConicProblem, tol: float = DEFAULT_TOL, maxiters: int = DEFAULT_MAXITERS) -> SolverResult:
    """Solve a :class:`ConicProblem` to tolerance ``tol``."""
    import cvxopt
    from cvxopt import solvers

    offsets, nvar = _offsets(p.blocks)

    c = np.zeros(nvar)
    for name, cost in p.objective.items():
        lo, hi = offsets[name]
        c[lo:hi] = coordinates(cost, p.block(name).complex)

    rows, rhs = [], []
    for coeffs, r in p.eq_rows:
        row = np.zeros((r.size, nvar))
        for name, m in coeffs.items():
            lo, hi = offsets[name]
            row[:, lo:hi] += m
        rows.append(row)
        rhs.append(r)
    a_eq = np.vstack(rows) if rows else np.zeros((0, nvar))
    b_eq = np.concatenate(rhs) if rhs else np.zeros(0)
    a_eq, b_eq, _ = _independent_rows(a_eq, b_eq)

    g_parts, h_parts, cone_sides = [], [], []
    for blk in p.blocks:
        if not blk.psd:
            continue
        lo, hi = offsets[blk.name]
        cols = _cone_columns(blk.side, blk.complex, _basis(blk.side, blk.complex))
        g = np.zeros((cols.shape[0], nvar))
        g[:, lo:hi] = -cols
        g_parts.append(g)
        side = 2 * blk.side if blk.complex else blk.side
        h_parts.append(np.zeros(side * side))
        cone_sides.append(side)
    for lmi in p.lmis:
        side = 2 * lmi.side if lmi.complex else lmi.side
        g = np.zeros((side * side, nvar))
        for name, fn in lmi.maps.items():
            blk = p.block(name)
            lo, hi = offsets[name]
            images = np.array([fn(e) for e in _basis(blk.side, blk.complex)])
            g[:, lo:hi] = -_cone_columns(side, lmi.complex, images)
        const = hermitian_real_embedding(lmi.constant) if lmi.complex else np.asarray(lmi.constant).real
        g_parts.append(g)
        h_parts.append(const.T.reshape(-1))
        cone_sides.append(side)

    # cvxopt needs at least one cone row; an empty problem is solved directly
    if not cone_sides:
        raise ValueError("ConicProblem has no semidefinite constraints")

    G = cvxopt.matrix(np.vstack(g_parts))
    h = cvxopt.matrix(np.concatenate(h_parts))
    dims = {"l": 0, "q": [], "s": cone_sides}
    options = {
        "show_progress": False,
        "abstol": tol,
        "reltol": tol,
        "feastol": tol,
        "maxiters": maxiters,
    }
    kwargs = {}
    if a_eq.shape[0]:
        kwargs = {"A": cvxopt.matrix(a_eq), "b": cvxopt.matrix(b_eq)}
    try:
        sol = solvers.conelp(cvxopt.matrix(c), G, h, dims, options=options, **kwargs)
    except (ValueError, ArithmeticError) as exc:
        raise SolverError(f"conic backend failed: {exc}") from exc

    x = np.array(sol["x"]).ravel() if sol["x"] is not None else np.full(nvar, np.nan)
    blocks = {}
    for blk in p.blocks:
        lo, hi = offsets[blk.name]
        blocks[blk.name] = from_coordinates(x[lo:hi], blk.side, blk.complex)

    primal = float(sol["primal objective"]) if sol["primal objective"] is not None else math.nan
    dual = float(sol["dual objective"]) if sol["dual objective"] is not None else math.nan
    gap = abs(primal - dual) / max(1.0, abs(primal)) if np.isfinite([primal, dual]).all() else math.inf
    residual = max(
        float(sol.get("primal infeasibility") or 0.0),
        float(sol.get("dual infeasibility") or 0.0),
    )
    if sol["status"] == "optimal":
        status = OPTIMAL
    elif sol["status"] == "primal infeasible":
        status = INFEASIBLE
    elif sol["status"] == "dual infeasible":
        status = UNBOUNDED
    elif gap <= tol and residual <= tol:
        status = OPTIMAL
    else:
        status = NUMERICAL_FAILURE

    lmi_duals = []
    if sol["z"] is not None:
        z = np.array(sol["z"]).ravel()
        pos = 0
        n_psd = sum(1 for b in p.blocks if b.psd)
        for k, side in enumerate(cone_sides):
            zk = z[pos : pos + side * side].reshape(side, side).T
            pos += side * side
            if k >= n_psd:
                lmi = p.lmis[k - n_psd]
                lmi_duals.append(real_embedding_inverse(zk) if lmi.complex else zk)

    return SolverResult(
        status=status,
        primal_value=primal,
        dual_value=dual,
        gap=gap,
        blocks=blocks,
        residual=residual,
        iterations=int(sol.get("iterations") or 0),
        eq_duals=np.array(sol["y"]).ravel() if sol["y"] is not None else None,
        lmi_duals=lmi_duals,
    )


def solve_or_raise(p: ConicProblem, tol: float = DEFAULT_TOL, maxiters: int = DEFAULT_MAXITERS) -> SolverResult:
    res = solve(p, tol, maxiters)
    if not res.ok:
        raise SolverError(f"solver status {res.status} (gap={res.gap:.2e}, residual={res.residual:.2e})", res)
    return res
