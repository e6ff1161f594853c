"""Executable checks of the W1 / LV hierarchy, the counterexamples and the AME bound.

Every check produces a :class:`CheckResult` with ``margin = rhs - lhs``; a
check passes when the margin is at least ``-tol``. Lower bounds are encoded
with the bound on the left, so the sign convention is uniform.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import boolean, classical, states, w1
from .tensor import (
    DensityOperator,
    binary_entropy,
    hermitize,
    kron_all,
    partial_trace_matrix,
    pure,
    random_density,
    tensor_power,
    trace_norm,
    von_neumann_entropy,
)

log = logging.getLogger(__name__)

MARGIN_TOL = 1e-6
DUALITY_RTOL = 1e-5
SIG_DIGITS = 12


@dataclass
class CheckResult:
    name: str
    paper_ref: str
    lhs: float
    rhs: float
    tol: float = MARGIN_TOL
    skipped: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool | None:
        if self.skipped:
            return None
        m = self.margin
        return bool(m >= -self.tol) if not math.isnan(m) else False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "paper_ref": self.paper_ref,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "margin": _num(self.margin),
            "pass": self.passed,
            "meta": _clean({"tol": self.tol, **self.meta}),
        }


@dataclass
class VerificationReport:
    suite: str
    checks: list[CheckResult] = field(default_factory=list)

    def extend(self, other: "VerificationReport | list[CheckResult]"):
        self.checks.extend(other.checks if isinstance(other, VerificationReport) else other)

    @property
    def summary(self) -> dict:
        out = {"pass": 0, "fail": 0, "skipped": 0}
        for c in self.checks:
            key = "skipped" if c.passed is None else ("pass" if c.passed else "fail")
            out[key] += 1
        return out

    @property
    def ok(self) -> bool:
        return self.summary["fail"] == 0

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if c.passed is False]

    def select(self, prefix: str) -> list[CheckResult]:
        return [c for c in self.checks if c.name.startswith(prefix)]

    def to_dict(self) -> dict:
        return {"suite": self.suite, "checks": [c.to_dict() for c in self.checks], "summary": self.summary}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "paper_ref", "lhs", "rhs", "margin", "pass", "meta"])
        for c in self.checks:
            row = c.to_dict()
            writer.writerow(
                [row["name"], row["paper_ref"], row["lhs"], row["rhs"], row["margin"], row["pass"],
                 json.dumps(row["meta"], sort_keys=True)]
            )
        return buf.getvalue()


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{SIG_DIGITS}g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, int, np.floating, np.integer, np.bool_, bool)):
        return _num(obj)
    return obj


def _rng(seed: int, tag: str, idx: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(tag.encode()), idx])


# -- instance helpers ------------------------------------------------------


def random_diagonal(n: int, d: int, rng) -> DensityOperator:
    """Diagonal state from normalized squared Gaussians."""
    w = rng.standard_normal(d**n) ** 2
    return DensityOperator(np.diag(w / w.sum()).astype(complex), d)


def random_product(n: int, d: int, rng, pure_factors: bool = False) -> list[DensityOperator]:
    if pure_factors:
        out = []
        for _ in range(n):
            v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            out.append(pure(v / np.linalg.norm(v), d))
        return out
    return [random_density(1, d, rng) for _ in range(n)]


@dataclass
class W1Value:
    primal: float
    dual: float
    source: str

    @property
    def value(self) -> float:
        return self.primal

    @property
    def gap(self) -> float:
        return abs(self.primal - self.dual) / max(1.0, abs(self.primal))


def is_diagonal(rho: DensityOperator, tol: float = 1e-14) -> bool:
    m = rho.matrix
    return float(np.max(np.abs(m - np.diag(np.diag(m))))) <= tol


def w1_both(rho: DensityOperator, sigma: DensityOperator, tol: float = 1e-8) -> W1Value:
    """Primal and dual SDP values; the primal is used as the W1 value."""
    p = w1.w1_primal(rho, sigma, tol).value
    d = w1.w1_dual(rho, sigma, tol).value
    return W1Value(p, d, "sdp")


def w1_classical(rho: DensityOperator, sigma: DensityOperator) -> W1Value:
    val, _ = classical.hamming_w1(classical.diagonal_distribution(rho), classical.diagonal_distribution(sigma))
    return W1Value(val, val, "hamming-lp")


def _duality_check(name, w: W1Value, meta) -> CheckResult:
    return CheckResult(name, "W1 strong duality", w.gap, DUALITY_RTOL, tol=0.0,
                       meta={**meta, "primal": w.primal, "dual": w.dual})


# -- single-instance checks ------------------------------------------------


def check_sandwich(name: str, rho, sigma, w: W1Value, meta=None) -> list[CheckResult]:
    meta = dict(meta or {})
    n = rho.n_sites
    dtr = w1.trace_distance(rho, sigma)
    ref = "trace distance <= W1 <= n * trace distance"
    return [
        CheckResult(f"{name}/lower", ref, dtr, w.value, meta={**meta, "n": n}),
        CheckResult(f"{name}/upper", ref, w.value, n * dtr, meta={**meta, "n": n}),
    ]


def check_wlv(rho, sigma, w: W1Value | None = None, name: str = "wlv", meta=None) -> CheckResult:
    """``LV <= (2/n) W1``; whether ``LV <= W1/n`` also holds is recorded in the metadata."""
    if w is None:
        w = w1_both(rho, sigma)
    n = rho.n_sites
    lv = w1.lv_norm(rho, sigma)
    rhs = 2 * w.value / n
    meta = {**(meta or {}), "n": n, "w1": w.value, "w1_source": w.source,
            "one_over_n_rhs": w.value / n, "one_over_n_holds": lv <= w.value / n + MARGIN_TOL}
    return CheckResult(name, "local variation bounded by W1", lv, rhs, meta=meta)


def check_marton(rho, factors, w: W1Value | None = None, name: str = "marton", meta=None) -> CheckResult:
    omega = kron_all(list(factors))
    if w is None:
        w = w1_both(rho, omega)
    rhs = w1.marton_bound(rho, list(factors))
    return CheckResult(name, "Marton transport inequality", w.value, rhs,
                       meta={**(meta or {}), "n": rho.n_sites, "w1_source": w.source})


def check_entropy_continuity(rho, sigma, w: W1Value | None = None, name: str = "entropy-continuity", meta=None) -> CheckResult:
    if w is None:
        w = w1_both(rho, sigma)
    n, d = rho.n_sites, rho.site_dim
    per_site = w.value / n
    gap = abs(von_neumann_entropy(rho) - von_neumann_entropy(sigma)) / n
    meta = {**(meta or {}), "n": n, "d": d, "w": per_site, "w_above_half": per_site > 0.5}
    if per_site > 1:
        return CheckResult(name, "entropy continuity in W1", gap, math.nan, skipped=True, meta=meta)
    rhs = w1.entropy_continuity_bound(min(per_site, 1.0), n, d)
    return CheckResult(name, "entropy continuity in W1", gap, rhs, meta=meta)


def check_pure_product(rho, phis, w: W1Value | None = None, name: str = "pure-product", meta=None) -> CheckResult:
    if w is None:
        w = w1_both(rho, kron_all(list(phis)))
    n = rho.n_sites
    rhs = w1.pure_product_bound(rho, list(phis))
    return CheckResult(name, "W1 to a pure product state via average infidelity", w.value / n, rhs,
                       meta={**(meta or {}), "n": n, "avg_infidelity": w1.average_infidelity(rho, list(phis))})


def defect_w1_upper(rho: DensityOperator, omega: DensityOperator) -> float:
    """Upper bound on ``W1(defect_state, rho^n)`` from the defect block alone.

    Tensoring both sides with ``rho^{(x) n-k}`` and averaging over placements
    maps a feasible decomposition of ``omega - rho^k`` to one of the full
    difference with the same value.
    """
    k = omega.n_sites
    ref = tensor_power(rho, k)
    if k == 1:
        return w1.trace_distance(omega, ref)
    return w1.hybrid_decomposition(omega, ref).value


def check_msr_epsilon(rho: DensityOperator, omega: DensityOperator, n: int, name: str = "msr-epsilon", meta=None,
                      sdp_max_sites: int = 3) -> CheckResult:
    """``(1/n) W1(defect state, rho^n) <= msr_epsilon(n, k, d)`` for a pure reference ``rho``."""
    d, k = rho.site_dim, omega.n_sites
    state = states.defect_state(rho, omega, n)
    target = states.iid_state(rho, n)
    if is_diagonal(state) and is_diagonal(target):
        w = w1_classical(state, target)
    elif n <= sdp_max_sites:
        w = w1_both(state, target)
    else:
        val = defect_w1_upper(rho, omega)
        w = W1Value(val, math.nan, "defect-block-certificate")
    rhs = w1.msr_epsilon(n, k, d)
    return CheckResult(name, "defect states are W1-close to i.i.d.", w.value / n, rhs,
                       meta={**(meta or {}), "n": n, "k": k, "d": d, "w1": w.value, "w1_source": w.source})


def check_metrisation(rho_n: DensityOperator, rho: DensityOperator, k: int, name: str = "metrisation", meta=None) -> CheckResult:
    n, d = rho_n.n_sites, rho_n.site_dim
    ref_k = tensor_power(rho, k).matrix
    vals = [trace_norm(hermitize(partial_trace_matrix(rho_n.matrix, d, c) - ref_k))
            for c in itertools.combinations(range(1, n + 1), k)]
    lhs = math.fsum(vals) / len(vals)
    lv = w1.lv_norm(rho_n, tensor_power(rho, n))
    return CheckResult(name, "LV controls the k-body marginals", lhs, 2 ** (k + 1) * lv,
                       meta={**(meta or {}), "n": n, "k": k, "lv": lv})


# -- counterexamples -------------------------------------------------------


def _paired_bound(n: int, k: int) -> float:
    prod = 1.0
    for j in range(1, k + 1):
        prod *= (n - 2 * j) / n
    return 2 * (1 - prod)


def verify_paired_counterexample(p=(0.5, 0.5), n_list=tuple(range(2, 13)), k: int = 2, samples: int = 2000,
                                 seed: int = 0, exact_max: int = 12, ot_max: int = 10) -> VerificationReport:
    rep = VerificationReport("paired")
    pv = np.asarray(p, dtype=float)
    s_p = classical.shannon_entropy(pv)
    d = pv.size
    for n in n_list:
        src = classical.PairedSource(tuple(pv), n)
        tag = f"paired/n{n:03d}"
        kk = min(k, n)
        rhs = _paired_bound(n, kk)
        if n <= exact_max:
            lhs = classical.avg_marginal_tv(src, pv, kk)
            rep.checks.append(CheckResult(f"{tag}/marginals", "paired source is weakly i.i.d.", lhs, rhs,
                                          meta={"n": n, "k": kk, "mode": "exact"}))
        else:
            mean, err = classical.avg_marginal_tv_sampled(src, pv, kk, samples, seed)
            rep.checks.append(CheckResult(f"{tag}/marginals", "paired source is weakly i.i.d.", mean + 3 * err, rhs,
                                          meta={"n": n, "k": kk, "mode": "sampled", "mean": mean, "stderr": err,
                                                "samples": samples, "seed": seed}))
        if n <= 2 * classical.MAX_ENUM_SITES and d ** math.ceil(n / 2) <= classical.MAX_SUPPORT:
            dist = src.distribution()
            ent = classical.classical_entropy(dist)
            target = math.ceil(n / 2) * s_p
            rep.checks.append(CheckResult(f"{tag}/entropy", "paired source entropy", abs(ent - target), 1e-9, tol=0.0,
                                          meta={"n": n, "entropy": ent, "expected": target, "rate": ent / n,
                                                "limit_rate": s_p / 2}))
            if n <= ot_max:
                iid = classical.iid_distribution(pv, n)
                val, _ = classical.hamming_w1(dist, iid)
                gap = s_p - ent / n
                floor = w1.invert_entropy_continuity(gap, d)
                rep.checks.append(CheckResult(f"{tag}/w1-floor", "paired source is far from i.i.d. in W1",
                                              floor, val / n, meta={"n": n, "w1": val, "entropy_gap": gap}))
    return rep


def verify_xi_counterexample(n_list_even=(4, 6, 8), quantum_n=(2, 3), slice_cases=((4, 1), (6, 2))) -> VerificationReport:
    rep = VerificationReport("xi")
    for n in n_list_even:
        if n % 2:
            raise ValueError("xi checks use even n")
        tag = f"xi/n{n:02d}"
        xi = classical.xi_distribution(n)
        unif = classical.iid_distribution([0.5, 0.5], n)
        val, _ = classical.hamming_w1(xi, unif)
        bound = classical.quantitative_wass_bound((n // 2, n // 2), n)
        rep.checks.append(CheckResult(f"{tag}/w1", "uniform type class is W1-close to i.i.d.", val / n, bound,
                                      meta={"n": n, "w1": val}))
        if n <= boolean.MAX_SLICE_SITES:
            f = boolean.diagonal_function(classical.classical_to_density(xi))
            off = float(np.max(np.abs(f.table[f.weights() != n // 2])))
            rep.checks.append(CheckResult(f"{tag}/off-slice", "xi diagonal vanishes off the middle slice", off, 0.0,
                                          tol=1e-15, meta={"n": n, "total": float(f.table.sum())}))
            deg = n // 2 - 1
            res = boolean.low_degree_fit_residual(f, deg)
            rep.checks.append(CheckResult(f"{tag}/fit-residual", "xi diagonal has no low-degree representation",
                                          1e-6, res, tol=0.0, meta={"n": n, "degree": deg}))
    for n, r in slice_cases:
        dim, cert = boolean.middle_slice_rank_test(n, r)
        rep.checks.append(CheckResult(f"xi/slice-n{n:02d}-r{r}", "low-degree functions vanishing off the middle slice",
                                      dim, 0, tol=0.0, meta={"n": n, "r": r, "unknowns": cert.unknowns,
                                                             "rank": cert.rank}))
    for n in quantum_n:
        xi = classical.classical_to_density(classical.xi_distribution(n))
        tau = states.maximally_mixed(2, n)
        q = w1_both(xi, tau)
        c = w1_classical(xi, tau)
        rep.checks.append(CheckResult(f"xi/quantum-n{n}", "W1 restricted to diagonal states equals Hamming transport",
                                      abs(q.value - c.value), 1e-5, tol=0.0,
                                      meta={"n": n, "quantum": q.value, "classical": c.value, "dual": q.dual}))
    return rep


def ame_root(d: int = 2, tol: float = 1e-9) -> float:
    """Root of ``h2(w) + w ln(d^2 - 1) = ln d`` on ``(0, 1/2)``."""
    f = lambda w: binary_entropy(w) + w * math.log(d * d - 1) - math.log(d)  # noqa: E731
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lipschitz_witness_value(state: DensityOperator, other: DensityOperator, h: np.ndarray, tol: float = 1e-9):
    """Certified lower bound ``Tr[(state - other) H] / ||H||_L``.

    The per-site compressions come from small SDPs; the norms are then
    recomputed exactly, so the Lipschitz constant used is a true upper bound.
    """
    d, n = state.site_dim, state.n_sites
    h = hermitize(np.asarray(h, dtype=complex))
    per_site = []
    for i in range(1, n + 1):
        _, m = w1.site_dependence(h, d, n, i, tol)
        diff = hermitize(h - w1.insert_identity(m, d, n, i))
        per_site.append(2 * float(np.max(np.abs(np.linalg.eigvalsh(diff)))))
    lip = max(per_site)
    pairing = float(np.real(np.trace((state.matrix - other.matrix) @ h)))
    return pairing / lip, pairing, per_site


def verify_ame_lower_bound(mode: str = "witness", tol: float = 1e-9) -> VerificationReport:
    rep = VerificationReport("ame")
    psi = states.five_qubit_code_state()
    n, d = psi.n_sites, psi.site_dim
    for size in (1, 2):
        for c in itertools.combinations(range(1, n + 1), size):
            dev = float(np.max(np.abs(partial_trace_matrix(psi.matrix, d, c) - np.eye(d**size) / d**size)))
            label = "".join(map(str, c))
            rep.checks.append(CheckResult(f"ame/marginal-{label}", "AME marginals are maximally mixed", dev, 1e-9,
                                          tol=0.0, meta={"sites": list(c)}))
    root = ame_root(d)
    rep.checks.append(CheckResult("ame/root-low", "entropy continuity root", 0.18, root, tol=0.0, meta={"root": root}))
    rep.checks.append(CheckResult("ame/root-high", "entropy continuity root", root, 0.20, tol=0.0, meta={"root": root}))
    tau = states.maximally_mixed(d, n)
    gap = (von_neumann_entropy(tau) - von_neumann_entropy(psi)) / n
    rep.checks.append(CheckResult("ame/entropy-gap", "entropy gap per site", abs(gap - math.log(d)), 1e-12, tol=0.0,
                                  meta={"gap": gap}))
    meta = {"mode": mode, "root": root}
    try:
        if mode == "dual":
            wit = w1.w1_dual(psi, tau)
            value = wit.value
        else:
            value, pairing, per_site = lipschitz_witness_value(psi, tau, psi.matrix, tol)
            meta.update({"pairing": pairing, "lipschitz_per_site": per_site})
        rep.checks.append(CheckResult("ame/w1-lower", "no source of pure states is W1-close to i.i.d.",
                                      root - 1e-4, value / n, tol=0.0, meta={**meta, "w1_lower": value}))
    except Exception as exc:  # solver trouble downgrades to "not established"
        log.warning("AME lower bound not established: %s", exc)
        rep.checks.append(CheckResult("ame/w1-lower", "no source of pure states is W1-close to i.i.d.",
                                      root - 1e-4, math.nan, skipped=True, meta={**meta, "error": str(exc)}))
    return rep


# -- suite -----------------------------------------------------------------


@dataclass
class SuiteConfig:
    seed: int = 0
    duality_pairs: int = 10
    diagonal_pairs: int = 6
    product_pairs: int = 6
    marton_pairs: int = 6
    pure_product_pairs: int = 6
    metrisation_states: int = 4
    gentle_instances: int = 20
    moebius_functions: int = 20
    juntas: int = 10
    msr_sites: tuple = (3, 4, 5)
    paired_n: tuple = tuple(range(2, 13)) + (200,)
    paired_samples: int = 2000
    xi_n: tuple = (4, 6, 8)
    ame_mode: str = "witness"
    sdp_tol: float = 1e-8
    threads: int | None = None

    @classmethod
    def acceptance(cls, seed: int = 0) -> "SuiteConfig":
        return cls(seed=seed, duality_pairs=50, diagonal_pairs=20, product_pairs=20, marton_pairs=30,
                   pure_product_pairs=30, metrisation_states=6, moebius_functions=100, juntas=50)

    @classmethod
    def from_dict(cls, doc: dict) -> "SuiteConfig":
        known = set(cls.__dataclass_fields__)
        bad = set(doc) - known
        if bad:
            raise ValueError(f"unknown suite config keys: {sorted(bad)}")
        vals = {k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()}
        return cls(**vals)


def _worker_count(cfg: SuiteConfig) -> int:
    if cfg.threads is not None:
        return max(1, int(cfg.threads))
    env = os.environ.get("AIID_THREADS")
    return max(1, int(env)) if env else 1


def _w1_group(cfg: SuiteConfig) -> list[CheckResult]:
    """Duality, diagonal consistency and product formula instances plus everything that reuses them."""
    out: list[CheckResult] = []
    pool = []  # (name, rho, sigma, W1Value, meta, use_for_wlv)
    for i in range(cfg.duality_pairs):
        n = 2 + i % 2
        rng = _rng(cfg.seed, "duality", i)
        rho, sigma = random_density(n, 2, rng), random_density(n, 2, rng)
        pool.append((f"duality/{i:03d}", rho, sigma, w1_both(rho, sigma, cfg.sdp_tol), {"n": n, "index": i}, True))
    for i in range(cfg.diagonal_pairs):
        n = 1 + i % 3
        rng = _rng(cfg.seed, "diagonal", i)
        rho, sigma = random_diagonal(n, 2, rng), random_diagonal(n, 2, rng)
        pool.append((f"diagonal/{i:03d}", rho, sigma, w1_both(rho, sigma, cfg.sdp_tol), {"n": n, "index": i}, True))
    for i in range(cfg.product_pairs):
        n = 2 + i % 2
        rng = _rng(cfg.seed, "product", i)
        a, b = random_product(n, 2, rng), random_product(n, 2, rng)
        rho, sigma = kron_all(a), kron_all(b)
        local = math.fsum(w1.trace_distance(x, y) for x, y in zip(a, b))
        pool.append((f"product/{i:03d}", rho, sigma, w1_both(rho, sigma, cfg.sdp_tol),
                     {"n": n, "index": i, "local_sum": local}, False))
    for name, rho, sigma, w, meta, use_wlv in pool:
        out.append(_duality_check(f"w1-duality/{name}", w, meta))
        if name.startswith("diagonal"):
            c = w1_classical(rho, sigma)
            out.append(CheckResult(f"w1-diagonal/{name}", "W1 restricted to diagonal states equals Hamming transport",
                                   abs(w.value - c.value), 1e-5, tol=0.0, meta={**meta, "sdp": w.value, "lp": c.value}))
        if name.startswith("product"):
            out.append(CheckResult(f"w1-product/{name}", "W1 of product pairs is the sum of local trace distances",
                                   abs(w.value - meta["local_sum"]), 1e-6, tol=0.0, meta={**meta, "w1": w.value}))
        out.extend(check_sandwich(f"sandwich/{name}", rho, sigma, w, meta))
        if use_wlv:
            out.append(check_wlv(rho, sigma, w, name=f"wlv/{name}", meta=meta))
        out.append(check_entropy_continuity(rho, sigma, w, name=f"entropy-continuity/{name}", meta=meta))
    for n in (2, 4):
        xi = classical.classical_to_density(classical.xi_distribution(n))
        tau = states.maximally_mixed(2, n)
        out.append(check_wlv(xi, tau, w1_classical(xi, tau), name=f"wlv/xi{n}", meta={"n": n, "fixture": f"xi{n}"}))
    return out


def _marton_group(cfg: SuiteConfig) -> list[CheckResult]:
    out = []
    for i in range(cfg.marton_pairs):
        n = 1 + i % 3
        rng = _rng(cfg.seed, "marton", i)
        rho = random_density(n, 2, rng)
        factors = random_product(n, 2, rng)
        omega = kron_all(factors)
        w = w1_both(rho, omega, cfg.sdp_tol)
        meta = {"n": n, "index": i}
        out.append(_duality_check(f"w1-duality/marton/{i:03d}", w, meta))
        out.append(check_marton(rho, factors, w, name=f"marton/{i:03d}", meta=meta))
        out.append(check_entropy_continuity(rho, omega, w, name=f"entropy-continuity/marton/{i:03d}", meta=meta))
        out.extend(check_sandwich(f"sandwich/marton/{i:03d}", rho, omega, w, meta))
    return out


def _pure_product_group(cfg: SuiteConfig) -> list[CheckResult]:
    out = []
    for i in range(cfg.pure_product_pairs):
        n = 1 + i % 3
        rng = _rng(cfg.seed, "pure-product", i)
        rho = random_density(n, 2, rng)
        phis = random_product(n, 2, rng, pure_factors=True)
        target = kron_all(phis)
        w = w1_both(rho, target, cfg.sdp_tol)
        meta = {"n": n, "index": i}
        out.append(_duality_check(f"w1-duality/pure-product/{i:03d}", w, meta))
        out.append(check_pure_product(rho, phis, w, name=f"pure-product/{i:03d}", meta=meta))
    zero, one = pure([1, 0], 2), pure([0, 1], 2)
    for n in cfg.msr_sites:
        out.append(check_msr_epsilon(zero, one, n, name=f"msr-epsilon/flip/n{n}", meta={"fixture": "flip"}))
        rng = _rng(cfg.seed, "msr", n)
        ref = random_product(1, 2, rng, pure_factors=True)[0]
        omega = random_density(1, 2, rng)
        out.append(check_msr_epsilon(ref, omega, n, name=f"msr-epsilon/random/n{n}", meta={"fixture": "random"}))
    return out


def _metrisation_group(cfg: SuiteConfig) -> list[CheckResult]:
    out = []
    tau = states.maximally_mixed(2, 1)
    xi4 = classical.classical_to_density(classical.xi_distribution(4))
    for k in (1, 2):
        out.append(check_metrisation(xi4, tau, k, name=f"metrisation/xi4/k{k}", meta={"fixture": "xi4"}))
    for i in range(cfg.metrisation_states):
        rng = _rng(cfg.seed, "metrisation", i)
        rho_n = random_diagonal(4, 2, rng)
        rho = random_diagonal(1, 2, rng)
        for k in (1, 2):
            out.append(check_metrisation(rho_n, rho, k, name=f"metrisation/random/{i:03d}/k{k}", meta={"index": i}))
    return out


def _gentle_group(cfg: SuiteConfig) -> list[CheckResult]:
    out = []
    etas = (0.01, 0.05, 0.1)
    for i in range(cfg.gentle_instances):
        eta = etas[i % len(etas)]
        rng = _rng(cfg.seed, "gentle", i)
        dim = int(rng.integers(2, 9))
        proj, rho = states.gentle_instance(dim, eta, rng)
        rep = states.gentle_projection_check(rho, proj, eta)
        out.append(CheckResult(f"gentle/{i:03d}", "gentle measurement", rep.lhs, rep.rhs, tol=1e-12,
                               meta={"eta": eta, "dim": dim, "weight": rep.weight, "index": i}))
    return out


def _projector_group(cfg: SuiteConfig) -> list[CheckResult]:
    out = []
    ref = "defect-span projectors"
    zero = np.array([1.0, 0.0])
    for n, r, expected in ((2, 1, 3), (3, 1, 4)):
        rank = states.v_span_projector(zero, n, r).rank
        out.append(CheckResult(f"projectors/rank-n{n}-r{r}", ref, abs(rank - expected), 0, tol=0.0,
                               meta={"rank": rank, "expected": expected}))
    rng = _rng(cfg.seed, "projectors")
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    for n in range(1, 6):
        prev = None
        for r in range(0, min(2, n) + 1):
            cur = states.v_span_projector(v, n, r)
            if prev is not None:
                res = float(np.max(np.abs(cur.matrix @ prev.matrix - prev.matrix)))
                out.append(CheckResult(f"projectors/nesting-n{n}-r{r}", ref, res, 1e-9, tol=0.0, meta={"n": n, "r": r}))
            prev = cur
    pure_ref = pure(v / np.linalg.norm(v), 2)
    omega = random_density(1, 2, rng)
    ds = states.defect_state(pure_ref, omega, 4)
    psi = v / np.linalg.norm(v)
    pi1 = states.v_span_projector(psi, 4, 1)
    out.append(CheckResult("projectors/defect-support", ref, abs(pi1.weight(ds) - 1), 1e-9, tol=0.0,
                           meta={"weight": pi1.weight(ds)}))
    for r0 in (1, 2, 3):
        got = states.tail_functional(ds, psi, states.TailWeight("indicator", r0)).value
        closed = 1 - states.v_span_projector(psi, 4, r0).weight(ds)
        out.append(CheckResult(f"projectors/tail-indicator-r{r0}", "tail functional presets", abs(got - closed), 1e-9,
                               tol=0.0, meta={"value": got, "closed_form": closed}))
    cut = states.tail_functional(ds, psi, states.TailWeight("cutoff", 1)).value
    out.append(CheckResult("projectors/tail-cutoff-r1", "tail functional presets", cut, 0.0, tol=1e-9, meta={}))
    lin = states.tail_functional(ds, psi, states.TailWeight("linear")).value
    out.append(CheckResult("projectors/tail-linear", "tail functional presets", lin, 0.25, tol=1e-9, meta={}))
    return out


def _moebius_group(cfg: SuiteConfig) -> list[CheckResult]:
    out = []
    worst = 0.0
    for i in range(cfg.moebius_functions):
        rng = _rng(cfg.seed, "moebius", i)
        n = 1 + i % 10
        f = boolean.BooleanFunction(n, rng.standard_normal(2**n))
        back = boolean.moebius_coefficients(f).table()
        worst = max(worst, float(np.max(np.abs(back - f.table))))
    out.append(CheckResult("moebius/round-trip", "Moebius inversion", worst, 1e-9, tol=0.0,
                           meta={"functions": cfg.moebius_functions}))
    worst = 0.0
    for i in range(cfg.juntas):
        rng = _rng(cfg.seed, "junta", i)
        n = int(rng.integers(2, 9))
        r = int(rng.integers(1, n + 1))
        sites = sorted(rng.choice(np.arange(1, n + 1), size=r, replace=False).tolist())
        f = boolean.junta(n, sites, rng.standard_normal(2**r))
        allowed = boolean.subset_mask(n, sites)
        poly = boolean.moebius_coefficients(f)
        stray = [abs(c) for m, c in poly.coeffs.items() if m & ~allowed]
        worst = max([worst] + stray)
    out.append(CheckResult("moebius/junta-locality", "Moebius inversion", worst, 1e-12, tol=0.0,
                           meta={"juntas": cfg.juntas}))
    return out


GROUPS: dict[str, list[str]] = {
    "hierarchy": ["w1", "marton", "pure-product", "metrisation", "gentle", "projectors"],
    "counterexamples": ["paired", "xi", "moebius"],
    "ame": ["ame"],
}
GROUPS["all"] = GROUPS["hierarchy"] + GROUPS["counterexamples"] + GROUPS["ame"]


def _job(name: str, cfg: SuiteConfig) -> Callable[[], list[CheckResult]]:
    jobs = {
        "w1": lambda: _w1_group(cfg),
        "marton": lambda: _marton_group(cfg),
        "pure-product": lambda: _pure_product_group(cfg),
        "metrisation": lambda: _metrisation_group(cfg),
        "gentle": lambda: _gentle_group(cfg),
        "projectors": lambda: _projector_group(cfg),
        "moebius": lambda: _moebius_group(cfg),
        "paired": lambda: verify_paired_counterexample(n_list=cfg.paired_n, samples=cfg.paired_samples,
                                                       seed=cfg.seed).checks,
        "xi": lambda: verify_xi_counterexample(cfg.xi_n).checks,
        "ame": lambda: verify_ame_lower_bound(cfg.ame_mode).checks,
    }
    return jobs[name]


def run_suite(config: SuiteConfig | dict | None = None, suite: str = "all", timings: bool = False) -> VerificationReport:
    """Run a named suite; checks are sorted by name so the report is order-deterministic.

    Wall-clock timings are left out unless ``timings`` is set, since they
    would break byte-identical reports.
    """
    cfg = config if isinstance(config, SuiteConfig) else SuiteConfig.from_dict(config or {})
    if suite not in GROUPS:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(GROUPS)}")
    names = GROUPS[suite]
    workers = _worker_count(cfg)

    def run(name):
        t0 = time.perf_counter()
        checks = _job(name, cfg)()
        if timings:
            elapsed = time.perf_counter() - t0
            for c in checks:
                c.meta["group_seconds"] = elapsed
        for c in checks:
            c.meta.setdefault("seed", cfg.seed)
        return checks

    if workers == 1:
        results = [run(n) for n in names]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, names))
    rep = VerificationReport(suite)
    for checks in results:
        rep.extend(checks)
    rep.checks.sort(key=lambda c: c.name)
    return rep


def config_dict(cfg: SuiteConfig) -> dict:
    return _clean(asdict(cfg))
