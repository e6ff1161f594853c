import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aiid import states as S
from aiid import tensor as T

seeds = st.integers(min_value=0, max_value=2**32 - 1)
TAU = T.density(np.eye(2) / 2)
ZERO, ONE = T.basis_state("0"), T.basis_state("1")


def test_iid_state():
    rho = T.random_density(1, 2, 0)
    assert np.allclose(S.iid_state(rho, 1).matrix, rho.matrix)
    assert np.allclose(S.iid_state(TAU, 3).matrix, np.eye(8) / 8)
    three = S.iid_state(rho, 3)
    for keep in [(1,), (2, 3), (1, 3)]:
        assert np.allclose(T.partial_trace(three, keep).matrix, T.tensor_power(rho, len(keep)).matrix)
    with pytest.raises(T.GuardError):
        S.iid_state(TAU, 13)


def test_defect_state_small_cases():
    assert np.allclose(S.defect_state(ZERO, None, 3).matrix, T.basis_state("000").matrix)
    got = S.defect_state(ZERO, ONE, 2)
    want = 0.5 * (T.basis_state("01").matrix + T.basis_state("10").matrix)
    assert np.allclose(got.matrix, want)


@pytest.mark.parametrize("n,k", [(3, 1), (3, 2), (4, 2)])
def test_defect_state_equals_full_symmetrization(n, k):
    rng = np.random.default_rng(n * 10 + k)
    rho = T.random_density(1, 2, rng)
    omega = T.random_density(k, 2, rng)
    base = T.DensityOperator(np.kron(T.tensor_power(rho, n - k).matrix, omega.matrix), 2)
    assert np.allclose(S.defect_state(rho, omega, n).matrix, S.symmetrize(base).matrix, atol=1e-12)


@settings(max_examples=10)
@given(seeds)
def test_defect_state_is_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    rho, omega = T.random_density(1, 2, rng), T.random_density(2, 2, rng)
    ds = S.defect_state(rho, omega, 4)
    for img in itertools.permutations(range(1, 5)):
        assert np.max(np.abs(T.permute_sites(ds, T.Permutation(img)).matrix - ds.matrix)) <= 1e-10


@settings(max_examples=10)
@given(seeds, st.integers(min_value=1, max_value=3))
def test_defect_single_site_marginal(seed, k):
    rng = np.random.default_rng(seed)
    n = 4
    rho, omega = T.random_density(1, 2, rng), T.random_density(k, 2, rng)
    ds = S.defect_state(rho, omega, n)
    omega_bar = sum(T.partial_trace(omega, [i]).matrix for i in range(1, k + 1)) / k
    want = ((n - k) * rho.matrix + k * omega_bar) / n
    for i in range(1, n + 1):
        assert np.allclose(T.partial_trace(ds, [i]).matrix, want, atol=1e-12)


def test_span_projector_ranks():
    zero = [1, 0]
    assert S.v_span_projector(zero, 2, 1).rank == 3
    assert S.v_span_projector(zero, 3, 1).rank == 4
    p0 = S.v_span_projector(zero, 3, 0)
    assert p0.rank == 1 and np.allclose(p0.matrix, T.basis_state("000").matrix)
    assert S.v_span_projector(zero, 3, 3).rank == 8


@pytest.mark.parametrize("n,r", [(3, 1), (4, 2), (5, 1)])
def test_span_rank_formula(n, r):
    # dimension of the span = sum_{j <= r} C(n, j) (d - 1)^j
    d = 3
    psi = np.random.default_rng(n + r).standard_normal(d)
    if d**n > T.MAX_SIDE:
        pytest.skip("too large")
    want = sum(math.comb(n, j) * (d - 1) ** j for j in range(r + 1))
    assert S.v_span_projector(psi, n, r).rank == want


@settings(max_examples=8)
@given(seeds)
def test_span_projector_invariants(seed):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    n = 3
    prev = None
    for r in range(n + 1):
        p = S.v_span_projector(psi, n, r)
        m = p.matrix
        assert np.max(np.abs(m @ m - m)) <= 1e-9
        assert np.max(np.abs(m - m.conj().T)) <= 1e-12
        assert abs(p.rank - np.trace(m).real) < 0.5
        gens = S.span_generators(psi, n, r)
        assert np.max(np.abs(m @ gens - gens)) <= 1e-8
        if prev is not None:
            assert np.max(np.abs(m @ prev - prev)) <= 1e-9
        prev = m


def test_tail_functional_presets():
    psi = np.array([1.0, 0.0])
    ds = S.defect_state(ZERO, T.random_density(1, 2, 3), 4)
    pi1 = S.v_span_projector(psi, 4, 1)
    assert pi1.weight(ds) == pytest.approx(1.0, abs=1e-9)
    assert S.tail_functional(ds, psi, S.TailWeight("cutoff", 1)).value == 0.0
    assert S.tail_functional(ds, psi, S.TailWeight("linear")).value <= 0.25 + 1e-12
    for r0 in range(0, 4):
        got = S.tail_functional(ds, psi, S.TailWeight("indicator", r0)).value
        closed = 1 - (0.0 if r0 == 0 else S.v_span_projector(psi, 4, r0).weight(ds))
        assert got == pytest.approx(closed, abs=1e-9)


def test_tail_functional_pure_iid():
    psi = np.array([1.0, 0.0])
    iid = T.basis_state("000")
    # with Pi_0 = 0 every state carries its full weight at r = 1
    assert S.tail_functional(iid, psi, S.TailWeight("cutoff", 0)).value == math.inf
    assert S.tail_functional(iid, psi, S.TailWeight("cutoff", 1)).value == 0.0
    # with Pi_0 the projector onto psi^n, the pure i.i.d. state has no defects at all
    res = S.tail_functional(iid, psi, S.TailWeight("cutoff", 0), zero_defect_projector=True)
    assert res.value == 0.0


def test_tail_exponential_and_parse():
    psi = np.array([1.0, 0.0])
    ds = S.defect_state(ZERO, ONE, 3)
    assert S.tail_functional(ds, psi, S.TailWeight.parse("exp:0.5")).value == pytest.approx(math.exp(0.5))
    assert S.TailWeight.parse("indicator:2") == S.TailWeight("indicator", r0=2)
    with pytest.raises(ValueError):
        S.TailWeight.parse("quadratic")


@settings(max_examples=8)
@given(seeds, st.integers(min_value=1, max_value=2))
def test_msr_fidelity_count(seed, r):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    psi /= np.linalg.norm(psi)
    n = 3
    proj = S.v_span_projector(psi, n, r).matrix
    # random state supported in span V^n_r
    g = proj @ (rng.standard_normal((2**n, 2)) + 1j * rng.standard_normal((2**n, 2)))
    rho = g @ g.conj().T
    rho = T.density(rho / np.trace(rho).real)
    assert S.fidelity_count(rho, psi) >= n - r - 1e-8


def test_defect_extension_certifies():
    rng = np.random.default_rng(4)
    rho, omega = T.random_density(1, 2, rng), T.random_density(1, 2, rng)
    ext, psi = S.defect_extension(rho, omega, 3)
    cert = S.msr_certificate(S.defect_state(rho, omega, 3), ext, psi, 1)
    assert cert.extends and cert.permutation_invariant and cert.supported_in_span
    # the same extension is not supported in the zero-defect span
    assert not S.msr_certificate(S.defect_state(rho, omega, 3), ext, psi, 0).supported_in_span


def test_certificate_reports_conditions_separately():
    rho = T.random_density(1, 2, 1)
    psi = T.purify(rho)
    ref = T.DensityOperator(np.outer(psi, psi.conj()), 4)
    other = T.random_pure(1, 4, 2)
    ext = T.tensor_product(ref, other)  # not symmetric
    cert = S.msr_certificate(T.tensor_product(rho, S.trace_out_purifiers(other, 2)), ext, psi, 1)
    assert cert.extends and cert.supported_in_span and not cert.permutation_invariant


def test_gentle_fixed_case():
    eta = 0.1
    proj = np.diag([1.0, 0, 0, 0])
    rho = T.density(np.diag([1 - eta, eta / 3, eta / 3, eta / 3]))
    rep = S.gentle_projection_check(rho, proj, eta)
    assert rep.lhs == pytest.approx(eta / 2)
    assert rep.holds
    same = S.gentle_projection_check(T.basis_state("00"), np.diag([1.0, 1, 0, 0]), 0.0)
    assert same.lhs == pytest.approx(0.0, abs=1e-15)


def test_gentle_precondition():
    with pytest.raises(ValueError):
        S.gentle_projection_check(T.basis_state("1"), np.diag([1.0, 0.0]), 0.1)
    with pytest.raises(ValueError):
        S.gentle_projection_check(T.basis_state("1"), np.diag([0.5, 1.0]), 0.1)


@settings(max_examples=20)
@given(seeds, st.sampled_from([0.01, 0.05, 0.1]))
def test_gentle_random(seed, eta):
    rng = np.random.default_rng(seed)
    proj, rho = S.gentle_instance(int(rng.integers(2, 7)), eta, rng)
    rep = S.gentle_projection_check(rho, proj, eta)
    assert rep.weight == pytest.approx(1 - eta, abs=1e-10)
    assert rep.holds


def test_five_qubit_code_state():
    psi = S.five_qubit_code_state()
    assert T.von_neumann_entropy(psi) == pytest.approx(0.0, abs=1e-10)
    assert S.maximal_marginal_deviation(psi, 2) <= 1e-9
    for label in S.FIVE_QUBIT_STABILIZERS:
        g = S.pauli_string(label)
        assert np.trace(g @ psi.matrix).real == pytest.approx(1.0)


def test_maximally_mixed():
    tau2 = S.maximally_mixed(2, 2)
    assert np.trace(tau2.matrix).real == pytest.approx(1.0)
    assert np.allclose(np.linalg.eigvalsh(tau2.matrix), 0.25)
    assert T.von_neumann_entropy(S.maximally_mixed(3, 2)) == pytest.approx(2 * math.log(3))
