import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aiid import boolean as B
from aiid import classical as C
from aiid.tensor import GuardError, basis_state, density

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def brute_coefficients(f: B.BooleanFunction):
    """Inclusion-exclusion straight from the definition, subsets as tuples."""
    n = f.n
    out = {}
    for k in range(n + 1):
        for s in itertools.combinations(range(1, n + 1), k):
            total = 0.0
            for j in range(k + 1):
                for t in itertools.combinations(s, j):
                    x = [1 if i in t else 0 for i in range(1, n + 1)]
                    total += (-1) ** (k - j) * f(x)
            out[s] = total
    return out


def test_moebius_fixed_examples():
    prod = B.BooleanFunction.from_callable(2, lambda x: x[0] * x[1])
    assert B.moebius_coefficients(prod).by_subset() == {(1, 2): 1.0}
    xor = B.BooleanFunction.from_callable(2, lambda x: x[0] ^ x[1])
    assert B.moebius_coefficients(xor).by_subset() == {(1,): 1.0, (2,): 1.0, (1, 2): -2.0}
    one = B.BooleanFunction(3, np.ones(8))
    assert B.moebius_coefficients(one).by_subset() == {(): 1.0}


def test_site_ordering_is_big_endian():
    f = B.BooleanFunction.from_callable(3, lambda x: float(x[0]))
    assert B.moebius_coefficients(f).by_subset() == {(1,): 1.0}
    assert f([1, 0, 0]) == 1.0 and f([0, 0, 1]) == 0.0


@given(seeds, st.integers(min_value=1, max_value=5))
def test_moebius_matches_definition(seed, n):
    f = B.BooleanFunction(n, np.random.default_rng(seed).standard_normal(2**n))
    poly = B.moebius_coefficients(f)
    for s, c in brute_coefficients(f).items():
        assert poly.coefficient(s) == pytest.approx(c, abs=1e-10)


@given(seeds, st.integers(min_value=1, max_value=10))
def test_round_trip(seed, n):
    f = B.BooleanFunction(n, np.random.default_rng(seed).standard_normal(2**n))
    poly = B.moebius_coefficients(f)
    assert np.max(np.abs(poly.table() - f.table)) <= 1e-9


@given(seeds)
def test_evaluate_pointwise(seed):
    rng = np.random.default_rng(seed)
    f = B.BooleanFunction(4, rng.standard_normal(16))
    poly = B.moebius_coefficients(f)
    for x in itertools.product((0, 1), repeat=4):
        assert B.evaluate(poly, x) == pytest.approx(f(x), abs=1e-10)


@given(seeds, st.integers(min_value=2, max_value=8))
def test_junta_locality(seed, n):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(1, n + 1))
    sites = sorted(rng.choice(np.arange(1, n + 1), size=r, replace=False).tolist())
    f = B.junta(n, sites, rng.standard_normal(2**r))
    allowed = B.subset_mask(n, sites)
    poly = B.moebius_coefficients(f)
    assert all(abs(c) <= 1e-12 for m, c in poly.coeffs.items() if m & ~allowed)
    assert B.degree(poly) <= r


def test_degree_and_evaluate():
    p = B.MultilinearPolynomial.from_subsets(3, {(): 1.0})
    assert B.evaluate(p, [1, 0, 1]) == 1.0
    assert B.degree(B.MultilinearPolynomial.from_subsets(3, {(1, 2, 3): 1.0})) == 3
    assert B.degree(B.MultilinearPolynomial(3)) == -1
    with pytest.raises(ValueError):
        B.evaluate(p, [1, 0])


def test_guards():
    with pytest.raises(GuardError):
        B.BooleanFunction(17, np.zeros(2**17))
    with pytest.raises(ValueError):
        B.BooleanFunction(2, [0.0, 1.0, np.inf, 0.0])
    with pytest.raises(ValueError):
        B.middle_slice_rank_test(5, 1)
    with pytest.raises(GuardError):
        B.middle_slice_rank_test(14, 2)


@pytest.mark.parametrize("n,r,want", [(4, 1, 0), (6, 2, 0), (8, 3, 0), (4, 2, 2)])
def test_middle_slice_rank(n, r, want):
    dim, cert = B.middle_slice_rank_test(n, r)
    assert dim == want
    if dim:
        # the certificate really vanishes off the slice
        poly = B.MultilinearPolynomial.from_subsets(n, cert.null_vector)
        table = poly.table()
        weights = B._popcounts(n)
        assert np.max(np.abs(table[weights != n // 2])) <= 1e-9
        assert np.max(np.abs(table[weights == n // 2])) > 1e-3


def test_diagonal_function():
    f = B.diagonal_function(basis_state("00"))
    assert f.table.tolist() == [1.0, 0.0, 0.0, 0.0]
    xi4 = C.classical_to_density(C.xi_distribution(4))
    g = B.diagonal_function(xi4)
    w = g.weights()
    assert np.allclose(g.table[w == 2], 1 / 6) and np.allclose(g.table[w != 2], 0)
    tau = B.diagonal_function(density(np.eye(8) / 8))
    assert np.allclose(tau.table, 1 / 8)
    with pytest.raises(ValueError):
        B.diagonal_function(density(np.eye(9) / 9, 3))


def test_odd_split():
    xi5 = C.classical_to_density(C.xi_distribution(5))
    f0, f1 = B.diagonal_pieces(xi5)
    assert f0.n == f1.n == 4
    assert np.allclose(f0.table, f1.table)
    assert f0.table.sum() == pytest.approx(0.5)


def test_low_degree_fit_residual():
    f = B.BooleanFunction.from_callable(3, lambda x: x[0] * x[1] - 2 * x[2] + 0.5)
    assert B.low_degree_fit_residual(f, 2) <= 1e-10
    parity = B.BooleanFunction.from_callable(3, lambda x: x[0] ^ x[1] ^ x[2])
    assert B.low_degree_fit_residual(parity, 2) > 1e-6
    xi6 = B.diagonal_function(C.classical_to_density(C.xi_distribution(6)))
    assert B.low_degree_fit_residual(xi6, 2) > 1e-6
    assert B.low_degree_fit_residual(xi6, 6) <= 1e-10


@pytest.mark.parametrize("backend", ["python", None])
def test_backend_choice(backend):
    f = B.BooleanFunction(3, np.arange(8.0))
    assert B.moebius_coefficients(f, backend=backend).by_subset() == {(3,): 1.0, (2,): 2.0, (1,): 4.0}
