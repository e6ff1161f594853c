import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aiid import kernels

BACKENDS = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])


def brute_moebius(vals, n):
    out = np.zeros_like(vals)
    for s in range(2**n):
        for t in range(2**n):
            if t & ~s == 0:
                out[s] += (-1) ** (bin(s).count("1") - bin(t).count("1")) * vals[t]
    return out


@pytest.mark.parametrize("backend", BACKENDS)
def test_moebius_matches_inclusion_exclusion(backend):
    rng = np.random.default_rng(0)
    for n in range(0, 6):
        vals = rng.standard_normal(2**n)
        got = kernels.moebius_transform(vals, backend=backend)
        assert np.allclose(got, brute_moebius(vals, n), atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_zeta_inverts_moebius(backend):
    vals = np.random.default_rng(1).standard_normal(2**9)
    back = kernels.zeta_transform(kernels.moebius_transform(vals, backend=backend), backend=backend)
    assert np.max(np.abs(back - vals)) <= 1e-9


def test_input_is_not_modified():
    vals = np.arange(8.0)
    kernels.moebius_transform(vals)
    assert np.array_equal(vals, np.arange(8.0))


def test_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        kernels.moebius_transform(np.ones(6))


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("backend", BACKENDS)
def test_hamming_matrix(backend, d):
    n = 3
    codes = np.arange(d**n, dtype=np.int64)
    got = kernels.hamming_matrix(codes, codes, n, d, backend=backend)
    strings = list(itertools.product(range(d), repeat=n))
    want = np.array([[sum(a != b for a, b in zip(x, y)) for y in strings] for x in strings])
    assert np.array_equal(got, want)


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")
@given(st.integers(min_value=1, max_value=12), st.integers(min_value=0, max_value=2**32 - 1))
def test_backends_agree(n, seed):
    vals = np.random.default_rng(seed).standard_normal(2**n)
    a = kernels.moebius_transform(vals, backend="python")
    b = kernels.moebius_transform(vals, backend="cython")
    assert np.allclose(a, b, atol=1e-10)
