import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aiid import conic
from aiid.tensor import random_hermitian

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@given(seeds, st.integers(min_value=1, max_value=5))
def test_real_embedding_doubles_spectrum(seed, side):
    h = random_hermitian(side, seed)
    y = conic.hermitian_real_embedding(h)
    lam = np.sort(np.linalg.eigvalsh(h))
    assert np.allclose(np.sort(np.linalg.eigvalsh(y)), np.sort(np.repeat(lam, 2)))
    assert np.allclose(conic.real_embedding_inverse(y), h)


def test_real_embedding_rejects_non_hermitian():
    with pytest.raises(ValueError):
        conic.hermitian_real_embedding(np.array([[0, 1], [0, 0]], dtype=complex))


@given(seeds, st.integers(min_value=1, max_value=5), st.booleans())
def test_coordinates_are_an_isometry(seed, side, is_complex):
    a, b = random_hermitian(side, seed), random_hermitian(side, seed + 1)
    if not is_complex:
        a, b = a.real, b.real
    ca, cb = conic.coordinates(a, is_complex), conic.coordinates(b, is_complex)
    assert np.allclose(conic.from_coordinates(ca, side, is_complex), a)
    assert ca @ cb == pytest.approx(np.real(np.trace(a @ b)), abs=1e-10)


def test_basis_matches_coordinates():
    for side in (1, 2, 3):
        for e_idx, e in enumerate(conic._basis(side, True)):
            c = conic.coordinates(e, True)
            assert np.allclose(c, np.eye(len(c))[e_idx])


def test_min_trace_with_fixed_entry():
    p = conic.ConicProblem()
    p.add_block("X", 2)
    p.set_objective("X", np.eye(2))
    e11 = np.zeros((2, 2))
    e11[0, 0] = 1
    p.add_constraint({"X": e11}, 1.0)
    res = conic.solve_or_raise(p)
    assert res.primal_value == pytest.approx(1.0, abs=1e-6)
    assert res.status == conic.OPTIMAL


@pytest.mark.parametrize("seed", range(5))
def test_trace_norm_sdp(seed):
    # ||A||_1 = min Tr(P + Q) with P - Q = A, P, Q >= 0
    a = random_hermitian(4, seed)
    p = conic.ConicProblem()
    p.add_block("P", 4)
    p.add_block("Q", 4)
    p.set_objective("P", np.eye(4))
    p.set_objective("Q", np.eye(4))
    p.add_matrix_equality({"P": lambda x: x, "Q": lambda x: -x}, a)
    res = conic.solve_or_raise(p, tol=1e-9)
    want = np.abs(np.linalg.eigvalsh(a)).sum()
    assert res.primal_value == pytest.approx(want, rel=1e-7)
    assert res.dual_value == pytest.approx(want, rel=1e-7)


@pytest.mark.parametrize("seed", range(3))
def test_largest_eigenvalue_by_lmi(seed):
    a = random_hermitian(3, seed)
    p = conic.ConicProblem()
    p.add_block("t", 1, complex=False, psd=False)
    p.set_objective("t", np.ones((1, 1)))
    p.add_lmi({"t": lambda t: t[0, 0] * np.eye(3)}, -a)
    res = conic.solve_or_raise(p, tol=1e-9)
    assert res.primal_value == pytest.approx(np.linalg.eigvalsh(a).max(), abs=1e-7)


def test_infeasible_problem_reported():
    p = conic.ConicProblem()
    p.add_block("X", 2)
    p.set_objective("X", np.eye(2))
    p.add_constraint({"X": np.eye(2)}, -1.0)
    res = conic.solve(p)
    assert res.status == conic.INFEASIBLE
    with pytest.raises(conic.SolverError):
        conic.solve_or_raise(p)


def test_unbounded_problem_reported():
    p = conic.ConicProblem()
    p.add_block("X", 2)
    p.set_objective("X", -np.eye(2))
    e12 = np.array([[0, 1], [1, 0]], dtype=float)
    p.add_constraint({"X": e12}, 0.0)
    assert conic.solve(p).status == conic.UNBOUNDED


def test_dependent_rows_are_dropped(caplog):
    p = conic.ConicProblem()
    p.add_block("X", 2)
    p.set_objective("X", np.eye(2))
    e11 = np.diag([1.0, 0.0])
    p.add_constraint({"X": e11}, 1.0)
    p.add_constraint({"X": 2 * e11}, 2.0)
    with caplog.at_level(logging.WARNING):
        res = conic.solve_or_raise(p)
    assert res.primal_value == pytest.approx(1.0, abs=1e-6)
    assert any("dependent" in r.message for r in caplog.records)


def test_inconsistent_rows_raise():
    p = conic.ConicProblem()
    p.add_block("X", 2)
    p.set_objective("X", np.eye(2))
    e11 = np.diag([1.0, 0.0])
    p.add_constraint({"X": e11}, 1.0)
    p.add_constraint({"X": e11}, 2.0)
    with pytest.raises(conic.SolverError):
        conic.solve(p)


def test_duplicate_block_name():
    p = conic.ConicProblem()
    p.add_block("X", 2)
    with pytest.raises(ValueError):
        p.add_block("X", 3)
