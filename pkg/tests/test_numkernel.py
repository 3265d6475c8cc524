import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qprospect.errors import NumericalInvariantError, ValidationError
from qprospect.numkernel import (
    DEFAULT_TOL,
    Tolerance,
    eig_hermitian,
    is_orthonormal,
    kron,
    kron_all,
    partial_trace,
    permute_factors,
    range_basis,
)
from qprospect.qstate import random_hermitian

BELL = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def test_tolerance_defaults_and_bounds():
    assert DEFAULT_TOL.eps_equality == 1e-10
    with pytest.raises(ValidationError):
        Tolerance(eps_equality=0.0)
    with pytest.raises(ValidationError):
        Tolerance(eps_psd=1e-2)
    assert DEFAULT_TOL.with_equality(1e-12).eps_equality == 1e-12


def test_kron_identity_and_diagonal():
    assert np.array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))
    assert np.array_equal(kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))


def test_kron_all_matches_nested():
    rng = np.random.default_rng(1)
    a, b, c = (rng.standard_normal((2, 2)) for _ in range(3))
    assert np.allclose(kron_all([a, b, c]), np.kron(np.kron(a, b), c))


def test_partial_trace_full_trace_is_one_by_one():
    rng = np.random.default_rng(2)
    m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    out = partial_trace(m, [2, 3], [])
    assert out.shape == (1, 1)
    assert np.isclose(out[0, 0], np.trace(m))


@pytest.mark.parametrize("keep", [[0], [1]])
def test_partial_trace_bell_state(keep):
    rho = np.outer(BELL, BELL.conj())
    assert np.allclose(partial_trace(rho, [2, 2], keep), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((2, 2))
    b = rng.standard_normal((3, 3))
    c = rng.standard_normal((2, 2))
    m = kron_all([a, b, c])
    assert np.allclose(partial_trace(m, [2, 3, 2], [0, 2]), np.trace(b) * np.kron(a, c))
    assert np.allclose(partial_trace(m, [2, 3, 2], [1]), np.trace(a) * np.trace(c) * b)


def test_partial_trace_factorization_mismatch():
    with pytest.raises(ValidationError, match="factorization mismatch"):
        partial_trace(np.eye(5), [2, 2], [0])


def test_permute_factors_swaps_kron_order():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((2, 2))
    b = rng.standard_normal((3, 3))
    assert np.allclose(permute_factors(np.kron(a, b), [2, 3], [1, 0]), np.kron(b, a))


def test_eig_hermitian_diagonal():
    vals, vecs = eig_hermitian(np.diag([2.0, 1.0]))
    assert np.allclose(vals, [1, 2])
    assert np.allclose(np.abs(vecs), [[0, 1], [1, 0]])


def test_eig_hermitian_pauli_x():
    vals, vecs = eig_hermitian(np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.allclose(vals, [-1, 1])
    assert np.allclose(vecs[:, 0], np.array([1, -1]) / np.sqrt(2))
    assert np.allclose(vecs[:, 1], np.array([1, 1]) / np.sqrt(2))


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(ValidationError, match="not Hermitian"):
        eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


def test_numerical_invariant_error_is_distinct():
    assert not issubclass(NumericalInvariantError, ValidationError)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_eig_reconstruction(dim, seed):
    m = random_hermitian(dim, np.random.default_rng(seed))
    vals, vecs = eig_hermitian(m)
    assert np.all(np.diff(vals) >= 0)
    assert np.linalg.norm(vecs @ np.diag(vals) @ vecs.conj().T - m) <= 1e-10
    assert is_orthonormal(vecs)


def test_range_basis_examples():
    e0 = np.diag([1.0, 0.0, 0.0])
    basis = range_basis(e0)
    assert basis.shape == (3, 1)
    assert np.allclose(np.abs(basis[:, 0]), [1, 0, 0])
    assert range_basis(np.eye(4)).shape == (4, 4)
    ones = range_basis(np.array([[1.0, 1.0], [1.0, 1.0]]))
    assert ones.shape == (2, 1)
    assert np.allclose(np.abs(ones[:, 0]), np.array([1, 1]) / np.sqrt(2))


def test_range_basis_of_zero_matrix_is_empty():
    assert range_basis(np.zeros((3, 3))).shape == (3, 0)
