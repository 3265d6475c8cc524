import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qprospect.errors import ValidationError
from qprospect.qstate import (
    HADAMARD,
    DensityOperator,
    HilbertSpace,
    StateVector,
    UnitaryOperator,
    dephase,
    evolve,
    pure_density,
    random_density,
    random_unitary,
    tensor,
    validate_density,
)

HALF = np.full((2, 2), 0.5, dtype=complex)


def test_hilbert_space_labels_and_tensor():
    a = HilbertSpace(2, ("C", "D"))
    b = HilbertSpace(3)
    ab = tensor(a, b)
    assert ab.dimension == 6
    assert ab.factors == (2, 3)
    assert ab.labels[0] == "C,0"
    assert a.index("D") == 1


def test_hilbert_space_rejects_bad_dimension():
    with pytest.raises(ValidationError):
        HilbertSpace(0)


def test_state_vector_norm_violation():
    with pytest.raises(ValidationError, match="norm violation"):
        StateVector.of([1.0, 1.0])


def test_pure_density_examples():
    assert np.allclose(pure_density([1, 0]).matrix, [[1, 0], [0, 0]])
    assert np.allclose(pure_density(np.array([1, 1]) / np.sqrt(2)).matrix, HALF)
    b = np.array([0.6, 0.8])
    # entrywise outer product b_alpha conj(b_beta)
    expected = np.array([[b[i] * np.conj(b[j]) for j in range(2)] for i in range(2)])
    assert np.allclose(pure_density(b).matrix, expected)


def test_pure_density_rejects_unnormalized():
    with pytest.raises(ValidationError, match="norm violation"):
        pure_density([1.0, 1.0])


def test_validate_density_reports():
    assert validate_density(np.eye(2) / 2).passed
    rep = validate_density(np.array([[1, 0], [0, 0.5]]))
    assert not rep.passed
    assert any("trace = 1.5" in p for p in rep.problems)
    rep = validate_density(np.array([[0.5, 0.6], [0.6, 0.5]]))
    # eigenvalues 0.5 +- 0.6
    assert np.isclose(rep.min_eigenvalue, -0.1)
    assert any("negative eigenvalue" in p for p in rep.problems)


def test_density_operator_is_read_only():
    rho = DensityOperator.of(np.eye(2) / 2)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1.0


def test_from_user_matrix_clips_rounding_noise():
    m = np.diag([1.0 + 1e-11, -1e-11])
    rho = DensityOperator.from_user_matrix(m)
    assert rho.spectrum()[0] >= 0
    assert np.isclose(np.trace(rho.matrix).real, 1.0, atol=1e-15)
    with pytest.raises(ValidationError, match="negative eigenvalue"):
        DensityOperator.from_user_matrix(np.diag([1.1, -0.1]))


def test_unitary_validation():
    UnitaryOperator.of(HADAMARD)
    with pytest.raises(ValidationError, match="not unitary"):
        UnitaryOperator.of(np.array([[1, 1], [0, 1]]))


def test_evolve_examples():
    rho = pure_density([1, 0])
    assert np.allclose(evolve(rho, UnitaryOperator.identity(rho.space)).matrix, rho.matrix)
    assert np.allclose(evolve(rho, UnitaryOperator.of(HADAMARD)).matrix, HALF)


def test_evolve_dimension_mismatch():
    with pytest.raises(ValidationError, match="dimension mismatch"):
        evolve(pure_density([1, 0]), UnitaryOperator.of(np.eye(3)))


def test_dephase_examples():
    rho = DensityOperator.of(HALF)
    assert np.allclose(dephase(rho).matrix, np.eye(2) / 2)
    plus_minus = HADAMARD
    # the state is diagonal in its own eigenbasis, so nothing is removed
    assert np.allclose(dephase(rho, plus_minus).matrix, HALF)


def test_dephase_rejects_non_orthonormal_basis():
    with pytest.raises(ValidationError, match="orthonormal"):
        dephase(DensityOperator.of(HALF), np.array([[1, 1], [0, 1]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_evolution_preserves_spectrum(dim, seed):
    rng = np.random.default_rng(seed)
    rho = random_density(dim, rng)
    out = evolve(rho, random_unitary(dim, rng))
    assert np.allclose(out.spectrum(), rho.spectrum(), atol=1e-12)
    assert abs(np.trace(out.matrix) - 1) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_dephase_is_idempotent(dim, seed):
    rng = np.random.default_rng(seed)
    rho = random_density(dim, rng)
    basis = random_unitary(dim, rng).matrix
    once = dephase(rho, basis)
    assert np.linalg.norm(dephase(once, basis).matrix - once.matrix) <= 1e-12
    assert validate_density(once).passed
