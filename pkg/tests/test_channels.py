import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qprospect import channels as ch
from qprospect.errors import ValidationError
from qprospect.numkernel import kron, kron_all, partial_trace, permute_factors
from qprospect.qstate import (
    HADAMARD,
    DensityOperator,
    HilbertSpace,
    product_space,
    pure_density,
    random_density,
    random_unitary,
)

DIMS = [2, 2, 2]
BELL = np.array([1, 0, 0, 1]) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def basis_states():
    return [pure_density([1, 0]), pure_density([0, 1]), pure_density([1, 0])]


def test_identity_evolution_leaves_state_unchanged():
    rho = random_density(DIMS, np.random.default_rng(1))
    out = ch.apply_channel(rho, ch.evolution(np.eye(8)))
    assert np.allclose(out.matrix, rho.matrix, atol=1e-15)


def test_disentangling_product_state_is_fixed_point():
    rng = np.random.default_rng(2)
    rho_a, rho_b, rho_m = (random_density(2, rng).matrix for _ in range(3))
    rho = DensityOperator.of(kron_all([rho_a, rho_b, rho_m]), DIMS)
    out = ch.apply_channel(rho, ch.measurement([ch.FACTOR_B]))
    assert np.allclose(out.matrix, rho.matrix, atol=1e-14)


def test_disentangling_bell_state():
    rho = pure_density(BELL, product_space([2, 2]))
    out = ch.apply_channel(rho, ch.measurement([1]))
    # partial traces of the Bell state are both identity/2
    oracle = kron(partial_trace(rho.matrix, [2, 2], [0]), partial_trace(rho.matrix, [2, 2], [1]))
    assert np.allclose(out.matrix, oracle, atol=1e-15)
    assert np.allclose(out.matrix, np.eye(4) / 4, atol=1e-15)


@pytest.mark.parametrize("partition", [[0, 1, 2], []])
def test_trivial_partition_is_rejected(partition):
    rho = random_density(DIMS, np.random.default_rng(3))
    with pytest.raises(ValidationError):
        ch.disentangle(rho.matrix, DIMS, partition)


def test_measurement_channel_needs_partition():
    with pytest.raises(ValidationError):
        ch.measurement([])


def test_pipeline_template_validation():
    u = np.eye(8)
    good = ch.build_pipeline(DIMS, u, u, u)
    steps = list(good.steps)
    with pytest.raises(ValidationError, match="template order"):
        ch.MeasurementPipeline(good.spaces, tuple(steps[:2] + [steps[3], steps[2], steps[4]]))
    wrong_cut = steps[:2] + [ch.measurement([ch.FACTOR_A])] + steps[3:]
    with pytest.raises(ValidationError, match="step 3"):
        ch.MeasurementPipeline(good.spaces, tuple(wrong_cut))
    with pytest.raises(ValidationError, match="timestamps"):
        ch.build_pipeline(DIMS, u, u, u, timestamps=(1, 2, 2, 3, 4))


def test_equivalent_cut_spelling_is_accepted():
    u = np.eye(8)
    p = ch.build_pipeline(DIMS, u, u, u)
    steps = list(p.steps)
    steps[2] = ch.measurement([ch.FACTOR_A, ch.FACTOR_M])
    ch.MeasurementPipeline(p.spaces, tuple(steps))


def test_identity_pipeline_on_basis_states_is_constant():
    u = np.eye(8)
    traj = ch.run_pipeline(ch.build_pipeline(DIMS, u, u, u), basis_states())
    for state in traj.states:
        assert np.allclose(state.matrix, traj.initial.matrix, atol=1e-15)


def test_entangling_preparation_then_b_measurement_is_product():
    prep = kron(CNOT, np.eye(2)) @ kron_all([HADAMARD, np.eye(2), np.eye(2)])
    traj = ch.run_pipeline(ch.build_pipeline(DIMS, prep, np.eye(8), np.eye(8)), basis_states())
    after = traj.states[2].matrix
    rho_am = partial_trace(after, DIMS, [0, 2])
    rho_b = partial_trace(after, DIMS, [1])
    # kron(rho_AM, rho_B) is ordered (A, M, B); move B back to the middle
    oracle = permute_factors(kron(rho_am, rho_b), [2, 2, 2], [0, 2, 1])
    assert np.linalg.norm(after - oracle) <= 1e-12
    # the preparation entangled A and B, so the measurement had work to do
    assert ch.product_cut_defect(traj.states[1].matrix, DIMS, [ch.FACTOR_B]) > 0.1


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_random_pipeline_audits(seed):
    traj = ch.run_pipeline(ch.random_pipeline(DIMS, seed), ch.random_initial_states(DIMS, seed + 1))
    assert all(a.trace_defect <= 1e-12 for a in traj.audits)
    assert traj.audits[2].cut_defect <= 1e-10
    assert traj.audits[4].cut_defect <= 1e-10
    assert ch.product_cut_defect(traj.states[4].matrix, DIMS, [ch.FACTOR_A]) <= 1e-10


def test_choi_state_of_identity_is_bell_state():
    out = ch.choi_state(ch.evolution(np.eye(2)), 2)
    assert np.allclose(out.matrix, np.outer(BELL, BELL), atol=1e-15)


def test_choi_state_of_full_disentangling_channel():
    c = ch.Channel(ch.MEASUREMENT, partition=(0,))
    out = ch.choi_state(c, [2])
    # trace-and-replace: the reference and the system both end maximally mixed
    assert np.allclose(out.matrix, np.eye(4) / 4, atol=1e-15)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_choi_states_are_psd(seed):
    p = ch.random_pipeline(DIMS, seed)
    for step in p.steps:
        assert np.linalg.eigvalsh(ch.choi_state(step, DIMS).matrix)[0] >= -1e-10


def test_choi_dimension_mismatch():
    with pytest.raises(ValidationError, match="dimension mismatch"):
        ch.choi_state(ch.evolution(np.eye(4)), 2)


def test_composite_marginal_matches_pipeline():
    traj = ch.run_pipeline(ch.random_pipeline(DIMS, 4), ch.random_initial_states(DIMS, 5))
    total = sum(ch.composite_joint_probability(traj, n, a) for n in range(2) for a in range(2))
    assert total == pytest.approx(1.0, abs=1e-12)
    cmp = ch.compare_with_luders(traj, 0, 0)
    assert 0 <= cmp.pipeline_probability <= 1 and 0 <= cmp.luders_probability <= 1
    assert cmp.difference == pytest.approx(cmp.pipeline_probability - cmp.luders_probability)


def test_unitary_channel_dimension_mismatch():
    rho = random_density(DIMS, np.random.default_rng(6))
    with pytest.raises(ValidationError, match="dimension mismatch"):
        ch.apply_channel(rho, ch.evolution(random_unitary(HilbertSpace(4), np.random.default_rng(7)).matrix))
