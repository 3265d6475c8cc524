import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qprospect.errors import ValidationError
from qprospect.eventlogic import (
    EventOperator,
    InconclusiveEvent,
    Prospect,
    identity_event,
    projector,
    vector_projector,
)
from qprospect.numkernel import kron
from qprospect.probability import (
    SequentialPair,
    clamp_probability,
    conditional_probability,
    conditional_under_uncertainty,
    conditional_under_uncertainty_terms,
    event_probability,
    joint_probability,
    kirkwood_form,
    luders_probability,
    luders_state,
    marginal_probability,
    prospect_probability,
    prospect_trace,
    wigner_probability,
)
from qprospect.qstate import DensityOperator, HilbertSpace, product_space, pure_density, random_density

Q = HilbertSpace(2)
Z_PLUS = projector(Q, [0])
Z_MINUS = projector(Q, [1])
X_PLUS = vector_projector(Q, np.array([1, 1]) / np.sqrt(2))
MIXED = DensityOperator.of(np.eye(2) / 2)
UP = pure_density([1, 0])
BELL = pure_density(np.array([1, 0, 0, 1]) / np.sqrt(2), product_space([2, 2]))
PLUS = np.array([1, 1]) / np.sqrt(2)
PSI = pure_density(np.kron([1, 0], PLUS), product_space([2, 2]))


def test_event_probability_examples():
    assert event_probability(MIXED, Z_PLUS) == pytest.approx(0.5, abs=1e-15)
    assert event_probability(UP, Z_PLUS) == pytest.approx(1.0, abs=1e-15)
    # |<0|x+>|^2
    assert event_probability(UP, X_PLUS) == pytest.approx(abs(PLUS[0]) ** 2, abs=1e-15)


def test_event_probability_dimension_mismatch():
    with pytest.raises(ValidationError):
        event_probability(BELL, Z_PLUS)


def test_luders_state_examples():
    assert np.allclose(luders_state(MIXED, Z_PLUS).matrix, Z_PLUS.matrix)
    assert np.allclose(luders_state(UP, Z_PLUS).matrix, UP.matrix)
    half = DensityOperator.of(np.full((2, 2), 0.5))
    # P rho P = [[1/2, 0], [0, 0]], divided by 1/2
    assert np.allclose(luders_state(half, Z_PLUS).matrix, [[1, 0], [0, 0]])


def test_luders_state_null_event():
    with pytest.raises(ValidationError, match="conditioning on null event"):
        luders_state(UP, Z_MINUS)


def test_luders_mutually_unbiased_bases():
    rho = random_density(2, np.random.default_rng(1))
    for first in (Z_PLUS, Z_MINUS):
        assert luders_probability(SequentialPair(rho, first, X_PLUS)) == pytest.approx(0.5, abs=1e-12)


def test_luders_commuting_events():
    rho = random_density(3, np.random.default_rng(2))
    sp = HilbertSpace(3)
    for a in range(3):
        for n in range(3):
            val = luders_probability(SequentialPair(rho, projector(sp, [a]), projector(sp, [n])))
            assert abs(val - (a == n)) <= 1e-15


def test_luders_degenerate_first_event_trace_oracle():
    rng = np.random.default_rng(3)
    sp = HilbertSpace(3)
    rho = random_density(sp, rng)
    first = projector(sp, [0, 1])
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    second = vector_projector(sp, v)
    pa, pn, r = first.matrix, second.matrix, rho.matrix
    oracle = np.trace(r @ pa @ pn @ pa).real / np.trace(r @ pa).real
    assert luders_probability(SequentialPair(rho, first, second)) == pytest.approx(oracle, abs=1e-13)


def test_wigner_examples():
    assert wigner_probability(SequentialPair(MIXED, Z_PLUS, X_PLUS)) == pytest.approx(0.25, abs=1e-15)
    rho = DensityOperator.of(np.diag([0.3, 0.7]))
    assert wigner_probability(SequentialPair(rho, Z_MINUS, Z_MINUS)) == pytest.approx(0.7, abs=1e-15)


def test_kirkwood_form():
    rho = DensityOperator.of(np.diag([0.3, 0.7]))
    val = kirkwood_form(rho, Z_PLUS, Z_PLUS)
    assert val.imag == 0 and val.real == pytest.approx(0.3)
    up_x = kirkwood_form(UP, Z_PLUS, X_PLUS)
    # Tr(|0><0| |0><0| |+><+|) = <0|+><+|0>
    assert up_x == pytest.approx(PLUS[0] * PLUS[0])
    ry = DensityOperator.of(np.array([[0.5, -0.5j], [0.5j, 0.5]]))
    assert abs(kirkwood_form(ry, Z_PLUS, X_PLUS).imag) > 0.1


def test_joint_probability_examples():
    up_up = pure_density([1, 0, 0, 0], product_space([2, 2]))
    assert joint_probability(up_up, Z_PLUS, Z_PLUS) == pytest.approx(1.0)
    assert joint_probability(BELL, Z_PLUS, Z_PLUS) == pytest.approx(0.5, abs=1e-15)
    assert joint_probability(BELL, Z_PLUS, Z_MINUS) == pytest.approx(0.0, abs=1e-15)


def test_joint_probability_factorization_mismatch():
    sp3 = HilbertSpace(3)
    with pytest.raises(ValidationError, match="factorization mismatch"):
        joint_probability(BELL, projector(sp3, [0]), Z_PLUS)


def test_marginal_probability_examples():
    for which in ("A", "B"):
        assert marginal_probability(BELL, Z_PLUS, which) == pytest.approx(0.5, abs=1e-15)
        assert marginal_probability(BELL, identity_event(Q), which) == pytest.approx(1.0, abs=1e-15)
    rng = np.random.default_rng(4)
    ra, rb = random_density(2, rng), random_density(3, rng)
    prod = DensityOperator.of(kron(ra.matrix, rb.matrix), [2, 3])
    assert marginal_probability(prod, Z_PLUS, "A") == pytest.approx(event_probability(ra, Z_PLUS), abs=1e-14)


def test_conditional_probability_examples():
    assert conditional_probability(BELL, Z_PLUS, Z_PLUS) == pytest.approx(1.0, abs=1e-14)
    rng = np.random.default_rng(5)
    ra, rb = random_density(2, rng), random_density(2, rng)
    prod = DensityOperator.of(kron(ra.matrix, rb.matrix), [2, 2])
    assert conditional_probability(prod, Z_PLUS, X_PLUS) == pytest.approx(event_probability(ra, Z_PLUS), abs=1e-14)


def test_conditional_probability_is_not_symmetric():
    rho = random_density([2, 2], np.random.default_rng(6))
    p_ab = conditional_probability(rho, Z_PLUS, X_PLUS)
    # swap the roles: condition on A, ask for B
    p_ba = joint_probability(rho, Z_PLUS, X_PLUS) / marginal_probability(rho, Z_PLUS, "A")
    assert abs(p_ab - p_ba) > 1e-3


def test_conditional_probability_null_event():
    up_up = pure_density([1, 0, 0, 0], product_space([2, 2]))
    with pytest.raises(ValidationError, match="conditioning on null event"):
        conditional_probability(up_up, Z_PLUS, Z_MINUS)


def prospect(n, b, da=2):
    return Prospect(HilbertSpace(da), n, InconclusiveEvent.of(b))


def test_prospect_probability_examples():
    d = prospect_probability(PSI, prospect(0, PLUS))
    assert (d.p, d.f, d.q) == pytest.approx((1.0, 0.5, 0.5), abs=1e-15)
    d = prospect_probability(BELL, prospect(0, PLUS))
    assert (d.p, d.f, d.q) == pytest.approx((0.25, 0.25, 0.0), abs=1e-15)
    diag = DensityOperator.of(np.diag([0.1, 0.2, 0.3, 0.4]), [2, 2])
    assert prospect_probability(diag, prospect(1, PLUS)).q == 0.0


def test_prospect_probability_factorization_mismatch():
    with pytest.raises(ValidationError, match="factorization mismatch"):
        prospect_probability(BELL, prospect(0, [1, 0, 0]))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_prospect_total_matches_full_trace(da, db, seed):
    rng = np.random.default_rng(seed)
    rho = random_density([da, db], rng)
    b = rng.standard_normal(db) + 1j * rng.standard_normal(db)
    pi = prospect(int(rng.integers(0, da)), b / np.linalg.norm(b), da)
    d = prospect_probability(rho, pi)
    assert abs(d.p - prospect_trace(rho, pi)) <= 1e-13
    assert d.p == d.f + d.q
    assert -1 <= d.q <= 1


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_single_amplitude_prospect_has_no_attraction(da, db, seed):
    rng = np.random.default_rng(seed)
    rho = random_density([da, db], rng)
    b = np.zeros(db, dtype=complex)
    b[int(rng.integers(0, db))] = np.exp(1j * rng.uniform(0, 2 * np.pi))
    assert prospect_probability(rho, prospect(int(rng.integers(0, da)), b, da)).q == 0.0


def test_conditional_under_uncertainty_examples():
    assert conditional_under_uncertainty(PSI, prospect(0, PLUS)) == pytest.approx(1.0, abs=1e-14)
    rho = random_density([2, 2], np.random.default_rng(7))
    single = conditional_under_uncertainty(rho, prospect(1, [0, 1]))
    assert single == pytest.approx(conditional_probability(rho, Z_MINUS, Z_MINUS), abs=1e-14)


def test_conditional_under_uncertainty_diagonal_state():
    w = np.array([0.1, 0.2, 0.3, 0.4])
    rho = DensityOperator.of(np.diag(w), [2, 2])
    b = np.array([0.6, 0.8])
    terms = conditional_under_uncertainty_terms(rho, prospect(0, b))
    weights = np.abs(b) ** 2
    num = weights @ w[:2]
    den = weights @ (w[:2] + w[2:])
    assert terms.value == pytest.approx(num / den, abs=1e-15)
    assert terms.numerator.q == 0.0 and terms.denominator.q == 0.0


def test_conditional_under_uncertainty_null_denominator():
    up_up = pure_density([1, 0, 0, 0], product_space([2, 2]))
    with pytest.raises(ValidationError, match="conditioning on null event"):
        conditional_under_uncertainty(up_up, prospect(0, [0, 1]))


def test_sequential_pair_dimension_check():
    with pytest.raises(ValidationError):
        SequentialPair(MIXED, Z_PLUS, EventOperator(HilbertSpace(3), np.eye(3)))


def test_clamp_probability_keeps_raw_only_when_it_moved():
    assert clamp_probability(-5e-17) == (0.0, {})
    assert clamp_probability(0.4) == (0.4, {})
    value, diag = clamp_probability(1.0 + 1e-9)
    assert value == 1.0 and diag == {"raw": 1.0 + 1e-9}
