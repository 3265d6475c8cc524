import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qprospect.errors import ValidationError
from qprospect.eventlogic import InconclusiveEvent, Prospect
from qprospect.qdt import (
    AttractionSpec,
    ProspectLattice,
    UtilitySpec,
    attraction_from_state,
    attraction_prior,
    combine,
    decay_attraction,
    predict,
    preference_reversal_threshold,
    prisoner_dilemma_scenario,
    rank_descending,
    utility_factors,
)
from qprospect.qstate import DensityOperator, HilbertSpace, product_space, pure_density, random_density

A = HilbertSpace(2)
PLUS = np.array([1, 1]) / np.sqrt(2)
MINUS = np.array([1, -1]) / np.sqrt(2)


def lattice(*pairs):
    return ProspectLattice.from_prospects(
        [Prospect(A, n, InconclusiveEvent.of(b), f"pi{k}") for k, (n, b) in enumerate(pairs)]
    )


def test_utility_factors_examples():
    assert utility_factors(UtilitySpec("nonnegative_utilities", (3, 1))) == [0.75, 0.25]
    assert utility_factors(UtilitySpec("direct_factors", (0.6, 0.4))) == [0.6, 0.4]
    assert utility_factors(UtilitySpec("nonnegative_utilities", (1, 1, 1, 1))) == [0.25] * 4


def test_utility_spec_errors():
    with pytest.raises(ValidationError, match="all zero"):
        UtilitySpec("nonnegative_utilities", (0, 0))
    with pytest.raises(ValidationError, match="sum to 1"):
        UtilitySpec("direct_factors", (0.6, 0.6))


def test_attraction_prior_examples():
    assert attraction_prior(2, (-1, 1)) == [-0.25, 0.25]
    assert attraction_prior(4, (1, 1, -1, -1)) == [0.25, 0.25, -0.25, -0.25]
    # mean |q| = 1/4 and sum q = 0 with group constants c/1 and -c/2, c = 3/8
    assert attraction_prior(3, (1, -1, -1)) == [0.375, -0.1875, -0.1875]


@pytest.mark.parametrize("signs", [(1, 1), (-1, -1, -1)])
def test_attraction_prior_same_signs(signs):
    with pytest.raises(ValidationError, match="alternation law unsatisfiable"):
        attraction_prior(len(signs), signs)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from([-1, 1]), min_size=2, max_size=8).filter(lambda s: len(set(s)) == 2))
def test_quarter_law_prior_properties(signs):
    q = attraction_prior(len(signs), signs)
    assert abs(math.fsum(q)) <= 1e-15
    assert abs(math.fsum(abs(x) for x in q) / len(q) - 0.25) <= 1e-15
    assert all(np.sign(x) == s for x, s in zip(q, signs))


def test_decay_examples():
    q = [-0.25, 0.25]
    assert decay_attraction(q, 0.0, 1.0) == q
    assert all(abs(x) < 1e-20 for x in decay_attraction(q, 50.0, 1.0))
    assert decay_attraction(q, 2.0, 2.0) == pytest.approx([-0.25 / math.e, 0.25 / math.e], abs=1e-16)
    with pytest.raises(ValidationError):
        decay_attraction(q, 1.0, 0.0)


def test_attraction_from_state_examples():
    rng = np.random.default_rng(1)
    diag = DensityOperator.of(np.diag(rng.dirichlet(np.ones(4))), [2, 2])
    sa = attraction_from_state(diag, lattice((0, PLUS), (1, PLUS)))
    assert max(abs(x) for x in sa.q) <= 1e-15
    rho = random_density([2, 2], rng)
    sa = attraction_from_state(rho, lattice((0, [1, 0]), (1, [0, 1j])))
    assert sa.q == (0.0, 0.0)


def test_attraction_from_entangled_state():
    psi = pure_density(np.kron([1, 0], PLUS), product_space([2, 2]))
    sa = attraction_from_state(psi, lattice((0, PLUS), (0, MINUS)))
    assert sa.q == pytest.approx((0.5, -0.5), abs=1e-15)
    assert abs(sa.alternation_defect) <= 1e-15
    assert sum(d.attraction_factor for d in sa.raw) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_state_lattice_laws(da, db, seed):
    rng = np.random.default_rng(seed)
    rho = random_density([da, db], rng)
    prospects = []
    for n in range(da):
        b = rng.standard_normal(db) + 1j * rng.standard_normal(db)
        prospects.append(Prospect(HilbertSpace(da), n, InconclusiveEvent.of(b / np.linalg.norm(b)), f"p{n}"))
    sa = attraction_from_state(rho, ProspectLattice.from_prospects(prospects))
    assert abs(sa.alternation_defect) <= 1e-12
    assert abs(math.fsum(sa.f) - 1) <= 1e-12 and abs(math.fsum(sa.p) - 1) <= 1e-12
    assert all(-1 <= x <= 1 for x in sa.q)


def test_predict_examples():
    labels = ProspectLattice(("a", "b"))
    util = UtilitySpec("direct_factors", (0.6, 0.4))
    rep = predict(labels, util, AttractionSpec("quarter_law_prior", signs=(-1, 1)))
    assert rep.p == pytest.approx((0.35, 0.65), abs=1e-12)
    rep = predict(labels, util, AttractionSpec("explicit", magnitudes=(0.0, 0.0)))
    assert rep.p == (0.6, 0.4)
    rep = predict(labels, util, AttractionSpec("quarter_law_prior", signs=(-1, 1), mu=math.log(5)))
    # exp(-ln 5) = 0.2 shrinks q to -+0.05
    assert rep.p == pytest.approx((0.55, 0.45), abs=1e-12)


def test_predict_rejects_incompatible_prior():
    labels = ProspectLattice(("a", "b"))
    with pytest.raises(ValidationError, match="prior incompatible with utilities"):
        predict(labels, UtilitySpec("direct_factors", (0.9, 0.1)), AttractionSpec("quarter_law_prior", signs=(1, -1)))


def test_combine_validates_laws():
    with pytest.raises(ValidationError, match="alternation"):
        combine(["a", "b"], [0.5, 0.5], [0.1, 0.1])
    with pytest.raises(ValidationError, match="sum to 1"):
        combine(["a", "b"], [0.5, 0.6], [0.1, -0.1])


def test_rank_descending_breaks_ties_by_index():
    assert rank_descending([0.2, 0.5, 0.2]) == [2, 1, 3]


def test_reversal_threshold_examples():
    assert preference_reversal_threshold((0.6, 0.4), (-0.25, 0.25), 1.0) == pytest.approx(math.log(2.5), abs=1e-12)
    assert preference_reversal_threshold((0.5, 0.5), (-0.25, 0.25), 1.0) is None
    assert preference_reversal_threshold((0.6, 0.4), (0.25, -0.25), 1.0) is None
    with pytest.raises(ValidationError, match="degenerate attraction"):
        preference_reversal_threshold((0.6, 0.4), (0.1, 0.1), 1.0)


def test_orderings_flip_past_threshold():
    mu_star = preference_reversal_threshold((0.6, 0.4), (-0.25, 0.25), 1.0)
    scenario = prisoner_dilemma_scenario()
    before = scenario.with_information(0.9 * mu_star).predict()
    after = scenario.with_information(1.1 * mu_star).predict()
    assert before.ordering("p")[0].startswith("D1")
    assert after.ordering("p")[0].startswith("C1")


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.floats(0.1, 5.0), st.integers(0, 2**32 - 1))
def test_large_information_recovers_utility_ordering(size, mu_c, seed):
    rng = np.random.default_rng(seed)
    f = list(rng.dirichlet(np.ones(size)))
    f[-1] = 1 - math.fsum(f[:-1])
    signs = [1] + [-1] * (size - 1)
    q = decay_attraction(attraction_prior(size, signs), 50 * mu_c, mu_c)
    assert rank_descending([a + b for a, b in zip(f, q)]) == rank_descending(f)


def test_prisoner_dilemma_scenario():
    rep = prisoner_dilemma_scenario().predict()
    assert rep.f == (0.6, 0.4)
    assert rep.p == pytest.approx((0.35, 0.65), abs=1e-12)
    assert rep.max_empirical_deviation == pytest.approx(0.02, abs=1e-12)
    assert rep.ordering("f") != rep.ordering("p")


def test_lattice_validation():
    with pytest.raises(ValidationError):
        ProspectLattice(("only",))
    with pytest.raises(ValidationError, match="unique"):
        ProspectLattice(("a", "a"))
