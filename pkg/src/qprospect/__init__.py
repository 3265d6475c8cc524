"""Quantum probabilities of composite and inconclusive events, measurement
channels, and quantum decision theory predictions."""

from .errors import NumericalInvariantError, QProspectError, ValidationError
from .eventlogic import (
    EventOperator,
    InconclusiveEvent,
    Prospect,
    inconclusive_operator,
    is_separable,
    join,
    lift_degeneracy,
    meet,
    projector,
    prospect_operator,
    resolution_of_unity_check,
)
from .numkernel import DEFAULT_TOL, Tolerance, eig_hermitian, kron, partial_trace, range_basis
from .probability import (
    ProbabilityDecomposition,
    SequentialPair,
    conditional_probability,
    conditional_under_uncertainty,
    event_probability,
    joint_probability,
    luders_probability,
    luders_state,
    marginal_probability,
    prospect_probability,
    wigner_probability,
)
from .qdt import (
    AttractionSpec,
    ProspectLattice,
    UtilitySpec,
    attraction_from_state,
    attraction_prior,
    decay_attraction,
    predict,
    preference_reversal_threshold,
    prisoner_dilemma_scenario,
    utility_factors,
)
from .qstate import DensityOperator, HilbertSpace, StateVector, UnitaryOperator, dephase, evolve, pure_density

__version__ = "0.1.0"

__all__ = [
    "attraction_from_state",
    "attraction_prior",
    "AttractionSpec",
    "conditional_probability",
    "conditional_under_uncertainty",
    "decay_attraction",
    "DEFAULT_TOL",
    "DensityOperator",
    "dephase",
    "eig_hermitian",
    "event_probability",
    "EventOperator",
    "evolve",
    "HilbertSpace",
    "inconclusive_operator",
    "InconclusiveEvent",
    "is_separable",
    "join",
    "joint_probability",
    "kron",
    "lift_degeneracy",
    "luders_probability",
    "luders_state",
    "marginal_probability",
    "meet",
    "NumericalInvariantError",
    "partial_trace",
    "predict",
    "preference_reversal_threshold",
    "prisoner_dilemma_scenario",
    "ProbabilityDecomposition",
    "projector",
    "Prospect",
    "prospect_operator",
    "prospect_probability",
    "ProspectLattice",
    "pure_density",
    "QProspectError",
    "range_basis",
    "resolution_of_unity_check",
    "SequentialPair",
    "StateVector",
    "Tolerance",
    "UnitaryOperator",
    "utility_factors",
    "UtilitySpec",
    "ValidationError",
    "wigner_probability",
]
