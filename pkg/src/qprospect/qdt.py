"""Decision-theory layer: prospect lattices and their predicted probabilities.

A prediction combines a utility factor ``f`` (the classical part, summing to
one over the lattice) with an attraction factor ``q`` (the interference part,
summing to zero) into ``p = f + q * exp(-mu / mu_c)``.  Attraction factors
come from the quarter-law prior, from a quantum state, or are given
explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .eventlogic import InconclusiveEvent, Prospect, prospect_operator, resolution_of_unity_check
from .numkernel import DEFAULT_TOL, Tolerance
from .probability import ProbabilityDecomposition, prospect_probability
from .qstate import DensityOperator, HilbertSpace

QUARTER = 0.25


@dataclass(frozen=True, eq=False)
class ProspectLattice:
    """Ordered, uniquely labeled set of N >= 2 prospects.

    ``prospects`` may be empty when only abstract labels are needed.
    """

    labels: tuple[str, ...]
    prospects: tuple[Prospect, ...] = ()

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(labels) < 2:
            raise ValidationError("a prospect lattice needs at least two prospects")
        if len(set(labels)) != len(labels):
            raise ValidationError("prospect labels must be unique")
        prospects = tuple(self.prospects)
        if prospects and len(prospects) != len(labels):
            raise ValidationError(f"{len(prospects)} prospects for {len(labels)} labels")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "prospects", prospects)

    @classmethod
    def from_prospects(cls, prospects: Sequence[Prospect]) -> "ProspectLattice":
        return cls(tuple(p.label for p in prospects), tuple(prospects))

    def __len__(self) -> int:
        return len(self.labels)


UTILITY_MODES = ("direct_factors", "nonnegative_utilities")
ATTRACTION_MODES = ("quarter_law_prior", "from_quantum_state", "explicit")


@dataclass(frozen=True)
class UtilitySpec:
    mode: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.mode not in UTILITY_MODES:
            raise ValidationError(f"unknown utility mode {self.mode!r}")
        vals = tuple(float(v) for v in self.values)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("utility values must be finite")
        if self.mode == "direct_factors":
            if any(v < 0 or v > 1 for v in vals):
                raise ValidationError("utility factors must lie in [0, 1]")
            if abs(math.fsum(vals) - 1.0) > DEFAULT_TOL.eps_equality:
                raise ValidationError(f"utility factors must sum to 1, got {math.fsum(vals)!r}")
        else:
            if any(v < 0 for v in vals):
                raise ValidationError("utilities must be nonnegative")
            if not any(v > 0 for v in vals):
                raise ValidationError("utilities are all zero")
        object.__setattr__(self, "values", vals)


def utility_factors(spec: UtilitySpec) -> list[float]:
    """Utility factors: direct values, or utilities normalized by their sum."""
    if spec.mode == "direct_factors":
        return list(spec.values)
    total = math.fsum(spec.values)
    if total <= 0:
        raise ValidationError("utilities are all zero")
    return [v / total for v in spec.values]


@dataclass(frozen=True)
class AttractionSpec:
    """Where attraction factors come from, plus the information parameters.

    ``mu`` is the amount of received information and ``mu_c`` the critical
    amount after which attraction has largely decayed.
    """

    mode: str
    signs: tuple[int, ...] | None = None
    magnitudes: tuple[float, ...] | None = None
    mu: float = 0.0
    mu_c: float = 1.0

    def __post_init__(self):
        if self.mode not in ATTRACTION_MODES:
            raise ValidationError(f"unknown attraction mode {self.mode!r}")
        if not (math.isfinite(self.mu) and self.mu >= 0):
            raise ValidationError("mu must be a nonnegative number")
        if not (math.isfinite(self.mu_c) and self.mu_c > 0):
            raise ValidationError("mu_c must be positive")
        if self.signs is not None:
            signs = tuple(int(s) for s in self.signs)
            if any(s not in (-1, 1) for s in signs):
                raise ValidationError("signs must be +1 or -1")
            object.__setattr__(self, "signs", signs)
        if self.magnitudes is not None:
            object.__setattr__(self, "magnitudes", tuple(float(m) for m in self.magnitudes))
        if self.mode == "quarter_law_prior" and self.signs is None:
            raise ValidationError("quarter-law prior needs one sign per prospect")
        if self.mode == "explicit" and self.magnitudes is None:
            raise ValidationError("explicit attraction needs values in 'magnitudes'")


def attraction_prior(n_prospects: int, signs: Sequence[int]) -> list[float]:
    """Quarter-law prior attraction factors with the given signs.

    The positive group shares a total of ``+c`` and the negative group
    ``-c``, uniformly within each group, with ``c = N/8`` so that the mean
    absolute value is exactly 1/4 and the factors sum to zero.
    """
    signs = [int(s) for s in signs]
    if len(signs) != n_prospects:
        raise ValidationError(f"{len(signs)} signs for {n_prospects} prospects")
    if any(s not in (-1, 1) for s in signs):
        raise ValidationError("signs must be +1 or -1")
    n_pos = signs.count(1)
    n_neg = signs.count(-1)
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("alternation law unsatisfiable: prior needs both signs")
    c = QUARTER * n_prospects / 2.0
    q = [c / n_pos if s > 0 else -c / n_neg for s in signs]
    if max(abs(x) for x in q) > 1.0:
        raise ValidationError(f"quarter-law prior exceeds |q| <= 1 (group share {max(abs(x) for x in q):g})")
    return q


def decay_attraction(q: Sequence[float], mu: float, mu_c: float) -> list[float]:
    """Scale attraction factors by ``exp(-mu / mu_c)``."""
    if not mu_c > 0:
        raise ValidationError("mu_c must be positive")
    if mu < 0:
        raise ValidationError("mu must be nonnegative")
    factor = math.exp(-mu / mu_c)
    return [x * factor for x in q]


@dataclass(frozen=True)
class StateAttraction:
    """Lattice factors derived from a quantum state.

    ``raw`` holds the unnormalized decompositions.  ``f`` and ``p`` are the
    raw utility factors and totals each divided by their lattice sums, and
    ``q = p - f``, so both normalizations and the alternation law hold.
    """

    q: tuple[float, ...]
    f: tuple[float, ...]
    p: tuple[float, ...]
    raw: tuple[ProbabilityDecomposition, ...]
    raw_total: float
    raw_utility_total: float
    raw_alternation_defect: float
    alternation_defect: float
    unity_defect: float


def attraction_from_state(rho_ab: DensityOperator, lattice: ProspectLattice,
                          tol: Tolerance = DEFAULT_TOL) -> StateAttraction:
    """Attraction factors of every lattice prospect in the state ``rho_ab``."""
    if not lattice.prospects:
        raise ValidationError("lattice has no quantum prospects")
    raw = tuple(prospect_probability(rho_ab, pi) for pi in lattice.prospects)
    p_sum = math.fsum(d.total for d in raw)
    f_sum = math.fsum(d.utility_factor for d in raw)
    if p_sum <= tol.eps_equality or f_sum <= tol.eps_equality:
        raise ValidationError(f"null lattice: sum p = {p_sum:.3e}, sum f = {f_sum:.3e}")
    p = [d.total / p_sum for d in raw]
    f = [d.utility_factor / f_sum for d in raw]
    q = [pn - fn for pn, fn in zip(p, f)]
    unity = resolution_of_unity_check(
        [prospect_operator(pi, check_norm=False, tol=tol) for pi in lattice.prospects], tol
    )
    return StateAttraction(
        q=tuple(q), f=tuple(f), p=tuple(p), raw=raw,
        raw_total=p_sum, raw_utility_total=f_sum,
        raw_alternation_defect=math.fsum(d.attraction_factor for d in raw),
        alternation_defect=math.fsum(q),
        unity_defect=unity.defect,
    )


# -- predictions --------------------------------------------------------------

@dataclass(frozen=True)
class PredictionRow:
    label: str
    f: float
    q: float
    p: float
    rank_p: int
    rank_f: int
    rank_q: int


@dataclass(frozen=True)
class PredictionReport:
    rows: tuple[PredictionRow, ...]
    mu: float
    mu_c: float
    diagnostics: dict = field(default_factory=dict)
    empirical: tuple[float, ...] | None = None

    @property
    def p(self) -> tuple[float, ...]:
        return tuple(r.p for r in self.rows)

    @property
    def f(self) -> tuple[float, ...]:
        return tuple(r.f for r in self.rows)

    @property
    def q(self) -> tuple[float, ...]:
        return tuple(r.q for r in self.rows)

    def ordering(self, key: str) -> list[str]:
        """Labels from most to least useful (``f``), attractive (``q``) or preferable (``p``)."""
        attr = {"f": "rank_f", "q": "rank_q", "p": "rank_p"}[key]
        return [r.label for r in sorted(self.rows, key=lambda r: getattr(r, attr))]

    @property
    def max_empirical_deviation(self) -> float | None:
        if self.empirical is None:
            return None
        return max(abs(a - b) for a, b in zip(self.p, self.empirical))


def rank_descending(values: Sequence[float]) -> list[int]:
    """1-based ranks, largest value first, ties broken by index."""
    order = sorted(range(len(values)), key=lambda i: (-values[i], i))
    ranks = [0] * len(values)
    for r, i in enumerate(order, start=1):
        ranks[i] = r
    return ranks


def combine(labels: Sequence[str], f: Sequence[float], q: Sequence[float], mu: float = 0.0,
            mu_c: float = 1.0, empirical: Sequence[float] | None = None,
            diagnostics: dict | None = None, tol: Tolerance = DEFAULT_TOL) -> PredictionReport:
    """Validate factors and assemble ``p = f + q exp(-mu/mu_c)`` into a report."""
    n = len(labels)
    if len(f) != n or len(q) != n:
        raise ValidationError("labels, utility factors and attraction factors differ in length")
    if abs(math.fsum(f) - 1.0) > tol.eps_equality:
        raise ValidationError(f"utility factors must sum to 1, got {math.fsum(f)!r}")
    if abs(math.fsum(q)) > tol.eps_equality:
        raise ValidationError(f"attraction factors violate the alternation law: sum q = {math.fsum(q)!r}")
    if any(abs(x) > 1.0 for x in q):
        raise ValidationError("attraction factors must lie in [-1, 1]")
    qd = decay_attraction(q, mu, mu_c)
    p = [fn + qn for fn, qn in zip(f, qd)]
    bad = [(labels[i], p[i]) for i in range(n) if p[i] < -tol.eps_equality or p[i] > 1 + tol.eps_equality]
    if bad:
        raise ValidationError(f"prior incompatible with utilities: combined probabilities {bad}")
    rf, rq, rp = rank_descending(f), rank_descending(qd), rank_descending(p)
    rows = tuple(PredictionRow(labels[i], f[i], qd[i], p[i], rp[i], rf[i], rq[i]) for i in range(n))
    diag = {"normalization_defect": abs(math.fsum(p) - 1.0),
            "alternation_defect": abs(math.fsum(qd)),
            "decay_factor": math.exp(-mu / mu_c)}
    diag.update(diagnostics or {})
    if empirical is not None:
        empirical = tuple(float(x) for x in empirical)
        if len(empirical) != n:
            raise ValidationError(f"{len(empirical)} empirical values for {n} prospects")
    return PredictionReport(rows, mu, mu_c, diag, empirical)


def predict(lattice: ProspectLattice, utility: UtilitySpec | None, attraction: AttractionSpec,
            rho_ab: DensityOperator | None = None, empirical: Sequence[float] | None = None,
            tol: Tolerance = DEFAULT_TOL) -> PredictionReport:
    """Predicted prospect probabilities for a lattice.

    In ``from_quantum_state`` mode the attraction factors come from ``rho_ab``
    and the utility factors do too unless ``utility`` is given.
    """
    n = len(lattice)
    diagnostics: dict = {}
    f = utility_factors(utility) if utility is not None else None
    if attraction.mode == "quarter_law_prior":
        q = attraction_prior(n, attraction.signs)
    elif attraction.mode == "explicit":
        q = list(attraction.magnitudes)
        if len(q) != n:
            raise ValidationError(f"{len(q)} attraction values for {n} prospects")
    else:
        if rho_ab is None:
            raise ValidationError("from_quantum_state attraction needs a density operator")
        sa = attraction_from_state(rho_ab, lattice, tol)
        q = list(sa.q)
        if f is None:
            f = list(sa.f)
        diagnostics.update({
            "raw_probability_sum": sa.raw_total,
            "raw_utility_sum": sa.raw_utility_total,
            "raw_alternation_defect": sa.raw_alternation_defect,
            "unity_defect": sa.unity_defect,
        })
    if f is None:
        raise ValidationError(f"attraction mode {attraction.mode!r} needs a utility spec")
    if len(f) != n:
        raise ValidationError(f"{len(f)} utility factors for {n} prospects")
    return combine(lattice.labels, f, q, attraction.mu, attraction.mu_c, empirical, diagnostics, tol)


def preference_reversal_threshold(f: Sequence[float], q: Sequence[float], mu_c: float) -> float | None:
    """Information amount at which the preferred prospect of a pair switches.

    Solves ``f1 + q1 e^{-mu/mu_c} = f2 + q2 e^{-mu/mu_c}`` for ``mu > 0``.
    Returns ``None`` when the orderings by ``p`` at ``mu = 0`` and by ``f``
    already agree, or no positive crossing exists.
    """
    if len(f) != 2 or len(q) != 2:
        raise ValidationError("preference reversal is defined for two prospects")
    if not mu_c > 0:
        raise ValidationError("mu_c must be positive")
    f1, f2 = (float(x) for x in f)
    q1, q2 = (float(x) for x in q)
    if q1 == q2:
        raise ValidationError("degenerate attraction: q1 == q2")
    df = f1 - f2
    if df == 0:
        return None
    ratio = (q2 - q1) / df
    if ratio <= 1.0:
        return None
    return mu_c * math.log(ratio)


# -- builtin scenario -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    lattice: ProspectLattice
    utility: UtilitySpec
    attraction: AttractionSpec
    empirical: tuple[float, ...] | None = None

    def with_information(self, mu: float, mu_c: float | None = None) -> "Scenario":
        a = self.attraction
        spec = AttractionSpec(a.mode, a.signs, a.magnitudes, float(mu), float(mu_c if mu_c is not None else a.mu_c))
        return Scenario(self.name, self.lattice, self.utility, spec, self.empirical)

    def predict(self, rho_ab: DensityOperator | None = None, tol: Tolerance = DEFAULT_TOL) -> PredictionReport:
        return predict(self.lattice, self.utility, self.attraction, rho_ab, self.empirical, tol)


def prisoner_dilemma_scenario(mu: float = 0.0, mu_c: float = 1.0) -> Scenario:
    """Cooperate or defect without knowing the other prisoner's choice.

    Utility factors (0.60, 0.40), prior attraction signs (-, +) and the
    observed choice frequencies (0.37, 0.63).
    """
    own = HilbertSpace(2, ("C1", "D1"))
    other = HilbertSpace(2, ("C2", "D2"))
    unsure = InconclusiveEvent(other, np.array([1.0, 1.0]) / np.sqrt(2))
    prospects = (
        Prospect(own, 0, unsure, "C1 x {C2,D2}"),
        Prospect(own, 1, unsure, "D1 x {C2,D2}"),
    )
    return Scenario(
        name="prisoner-dilemma",
        lattice=ProspectLattice.from_prospects(prospects),
        utility=UtilitySpec("direct_factors", (0.60, 0.40)),
        attraction=AttractionSpec("quarter_law_prior", signs=(-1, 1), mu=mu, mu_c=mu_c),
        empirical=(0.37, 0.63),
    )


BUILTINS = {"prisoner-dilemma": prisoner_dilemma_scenario}
