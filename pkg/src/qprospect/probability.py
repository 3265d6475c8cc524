"""Probability functionals over density operators and event operators.

Elementary trace-rule probabilities, the Lüders/Wigner sequential forms and the
Kirkwood quasi-probability, joint/marginal/conditional probabilities on a
bipartite space, and prospect probabilities split into utility and attraction
factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .eventlogic import EventOperator, Prospect, prospect_operator
from .numkernel import DEFAULT_TOL, Tolerance, as_square, dagger, kron, partial_trace
from .qstate import DensityOperator

CLAMP_REPORT_THRESHOLD = 1e-12


def _op(x) -> np.ndarray:
    return x.matrix if isinstance(x, (EventOperator, DensityOperator)) else as_square(x, "operator")


def clamp_probability(raw: float) -> tuple[float, dict]:
    """Clamp to [0, 1]; the raw value is kept in the diagnostics when it moved."""
    clamped = min(1.0, max(0.0, float(raw)))
    diag = {"raw": float(raw)} if abs(raw - clamped) > CLAMP_REPORT_THRESHOLD else {}
    return clamped, diag


def _same_space(rho: DensityOperator, m: np.ndarray) -> None:
    if m.shape[0] != rho.space.dimension:
        raise ValidationError(f"dimension mismatch: state {rho.space.dimension}, event {m.shape[0]}")


def event_probability(rho: DensityOperator, p) -> float:
    """Trace rule ``Tr(rho P)``; returned unclamped."""
    m = _op(p)
    _same_space(rho, m)
    return float(np.real(np.einsum("ij,ji->", rho.matrix, m)))


def luders_state(rho: DensityOperator, p_alpha, tol: Tolerance = DEFAULT_TOL) -> DensityOperator:
    """State after observing ``p_alpha``: ``P rho P / Tr(rho P)``."""
    m = _op(p_alpha)
    _same_space(rho, m)
    norm = event_probability(rho, m)
    if norm <= tol.eps_equality:
        raise ValidationError(f"conditioning on null event: Tr(rho P) = {norm:.3e}")
    out = m @ rho.matrix @ m / norm
    return DensityOperator(rho.space, 0.5 * (out + dagger(out)), rho.tol)


@dataclass(frozen=True, eq=False)
class SequentialPair:
    """State plus two events measured in order: ``first_event`` then ``second_event``.

    In the notation ``p(A_n | B_alpha)`` the first event is ``B_alpha``.
    """

    rho: DensityOperator
    first_event: EventOperator
    second_event: EventOperator

    def __post_init__(self):
        for ev in (self.first_event, self.second_event):
            if not ev.is_projector:
                raise ValidationError("sequential events must be projectors")
            _same_space(self.rho, ev.matrix)

    def swapped(self) -> "SequentialPair":
        return SequentialPair(self.rho, self.second_event, self.first_event)


def wigner_probability(pair: SequentialPair) -> float:
    """``Tr(rho P_alpha P_n P_alpha)``."""
    pa = pair.first_event.matrix
    pn = pair.second_event.matrix
    return float(np.real(np.trace(pair.rho.matrix @ pa @ pn @ pa)))


def luders_probability(pair: SequentialPair, tol: Tolerance = DEFAULT_TOL) -> float:
    """Transition probability ``Tr(rho P_alpha P_n P_alpha) / Tr(rho P_alpha)``."""
    denom = event_probability(pair.rho, pair.first_event)
    if denom <= tol.eps_equality:
        raise ValidationError(f"conditioning on null event: Tr(rho P) = {denom:.3e}")
    return wigner_probability(pair) / denom


def kirkwood_form(rho: DensityOperator, p_n, p_alpha) -> complex:
    """Complex quasi-probability ``Tr(rho P_n P_alpha)``."""
    a, b = _op(p_n), _op(p_alpha)
    _same_space(rho, a)
    _same_space(rho, b)
    return complex(np.trace(rho.matrix @ a @ b))


# -- bipartite probabilities --------------------------------------------------

def _bipartite_dims(rho_ab: DensityOperator, d_a: int | None = None, d_b: int | None = None) -> tuple[int, int]:
    n = rho_ab.space.dimension
    if d_a is not None and d_b is not None:
        if d_a * d_b != n:
            raise ValidationError(f"factorization mismatch: {d_a} x {d_b} != {n}")
        return d_a, d_b
    factors = rho_ab.space.factors
    if d_a is None and d_b is None:
        if len(factors) != 2:
            raise ValidationError(f"factorization mismatch: state has factors {factors}, need two")
        return factors
    if d_a is not None:
        if n % d_a:
            raise ValidationError(f"factorization mismatch: {d_a} does not divide {n}")
        return d_a, n // d_a
    if n % d_b:
        raise ValidationError(f"factorization mismatch: {d_b} does not divide {n}")
    return n // d_b, d_b


def joint_probability(rho_ab: DensityOperator, p_a, p_b) -> float:
    """``Tr(rho_AB  P_A (x) P_B)``."""
    a, b = _op(p_a), _op(p_b)
    _bipartite_dims(rho_ab, a.shape[0], b.shape[0])
    return event_probability(rho_ab, kron(a, b))


def marginal_probability(rho_ab: DensityOperator, event, which: str | int,
                         dims: Sequence[int] | None = None) -> float:
    """Probability of ``event`` on factor ``"A"``/``0`` or ``"B"``/``1``."""
    m = _op(event)
    which = {"A": 0, "B": 1, "a": 0, "b": 1}.get(which, which)
    if which not in (0, 1):
        raise ValidationError(f"which must name factor A or B, got {which!r}")
    if dims is None:
        dims = _bipartite_dims(rho_ab, m.shape[0], None) if which == 0 else _bipartite_dims(rho_ab, None, m.shape[0])
    d_a, d_b = _bipartite_dims(rho_ab, *dims)
    if m.shape[0] != (d_a, d_b)[which]:
        raise ValidationError("factorization mismatch: event does not match the chosen factor")
    reduced = partial_trace(rho_ab.matrix, [d_a, d_b], [which])
    return float(np.real(np.einsum("ij,ji->", reduced, m)))


def conditional_probability(rho_ab: DensityOperator, p_a, p_b, tol: Tolerance = DEFAULT_TOL) -> float:
    """``p(A | B) = Tr(rho P_A(x)P_B) / Tr(rho 1(x)P_B)``."""
    a, b = _op(p_a), _op(p_b)
    dims = _bipartite_dims(rho_ab, a.shape[0], b.shape[0])
    marg = marginal_probability(rho_ab, b, 1, dims)
    if marg <= tol.eps_equality:
        raise ValidationError(f"conditioning on null event: marginal {marg:.3e}")
    return joint_probability(rho_ab, a, b) / marg


# -- prospects ----------------------------------------------------------------

@dataclass(frozen=True)
class ProbabilityDecomposition:
    """Prospect probability ``total = utility_factor + attraction_factor``."""

    total: float
    utility_factor: float
    attraction_factor: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def p(self) -> float:
        return self.total

    @property
    def f(self) -> float:
        return self.utility_factor

    @property
    def q(self) -> float:
        return self.attraction_factor


def _prospect_block(rho_ab: DensityOperator, pi: Prospect) -> np.ndarray:
    d_a, d_b = pi.dims
    _bipartite_dims(rho_ab, d_a, d_b)
    n = pi.outcome_index
    # <n,alpha| rho |n,beta> for all alpha, beta
    return rho_ab.matrix[n * d_b:(n + 1) * d_b, n * d_b:(n + 1) * d_b]


def _split_quadratic_form(m: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Diagonal and off-diagonal parts of ``b^dagger m b``.

    ``Tr(rho P_n (x) |alpha><beta|) = <n,beta|rho|n,alpha> = m[beta, alpha]``,
    so the off-diagonal sum ``sum_{alpha != beta} b_alpha b*_beta m[beta, alpha]``
    is twice the real part of its strictly-lower-triangle half.
    """
    weights = np.abs(b) ** 2
    diag = float(np.dot(weights, np.real(np.diag(m))))
    lower = np.tril(m, -1)
    # lower[beta, alpha] with beta > alpha, paired with b_alpha conj(b_beta)
    off = 2.0 * float(np.real(np.conj(b) @ lower @ b))
    return diag, off


def prospect_probability(rho_ab: DensityOperator, pi: Prospect) -> ProbabilityDecomposition:
    """Split ``Tr(rho_AB P(pi))`` into its utility and attraction factors.

    The utility factor collects the product-basis diagonal terms
    ``|b_alpha|^2 Tr(rho P_n (x) P_alpha)``; the attraction factor collects
    the interference terms with ``alpha != beta``.  The total is defined as
    their sum, so the decomposition is exact.
    """
    b = np.asarray(pi.uncertain.amplitudes)
    f, q = _split_quadratic_form(_prospect_block(rho_ab, pi), b)
    return ProbabilityDecomposition(f + q, f, q)


def prospect_trace(rho_ab: DensityOperator, pi: Prospect) -> float:
    """Direct evaluation of ``Tr(rho_AB P(pi))`` via the full prospect operator."""
    return event_probability(rho_ab, prospect_operator(pi, check_norm=False))


@dataclass(frozen=True)
class UncertainConditional:
    value: float
    numerator: ProbabilityDecomposition
    denominator: ProbabilityDecomposition


def conditional_under_uncertainty_terms(rho_ab: DensityOperator, pi: Prospect,
                                        tol: Tolerance = DEFAULT_TOL) -> UncertainConditional:
    """``p(A_n | B)`` with numerator and denominator each split into f + q.

    The denominator's utility part is ``sum |b_alpha|^2 p(B_alpha)``; its
    attraction part ``q(B)`` is the off-diagonal remainder of
    ``Tr(rho_AB 1 (x) P_B)``.
    """
    num = prospect_probability(rho_ab, pi)
    d_a, d_b = pi.dims
    _bipartite_dims(rho_ab, d_a, d_b)
    rho_b = partial_trace(rho_ab.matrix, [d_a, d_b], [1])
    fb, qb = _split_quadratic_form(rho_b, np.asarray(pi.uncertain.amplitudes))
    den = ProbabilityDecomposition(fb + qb, fb, qb)
    if den.total <= tol.eps_equality:
        raise ValidationError(f"conditioning on null event: p(B) = {den.total:.3e}")
    return UncertainConditional(num.total / den.total, num, den)


def conditional_under_uncertainty(rho_ab: DensityOperator, pi: Prospect,
                                  tol: Tolerance = DEFAULT_TOL) -> float:
    return conditional_under_uncertainty_terms(rho_ab, pi, tol).value
