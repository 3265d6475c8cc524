"""Event operators and quantum-logic structure.

Projectors for operationally testable events, degenerate events and their
degeneracy lifting, the join/meet lattice operations, rank-one operators of
inconclusive events, prospect operators, and the product-basis separability
classification used for prospects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .numkernel import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    as_square,
    dagger,
    eig_hermitian,
    frozen,
    hermiticity_defect,
    kron,
    normalize_phases,
    projector_onto,
    range_basis,
)
from .qstate import DensityOperator, HilbertSpace, UnitaryOperator, random_hermitian, tensor

KINDS = ("projector", "inconclusive", "prospect", "union")


@dataclass(frozen=True, eq=False)
class EventOperator:
    """Hermitian operator representing an event on ``space``.

    ``kind`` is one of ``projector``, ``inconclusive``, ``prospect`` or
    ``union``.  Only ``projector`` and ``union`` are required to be
    idempotent.
    """

    space: HilbertSpace
    matrix: np.ndarray
    kind: str = "projector"
    tol: Tolerance = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown event kind {self.kind!r}")
        m = as_square(self.matrix, "event operator")
        if m.shape[0] != self.space.dimension:
            raise ValidationError(f"dimension mismatch: space {self.space.dimension}, operator {m.shape[0]}")
        herm = hermiticity_defect(m)
        if herm > self.tol.eps_hermitian:
            raise ValidationError(f"event operator not Hermitian: defect {herm:.3e}")
        w = np.linalg.eigvalsh(0.5 * (m + dagger(m)))
        if w[0] < -self.tol.eps_psd or w[-1] > 1 + self.tol.eps_psd:
            raise ValidationError(f"event operator spectrum [{w[0]:.6g}, {w[-1]:.6g}] outside [0, 1]")
        if self.kind in ("projector", "union"):
            defect = float(np.linalg.norm(m @ m - m))
            if defect > self.tol.eps_equality * max(1.0, np.sqrt(m.shape[0])):
                raise ValidationError(f"projector is not idempotent: ||P^2 - P||_F = {defect:.3e}")
        object.__setattr__(self, "matrix", frozen(m))

    @property
    def is_projector(self) -> bool:
        return self.kind in ("projector", "union")

    @property
    def rank(self) -> int:
        return range_basis(self.matrix, self.tol).shape[1]


def projector(space: HilbertSpace, indices: Iterable[int], union: bool = False) -> EventOperator:
    """Standard-basis projector with ones on the diagonal at ``indices``.

    With ``union=True`` the result is tagged as the union of the elementary
    events, a sum of the individual projectors.
    """
    idx = sorted(set(int(i) for i in indices))
    if not idx:
        raise ValidationError("projector needs a non-empty index set")
    if idx[0] < 0 or idx[-1] >= space.dimension:
        raise ValidationError(f"indices {idx} out of range for dimension {space.dimension}")
    d = np.zeros(space.dimension)
    d[idx] = 1.0
    return EventOperator(space, np.diag(d).astype(complex), "union" if union else "projector")


def vector_projector(space: HilbertSpace, vectors, tol: Tolerance = DEFAULT_TOL) -> EventOperator:
    """Projector onto the span of the given vectors (columns, or a single vector)."""
    v = np.asarray(vectors, dtype=complex)
    if v.ndim == 1:
        v = v.reshape(-1, 1)
    v = as_matrix(v, "vectors")
    if v.shape[0] != space.dimension:
        raise ValidationError(f"vectors have length {v.shape[0]}, space has dimension {space.dimension}")
    return EventOperator(space, projector_onto(range_basis(v, tol)), "projector", tol)


def zero_event(space: HilbertSpace) -> EventOperator:
    return EventOperator(space, np.zeros((space.dimension, space.dimension), dtype=complex))


def identity_event(space: HilbertSpace) -> EventOperator:
    return EventOperator(space, np.eye(space.dimension, dtype=complex))


def rotate_event(event: EventOperator, u: UnitaryOperator) -> EventOperator:
    """Express ``event`` in a rotated basis: ``U P U^dagger``."""
    if u.space.dimension != event.space.dimension:
        raise ValidationError("dimension mismatch between event and unitary")
    m = u.matrix @ event.matrix @ dagger(u.matrix)
    return EventOperator(event.space, 0.5 * (m + dagger(m)), event.kind, event.tol)


# -- degenerate events --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DegenerateEvent:
    """Eigenvalue of an observable together with its eigenvectors (columns)."""

    operator: np.ndarray
    eigenvalue: float
    subevent_vectors: np.ndarray
    tol: Tolerance = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        a = as_square(self.operator, "observable")
        v = as_matrix(np.asarray(self.subevent_vectors).reshape(a.shape[0], -1), "subevent vectors")
        ortho = float(np.linalg.norm(dagger(v) @ v - np.eye(v.shape[1])))
        if ortho > self.tol.eps_equality * max(1.0, v.shape[1]):
            raise ValidationError("subevent vectors are not orthonormal")
        resid = float(np.linalg.norm(a @ v - self.eigenvalue * v))
        if resid > self.tol.eps_equality * max(1.0, float(np.linalg.norm(a))):
            raise ValidationError(f"subevent vectors are not eigenvectors for {self.eigenvalue}")
        object.__setattr__(self, "operator", frozen(a))
        object.__setattr__(self, "subevent_vectors", frozen(v))

    @property
    def multiplicity(self) -> int:
        return self.subevent_vectors.shape[1]

    def projector(self, space: HilbertSpace | None = None) -> EventOperator:
        """Sum of the subevent projectors."""
        space = space or HilbertSpace(self.operator.shape[0])
        return EventOperator(space, projector_onto(self.subevent_vectors), "projector", self.tol)

    def probability(self, rho: DensityOperator) -> float:
        v = self.subevent_vectors
        return float(np.trace(dagger(v) @ rho.matrix @ v).real)


def eigen_clusters(observable, tol: Tolerance = DEFAULT_TOL,
                   spacing: float = 1e-8) -> list[DegenerateEvent]:
    """Group the spectrum of an observable into (possibly degenerate) eigenvalues."""
    a = as_square(observable, "observable")
    w, v = eig_hermitian(a, tol)
    clusters: list[list[int]] = [[0]]
    for k in range(1, len(w)):
        if w[k] - w[clusters[-1][-1]] <= spacing * max(1.0, abs(w[k])):
            clusters[-1].append(k)
        else:
            clusters.append([k])
    return [DegenerateEvent(a, float(np.mean(w[c])), v[:, c], tol) for c in clusters]


def degenerate_event(observable, eigenvalue: float, tol: Tolerance = DEFAULT_TOL) -> DegenerateEvent:
    for ev in eigen_clusters(observable, tol):
        if abs(ev.eigenvalue - eigenvalue) <= 1e-8 * max(1.0, abs(eigenvalue)):
            return ev
    raise ValidationError(f"{eigenvalue} is not an eigenvalue of the observable")


@dataclass(frozen=True)
class DegeneracyLifting:
    """Result of :func:`lift_degeneracy`.

    ``probabilities`` are the extrapolated zero-perturbation subevent
    probabilities, ordered by the perturbed eigenvalues.  ``trajectory[k]``
    holds the values at ``nu_sequence[k]``.
    """

    eigenvalue: float
    probabilities: tuple[float, ...]
    degenerate_probability: float
    residual: float
    nu_sequence: tuple[float, ...]
    trajectory: tuple[tuple[float, ...], ...]
    min_gap: float
    subevent_vectors: np.ndarray = field(repr=False)


def lift_degeneracy(observable, rho: DensityOperator, gamma=None,
                    nu_sequence: Sequence[float] = (1e-2, 1e-3, 1e-4),
                    eigenvalue: float | None = None, seed: int = 0,
                    tol: Tolerance = DEFAULT_TOL) -> DegeneracyLifting:
    """Split a degenerate eigenvalue by ``A + nu*Gamma`` and take ``nu -> 0``.

    For each ``nu`` the perturbed eigenvectors belonging to the degenerate
    cluster are projected back onto the unperturbed eigenspace and
    symmetrically orthonormalized there; the subevent probabilities
    ``<v|rho|v>`` of those vectors then sum to the degenerate-event
    probability at every ``nu``.  The limit is obtained by linear Richardson
    extrapolation through the last two points of ``nu_sequence``.

    Parameters
    ----------
    observable : array_like
        Hermitian matrix with at least one degenerate eigenvalue.
    rho : DensityOperator
        State in which probabilities are evaluated.
    gamma : array_like, optional
        Hermitian symmetry-breaking perturbation.  Defaults to a random
        Hermitian matrix drawn from ``seed``.
    nu_sequence : sequence of float
        Strictly decreasing positive strengths; the last must be <= 1e-4.
    eigenvalue : float, optional
        Which degenerate eigenvalue to lift; defaults to the lowest one.
    """
    a = as_square(observable, "observable")
    n = a.shape[0]
    if rho.space.dimension != n:
        raise ValidationError("dimension mismatch between observable and state")
    if gamma is None:
        gamma = random_hermitian(n, np.random.default_rng(seed))
    g = as_square(gamma, "gamma")
    if g.shape != a.shape:
        raise ValidationError("gamma must match the observable's shape")
    if hermiticity_defect(g) > tol.eps_hermitian:
        raise ValidationError("not Hermitian: gamma")
    nus = [float(x) for x in nu_sequence]
    if len(nus) < 2 or any(x <= 0 for x in nus) or any(b >= a_ for a_, b in zip(nus, nus[1:])):
        raise ValidationError("nu_sequence must hold at least two strictly decreasing positive values")
    if nus[-1] > 1e-4:
        raise ValidationError("nu_sequence must reach values <= 1e-4")

    clusters = [c for c in eigen_clusters(a, tol) if c.multiplicity > 1]
    if not clusters:
        raise ValidationError("observable has no degenerate eigenvalue")
    if eigenvalue is None:
        target = clusters[0]
    else:
        matches = [c for c in clusters if abs(c.eigenvalue - eigenvalue) <= 1e-8 * max(1.0, abs(eigenvalue))]
        if not matches:
            raise ValidationError(f"{eigenvalue} is not a degenerate eigenvalue")
        target = matches[0]
    k = target.multiplicity
    block = np.asarray(target.subevent_vectors)
    block_proj = block @ dagger(block)

    trajectory = []
    gaps = []
    vectors = None
    for nu in nus:
        w, v = eig_hermitian(a + nu * g, tol)
        chosen = np.sort(np.argsort(np.abs(w - target.eigenvalue))[:k])
        gaps.append(float(np.min(np.diff(w[chosen]))))
        u = block_proj @ v[:, chosen]
        # Symmetric orthonormalization keeps the vectors as close as possible to
        # the perturbed eigenvectors while spanning exactly the eigenspace.
        left, _, right = np.linalg.svd(u, full_matrices=False)
        vectors = normalize_phases(left @ right)
        trajectory.append(tuple(float(np.real(np.vdot(vectors[:, j], rho.matrix @ vectors[:, j])))
                                for j in range(k)))
    if gaps[-1] < 1e-12:
        raise ValidationError(
            f"ineffective symmetry breaking: perturbed gap {gaps[-1]:.3e} at nu={nus[-1]:g}"
        )

    (nu1, p1), (nu2, p2) = (nus[-2], np.array(trajectory[-2])), (nus[-1], np.array(trajectory[-1]))
    limit = (nu1 * p2 - nu2 * p1) / (nu1 - nu2)
    residual = float(np.max(np.abs(p2 - p1)))
    return DegeneracyLifting(
        eigenvalue=target.eigenvalue,
        probabilities=tuple(float(x) for x in limit),
        degenerate_probability=target.probability(rho),
        residual=residual,
        nu_sequence=tuple(nus),
        trajectory=tuple(trajectory),
        min_gap=gaps[-1],
        subevent_vectors=frozen(vectors),
    )


# -- lattice operations -------------------------------------------------------

def _require_projector_pair(p: EventOperator, q: EventOperator) -> None:
    if not (p.is_projector and q.is_projector):
        raise ValidationError("join/meet require projector events")
    if p.space.dimension != q.space.dimension:
        raise ValidationError("join/meet require events on the same space")


def join(p: EventOperator, q: EventOperator, tol: Tolerance = DEFAULT_TOL) -> EventOperator:
    """Projector onto ``range(p) + range(q)``."""
    _require_projector_pair(p, q)
    stacked = np.hstack([range_basis(p.matrix, tol), range_basis(q.matrix, tol)])
    if stacked.shape[1] == 0:
        return zero_event(p.space)
    return EventOperator(p.space, projector_onto(range_basis(stacked, tol)), "projector", tol)


def meet(p: EventOperator, q: EventOperator, tol: Tolerance = DEFAULT_TOL) -> EventOperator:
    """Projector onto ``range(p) & range(q)``.

    Uses the principal angles between the two ranges: directions whose cosine
    is 1 (to within tolerance) lie in both subspaces.
    """
    _require_projector_pair(p, q)
    bp = range_basis(p.matrix, tol)
    bq = range_basis(q.matrix, tol)
    if bp.shape[1] == 0 or bq.shape[1] == 0:
        return zero_event(p.space)
    u, s, _ = np.linalg.svd(dagger(bp) @ bq)
    common = s > 1.0 - tol.eps_equality
    if not np.any(common):
        return zero_event(p.space)
    inter = range_basis(bp @ u[:, : len(s)][:, common], tol)
    return EventOperator(p.space, projector_onto(inter), "projector", tol)


# -- inconclusive events and prospects ---------------------------------------

@dataclass(frozen=True, eq=False)
class InconclusiveEvent:
    """Superposition ``sum_alpha b_alpha |alpha>`` of outcomes on ``space``.

    Normalization is not enforced here, so that deliberately unnormalized
    prospect states can be represented; operator constructors check it.
    """

    space: HilbertSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if b.size != self.space.dimension:
            raise ValidationError(f"{b.size} amplitudes for dimension {self.space.dimension}")
        if not np.all(np.isfinite(b)):
            raise ValidationError("amplitudes must be finite")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "amplitudes", b)

    @classmethod
    def of(cls, amplitudes, space: HilbertSpace | None = None) -> "InconclusiveEvent":
        b = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(space or HilbertSpace(b.size), b)

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.amplitudes))

    @property
    def operationally_testable(self) -> bool:
        """True when only one amplitude is nonzero (no genuine uncertainty)."""
        return self.nonzero_count == 1


def _check_norm(b: InconclusiveEvent, tol: Tolerance) -> None:
    if abs(b.norm_squared - 1.0) > tol.eps_equality:
        raise ValidationError(f"norm violation: sum |b|^2 = {b.norm_squared!r}")


def inconclusive_operator(b: InconclusiveEvent, check_norm: bool = True,
                          tol: Tolerance = DEFAULT_TOL) -> EventOperator:
    """Rank-one operator ``|B><B|`` with entries ``b_alpha conj(b_beta)``."""
    if check_norm:
        _check_norm(b, tol)
    a = b.amplitudes
    return EventOperator(b.space, np.outer(a, np.conj(a)), "inconclusive", tol)


@dataclass(frozen=True, eq=False)
class Prospect:
    """Composite event ``A_n (x) B``: testable outcome ``n`` of ``space_a``
    paired with an inconclusive event on ``uncertain.space``."""

    space_a: HilbertSpace
    outcome_index: int
    uncertain: InconclusiveEvent
    label: str = ""

    def __post_init__(self):
        if not (0 <= int(self.outcome_index) < self.space_a.dimension):
            raise ValidationError(
                f"outcome index {self.outcome_index} out of range for dimension {self.space_a.dimension}"
            )
        object.__setattr__(self, "outcome_index", int(self.outcome_index))
        if not self.label:
            object.__setattr__(self, "label", f"pi{self.outcome_index}")

    @property
    def space(self) -> HilbertSpace:
        return tensor(self.space_a, self.uncertain.space)

    @property
    def dims(self) -> tuple[int, int]:
        return self.space_a.dimension, self.uncertain.space.dimension

    @property
    def norm_squared(self) -> float:
        """``<pi|pi>``; the outcome part is a unit basis vector."""
        return self.uncertain.norm_squared


def prospect_operator(pi: Prospect, check_norm: bool = True,
                      tol: Tolerance = DEFAULT_TOL) -> EventOperator:
    """``P_n (x) |B><B|`` on the composite space.

    Satisfies ``P^2 = <pi|pi> P``; it is a projector only for normalized
    amplitudes.
    """
    p_n = projector(pi.space_a, [pi.outcome_index])
    p_b = inconclusive_operator(pi.uncertain, check_norm=check_norm, tol=tol)
    return EventOperator(pi.space, kron(p_n.matrix, p_b.matrix), "prospect", tol)


@dataclass(frozen=True)
class SeparabilityResult:
    separable: bool
    witness: float
    witness_index: tuple[int, int] | None
    witness_outcomes: tuple[tuple[int, ...], tuple[int, ...]] | None

    @property
    def label(self) -> str:
        return "separable" if self.separable else "entangled"


def is_separable(op, dims: Sequence[int], tol: Tolerance = DEFAULT_TOL) -> SeparabilityResult:
    """Classify an operator against the product standard-basis projector algebras.

    The operator is separable exactly when it lies in the span of
    ``{P_n (x) P_alpha}``, i.e. when it is diagonal in the product basis.  The
    witness is the largest off-diagonal magnitude with its location.
    """
    m = op.matrix if isinstance(op, EventOperator) else as_square(op, "operator")
    dims = [int(d) for d in dims]
    if np.prod(dims) != m.shape[0]:
        raise ValidationError(f"factorization mismatch: dims {dims} vs operator {m.shape[0]}")
    off = np.abs(m - np.diag(np.diag(m)))
    flat = int(np.argmax(off))
    i, j = divmod(flat, m.shape[0])
    witness = float(off[i, j])
    if witness <= tol.eps_equality:
        return SeparabilityResult(True, witness, None, None)
    return SeparabilityResult(
        False, witness, (i, j),
        (tuple(int(x) for x in np.unravel_index(i, dims)), tuple(int(x) for x in np.unravel_index(j, dims))),
    )


@dataclass(frozen=True)
class UnityReport:
    defect: float
    passed: bool
    positive: tuple[bool, ...]
    min_eigenvalues: tuple[float, ...]

    @property
    def is_povm(self) -> bool:
        return self.passed and all(self.positive)


def resolution_of_unity_check(operators: Sequence[EventOperator],
                              tol: Tolerance = DEFAULT_TOL) -> UnityReport:
    """Frobenius defect of ``sum(op) - 1`` plus per-member positivity."""
    ops = list(operators)
    if not ops:
        raise ValidationError("need at least one operator")
    dim = ops[0].space.dimension
    if any(o.space.dimension != dim for o in ops):
        raise ValidationError("operators act on different spaces")
    total = sum(o.matrix for o in ops)
    defect = float(np.linalg.norm(total - np.eye(dim)))
    mins = tuple(float(np.linalg.eigvalsh(o.matrix)[0]) for o in ops)
    return UnityReport(defect, defect <= tol.eps_equality, tuple(m >= -tol.eps_psd for m in mins), mins)
