"""Five-step measurement pipeline on a tripartite system/device space.

The total space is ``H_A (x) H_B (x) H_M`` (factor indices 0, 1, 2).  Unitary
channels (preparation and evolution) entangle; measurement channels replace
the state by the product of its reductions across a cut, which disentangles
the measured subsystem and cannot be written as a unitary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .numkernel import (
    DEFAULT_TOL,
    Tolerance,
    dagger,
    kron,
    kron_all,
    partial_trace,
    permute_factors,
)
from .probability import event_probability, joint_probability, luders_probability, SequentialPair
from .eventlogic import EventOperator, projector
from .qstate import (
    DensityOperator,
    HilbertSpace,
    UnitaryOperator,
    product_space,
    random_density,
    random_unitary,
)

PREPARATION = "entangling_preparation"
EVOLUTION = "unitary_evolution"
MEASUREMENT = "disentangling_measurement"
CHANNEL_KINDS = (PREPARATION, EVOLUTION, MEASUREMENT)

FACTOR_A, FACTOR_B, FACTOR_M = 0, 1, 2


@dataclass(frozen=True, eq=False)
class Channel:
    """One step of the pipeline.

    Unitary kinds carry ``unitary``; a measurement carries ``partition``, the
    factor indices split off from the rest of the state.
    """

    kind: str
    unitary: np.ndarray | None = None
    partition: tuple[int, ...] | None = None
    label: str = ""
    tol: Tolerance = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValidationError(f"unknown channel kind {self.kind!r}")
        if self.kind == MEASUREMENT:
            if not self.partition:
                raise ValidationError("measurement channel needs a non-empty partition")
            part = tuple(sorted(set(int(k) for k in self.partition)))
            if part[0] < 0:
                raise ValidationError("partition indices must be nonnegative")
            object.__setattr__(self, "partition", part)
            object.__setattr__(self, "unitary", None)
        else:
            if self.unitary is None:
                raise ValidationError(f"{self.kind} channel needs a unitary")
            u = UnitaryOperator.of(self.unitary).matrix
            object.__setattr__(self, "unitary", u)
            object.__setattr__(self, "partition", None)
        if not self.label:
            object.__setattr__(self, "label", self.kind)

    @property
    def is_unitary(self) -> bool:
        return self.kind != MEASUREMENT


def preparation(u, label: str = "C1: preparation") -> Channel:
    return Channel(PREPARATION, unitary=u, label=label)


def evolution(u, label: str = "evolution") -> Channel:
    return Channel(EVOLUTION, unitary=u, label=label)


def measurement(partition: Sequence[int], label: str = "measurement") -> Channel:
    return Channel(MEASUREMENT, partition=tuple(partition), label=label)


def disentangle(matrix: np.ndarray, dims: Sequence[int], partition: Sequence[int]) -> np.ndarray:
    """``Tr_rest(rho) (x) Tr_partition(rho)`` with factors restored to their original order."""
    dims = list(dims)
    part = sorted(set(partition))
    rest = [k for k in range(len(dims)) if k not in part]
    if not part or not rest:
        raise ValidationError("measurement partition must be a nontrivial proper subset of the factors")
    if part[-1] >= len(dims):
        raise ValidationError(f"partition {part} out of range for {len(dims)} factors")
    rho_part = partial_trace(matrix, dims, part)
    rho_rest = partial_trace(matrix, dims, rest)
    grouped = kron(rho_part, rho_rest)
    # grouped factor i is original factor (part + rest)[i]; invert that ordering
    current = part + rest
    order = [current.index(k) for k in range(len(dims))]
    return permute_factors(grouped, [dims[k] for k in current], order)


def apply_channel(state: DensityOperator, c: Channel, dims: Sequence[int] | None = None) -> DensityOperator:
    """Apply one channel to a state on the composite space.

    ``dims`` defaults to the factor structure recorded on the state's space.
    """
    dims = list(dims) if dims is not None else list(state.space.factors)
    if int(np.prod(dims)) != state.space.dimension:
        raise ValidationError(f"factorization mismatch: {dims} vs state dimension {state.space.dimension}")
    if c.is_unitary:
        u = c.unitary
        if u.shape[0] != state.space.dimension:
            raise ValidationError(f"dimension mismatch: unitary {u.shape[0]}, state {state.space.dimension}")
        out = u @ state.matrix @ dagger(u)
    else:
        out = disentangle(state.matrix, dims, c.partition)
    out = 0.5 * (out + dagger(out))
    return DensityOperator(state.space, out, state.tol)


# -- pipeline -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MeasurementPipeline:
    """Preparation, evolution, B-measurement, evolution, A-measurement.

    The B-measurement cut is (AM|B) and the A-measurement cut is (A|BM).
    Timestamps are bookkeeping labels only.
    """

    spaces: tuple[HilbertSpace, HilbertSpace, HilbertSpace]
    steps: tuple[Channel, ...]
    timestamps: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 5.0)

    def __post_init__(self):
        if len(self.spaces) != 3:
            raise ValidationError("pipeline needs three spaces: A, B, M")
        steps = tuple(self.steps)
        if len(steps) != 5:
            raise ValidationError(f"pipeline needs exactly five steps, got {len(steps)}")
        kinds = [s.kind for s in steps]
        if kinds != [PREPARATION, EVOLUTION, MEASUREMENT, EVOLUTION, MEASUREMENT]:
            raise ValidationError(f"steps out of template order: {kinds}")
        if _cut(steps[2].partition) != frozenset({FACTOR_B}):
            raise ValidationError("step 3 must disentangle B from (A, M)")
        if _cut(steps[4].partition) != frozenset({FACTOR_A}):
            raise ValidationError("step 5 must disentangle A from (B, M)")
        dim = self.dimension
        for s in steps:
            if s.is_unitary and s.unitary.shape[0] != dim:
                raise ValidationError(f"{s.label}: unitary is {s.unitary.shape[0]}-dimensional, need {dim}")
        ts = tuple(float(t) for t in self.timestamps)
        if len(ts) != 5 or any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValidationError("timestamps must be five strictly increasing values")
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "timestamps", ts)

    @property
    def dims(self) -> list[int]:
        return [s.dimension for s in self.spaces]

    @property
    def dimension(self) -> int:
        return int(np.prod(self.dims))

    @property
    def space(self) -> HilbertSpace:
        return product_space(self.dims)


def _cut(partition: Sequence[int]) -> frozenset:
    """Normalize a tripartite cut to the side containing a single named factor."""
    part = frozenset(partition)
    if len(part) == 2:
        part = frozenset({0, 1, 2}) - part
    return part


def build_pipeline(dims: Sequence[int], preparation_unitary, evolution_2, evolution_4,
                   timestamps: Sequence[float] = (1.0, 2.0, 3.0, 4.0, 5.0)) -> MeasurementPipeline:
    d_a, d_b, d_m = (int(d) for d in dims)
    steps = (
        Channel(PREPARATION, unitary=preparation_unitary, label="C1: preparation"),
        Channel(EVOLUTION, unitary=evolution_2, label="C2: evolution"),
        Channel(MEASUREMENT, partition=(FACTOR_B,), label="C3: B-measurement"),
        Channel(EVOLUTION, unitary=evolution_4, label="C4: evolution"),
        Channel(MEASUREMENT, partition=(FACTOR_A,), label="C5: A-measurement"),
    )
    return MeasurementPipeline((HilbertSpace(d_a), HilbertSpace(d_b), HilbertSpace(d_m)), steps, tuple(timestamps))


def random_pipeline(dims: Sequence[int] = (2, 2, 2), seed: int = 0) -> MeasurementPipeline:
    rng = np.random.default_rng(seed)
    d = int(np.prod(dims))
    return build_pipeline(dims, *(random_unitary(d, rng).matrix for _ in range(3)))


def random_initial_states(dims: Sequence[int] = (2, 2, 2), seed: int = 0) -> list[DensityOperator]:
    rng = np.random.default_rng(seed)
    return [random_density(int(d), rng) for d in dims]


@dataclass(frozen=True)
class StepAudit:
    label: str
    trace_defect: float
    cut_defect: float | None


@dataclass(frozen=True, eq=False)
class PipelineTrajectory:
    """States after each of the five steps, preceded by the initial product state."""

    initial: DensityOperator
    states: tuple[DensityOperator, ...]
    labels: tuple[str, ...]
    audits: tuple[StepAudit, ...]
    dims: tuple[int, int, int]

    @property
    def final(self) -> DensityOperator:
        return self.states[-1]


def product_cut_defect(matrix: np.ndarray, dims: Sequence[int], partition: Sequence[int]) -> float:
    """``||rho - Tr_rest(rho) (x) Tr_part(rho)||_F`` across a cut."""
    return float(np.linalg.norm(matrix - disentangle(matrix, dims, partition)))


def run_pipeline(p: MeasurementPipeline, initial: Sequence[DensityOperator]) -> PipelineTrajectory:
    """Run all five channels starting from ``rho_A (x) rho_B (x) rho_M``."""
    if len(initial) != 3:
        raise ValidationError("need three initial factor states")
    for k, (rho, sp) in enumerate(zip(initial, p.spaces)):
        if rho.space.dimension != sp.dimension:
            raise ValidationError(f"initial state {k} has dimension {rho.space.dimension}, expected {sp.dimension}")
    dims = p.dims
    state = DensityOperator(p.space, kron_all(r.matrix for r in initial))
    initial_state = state
    states, audits = [], []
    for step in p.steps:
        state = apply_channel(state, step, dims)
        cut = None
        if not step.is_unitary:
            cut = product_cut_defect(state.matrix, dims, step.partition)
        audits.append(StepAudit(step.label, abs(float(np.trace(state.matrix).real) - 1.0), cut))
        states.append(state)
    return PipelineTrajectory(initial_state, tuple(states), tuple(s.label for s in p.steps),
                              tuple(audits), tuple(dims))


# -- channel-state duality ----------------------------------------------------

def choi_state(c: Channel, dims: Sequence[int] | int) -> DensityOperator:
    """Dual state of a channel on the doubled space ``R (x) S``.

    The channel acts on the system half ``S`` of the maximally entangled
    state ``sum_i |i>|i> / sqrt(D)``.  For a measurement channel the
    reference ``R`` stays with the complement of the partition, so a
    partition covering every system factor is a trace-and-replace channel.
    The result is a density operator on ``D * D`` with factors
    ``(D, *dims)``.
    """
    dims = [int(dims)] if isinstance(dims, (int, np.integer)) else [int(d) for d in dims]
    d = int(np.prod(dims))
    omega = np.zeros(d * d, dtype=complex)
    omega[:: d + 1] = 1.0 / np.sqrt(d)
    m = np.outer(omega, np.conj(omega))
    doubled = [d] + dims
    if c.is_unitary:
        if c.unitary.shape[0] != d:
            raise ValidationError(f"dimension mismatch: unitary {c.unitary.shape[0]}, channel space {d}")
        big = kron(np.eye(d), c.unitary)
        out = big @ m @ dagger(big)
    else:
        if max(c.partition) >= len(dims):
            raise ValidationError(f"partition {c.partition} out of range for {len(dims)} factors")
        out = disentangle(m, doubled, [k + 1 for k in c.partition])
    out = 0.5 * (out + dagger(out))
    return DensityOperator(product_space(doubled), out)


# -- comparison with the Lüders picture ----------------------------------------

@dataclass(frozen=True)
class LudersComparison:
    pipeline_probability: float
    luders_probability: float
    difference: float


def compare_with_luders(traj: PipelineTrajectory, n: int, alpha: int) -> LudersComparison:
    """Pipeline A-outcome probability versus the Lüders transition probability.

    The pipeline value is ``Tr(rho(t5) P_n (x) 1 (x) 1)``.  The Lüders value
    conditions the post-preparation state, reduced to ``A (x) B``, on
    ``1 (x) P_alpha`` and then asks for ``P_n (x) 1``.  No agreement
    threshold is implied.
    """
    d_a, d_b, d_m = traj.dims
    p_n = projector(HilbertSpace(d_a), [n]).matrix
    p_alpha = projector(HilbertSpace(d_b), [alpha]).matrix
    pipeline = event_probability(traj.final, kron_all([p_n, np.eye(d_b), np.eye(d_m)]))
    rho_ab = DensityOperator(product_space([d_a, d_b]),
                             partial_trace(traj.states[1].matrix, traj.dims, [0, 1]))
    ab = rho_ab.space
    pair = SequentialPair(rho_ab, EventOperator(ab, kron(np.eye(d_a), p_alpha)),
                          EventOperator(ab, kron(p_n, np.eye(d_b))))
    lud = luders_probability(pair)
    return LudersComparison(pipeline, lud, pipeline - lud)


def composite_joint_probability(traj: PipelineTrajectory, n: int, alpha: int, step: int = -1) -> float:
    """Joint probability of ``A_n`` and ``B_alpha`` on ``Tr_M`` of a trajectory state."""
    d_a, d_b, _ = traj.dims
    rho_ab = DensityOperator(product_space([d_a, d_b]),
                             partial_trace(traj.states[step].matrix, traj.dims, [0, 1]))
    return joint_probability(rho_ab, projector(HilbertSpace(d_a), [n]), projector(HilbertSpace(d_b), [alpha]))
