"""Hilbert spaces, state vectors, density operators and unitary evolution."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Sequence

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
    is_orthonormal,
)


@dataclass(frozen=True)
class HilbertSpace:
    """Finite-dimensional space with one outcome label per basis vector.

    ``factors`` records the tensor-product structure; a simple space has a
    single factor equal to its dimension.
    """

    dimension: int
    labels: tuple[str, ...] = ()
    factors: tuple[int, ...] = ()

    def __post_init__(self):
        if int(self.dimension) <= 0:
            raise ValidationError(f"dimension must be positive, got {self.dimension}")
        object.__setattr__(self, "dimension", int(self.dimension))
        labels = tuple(str(x) for x in self.labels) or tuple(str(i) for i in range(self.dimension))
        if len(labels) != self.dimension:
            raise ValidationError(f"{len(labels)} labels for dimension {self.dimension}")
        if len(set(labels)) != len(labels):
            raise ValidationError("labels must be unique")
        object.__setattr__(self, "labels", labels)
        factors = tuple(int(f) for f in self.factors) or (self.dimension,)
        if prod(factors) != self.dimension:
            raise ValidationError(f"factorization mismatch: {factors} vs dimension {self.dimension}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, dimension: int, labels: Sequence[str] = ()) -> "HilbertSpace":
        return cls(dimension, tuple(labels))

    def index(self, label: str) -> int:
        return self.labels.index(label)


def tensor(*spaces: HilbertSpace) -> HilbertSpace:
    """Tensor product space; labels are comma-joined outcome tuples."""
    if not spaces:
        raise ValidationError("tensor needs at least one space")
    labels = [""]
    factors: tuple[int, ...] = ()
    for s in spaces:
        labels = [f"{a},{b}" if a else b for a in labels for b in s.labels]
        factors += s.factors
    return HilbertSpace(prod(s.dimension for s in spaces), tuple(labels), factors)


def product_space(dims: Sequence[int]) -> HilbertSpace:
    return tensor(*(HilbertSpace(int(d)) for d in dims))


def _space_for(space: HilbertSpace | int | None, dim: int) -> HilbertSpace:
    if space is None:
        return HilbertSpace(dim)
    if isinstance(space, (int, np.integer)):
        space = HilbertSpace(int(space))
    if space.dimension != dim:
        raise ValidationError(f"dimension mismatch: space {space.dimension}, data {dim}")
    return space


@dataclass(frozen=True, eq=False)
class StateVector:
    space: HilbertSpace
    amplitudes: np.ndarray
    tol: Tolerance = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(amps)):
            raise ValidationError("amplitudes must be finite")
        if amps.size != self.space.dimension:
            raise ValidationError(f"{amps.size} amplitudes for dimension {self.space.dimension}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > self.tol.eps_equality:
            raise ValidationError(f"norm violation: sum |amplitude|^2 = {norm2!r}")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def of(cls, amplitudes, space: HilbertSpace | None = None) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(_space_for(space, amps.size), amps)


@dataclass(frozen=True)
class DensityReport:
    """Outcome of :func:`validate_density`."""

    hermiticity_defect: float
    min_eigenvalue: float
    trace: float
    trace_defect: float
    passed: bool
    problems: tuple[str, ...]


def validate_density(rho, tol: Tolerance = DEFAULT_TOL) -> DensityReport:
    """Check Hermiticity, positivity and unit trace without raising."""
    m = rho.matrix if isinstance(rho, DensityOperator) else as_square(rho, "rho")
    herm = hermiticity_defect(m)
    h = 0.5 * (m + dagger(m))
    min_eig = float(np.linalg.eigvalsh(h)[0])
    tr = complex(np.trace(m))
    trace_defect = float(abs(tr - 1.0))
    problems = []
    if herm > tol.eps_hermitian:
        problems.append(f"not Hermitian: defect {herm:.3e}")
    if min_eig < -tol.eps_psd:
        problems.append(f"negative eigenvalue {min_eig:.12g}")
    if trace_defect > tol.eps_equality:
        problems.append(f"trace = {tr.real:.12g}")
    return DensityReport(herm, min_eig, tr.real, trace_defect, not problems, tuple(problems))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, positive-semidefinite, unit-trace operator on ``space``."""

    space: HilbertSpace
    matrix: np.ndarray
    tol: Tolerance = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        m = as_square(self.matrix, "density matrix")
        if m.shape[0] != self.space.dimension:
            raise ValidationError(f"dimension mismatch: space {self.space.dimension}, matrix {m.shape[0]}")
        report = validate_density(m, self.tol)
        if not report.passed:
            raise ValidationError("invalid density operator: " + "; ".join(report.problems))
        object.__setattr__(self, "matrix", frozen(m))

    @classmethod
    def of(cls, matrix, space: HilbertSpace | Sequence[int] | int | None = None,
           tol: Tolerance = DEFAULT_TOL) -> "DensityOperator":
        m = as_square(matrix, "density matrix")
        if isinstance(space, (list, tuple)):
            space = product_space(space)
        return cls(_space_for(space, m.shape[0]), m, tol)

    @classmethod
    def from_user_matrix(cls, matrix, space: HilbertSpace | Sequence[int] | int | None = None,
                         tol: Tolerance = DEFAULT_TOL) -> "DensityOperator":
        """Build from serialized data, clipping rounding-level negative eigenvalues.

        Eigenvalues in ``[-eps_psd, 0)`` are set to zero and the matrix is
        renormalized to unit trace.  Anything more negative is rejected.
        """
        m = as_square(matrix, "density matrix")
        if hermiticity_defect(m) > tol.eps_hermitian:
            raise ValidationError("invalid density operator: not Hermitian")
        w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
        if w[0] < -tol.eps_psd:
            raise ValidationError(f"invalid density operator: negative eigenvalue {w[0]:.12g}")
        if w[0] < 0:
            w = np.clip(w, 0.0, None)
            m = (v * w) @ dagger(v)
            m = m / np.trace(m).real
        return cls.of(m, space, tol)

    @property
    def dimension(self) -> int:
        return self.space.dimension

    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    space: HilbertSpace
    matrix: np.ndarray
    tol: Tolerance = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        u = as_square(self.matrix, "unitary")
        if u.shape[0] != self.space.dimension:
            raise ValidationError(f"dimension mismatch: space {self.space.dimension}, unitary {u.shape[0]}")
        defect = float(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0])))
        if defect > self.tol.eps_equality:
            raise ValidationError(f"not unitary: ||U^dagger U - 1||_F = {defect:.3e}")
        object.__setattr__(self, "matrix", frozen(u))

    @classmethod
    def of(cls, matrix, space: HilbertSpace | Sequence[int] | int | None = None) -> "UnitaryOperator":
        u = as_square(matrix, "unitary")
        if isinstance(space, (list, tuple)):
            space = product_space(space)
        return cls(_space_for(space, u.shape[0]), u)

    @classmethod
    def identity(cls, space: HilbertSpace) -> "UnitaryOperator":
        return cls(space, np.eye(space.dimension, dtype=complex))


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def pure_density(psi, space: HilbertSpace | None = None,
                 tol: Tolerance = DEFAULT_TOL) -> DensityOperator:
    """Rank-one density ``|psi><psi|`` of a normalized state vector."""
    if not isinstance(psi, StateVector):
        amps = np.asarray(psi, dtype=complex).reshape(-1)
        psi = StateVector(_space_for(space, amps.size), amps, tol)
    a = psi.amplitudes
    return DensityOperator(psi.space, np.outer(a, np.conj(a)), tol)


def evolve(rho: DensityOperator, u: UnitaryOperator) -> DensityOperator:
    """Unitary evolution ``U rho U^dagger``."""
    if rho.space.dimension != u.space.dimension:
        raise ValidationError(
            f"dimension mismatch: state {rho.space.dimension}, unitary {u.space.dimension}"
        )
    m = u.matrix @ rho.matrix @ dagger(u.matrix)
    return DensityOperator(rho.space, 0.5 * (m + dagger(m)), rho.tol)


def dephase(rho: DensityOperator, basis=None, tol: Tolerance = DEFAULT_TOL) -> DensityOperator:
    """Remove every coherence of ``rho`` relative to an orthonormal basis.

    ``basis`` holds the basis vectors as columns; ``None`` means the standard
    basis.  Populations in that basis are left untouched.
    """
    n = rho.space.dimension
    if basis is None:
        return DensityOperator(rho.space, np.diag(np.diag(rho.matrix)), rho.tol)
    b = as_matrix(basis, "basis")
    if b.shape != (n, n):
        raise ValidationError(f"basis must be {n}x{n} to span the space, got {b.shape}")
    if not is_orthonormal(b, tol):
        raise ValidationError("basis is not orthonormal")
    in_basis = dagger(b) @ rho.matrix @ b
    out = b @ np.diag(np.diag(in_basis)) @ dagger(b)
    return DensityOperator(rho.space, 0.5 * (out + dagger(out)), rho.tol)


def eigenbasis(rho: DensityOperator, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    return eig_hermitian(rho.matrix, tol)[1]


# -- random ensembles used by the property suites ---------------------------

def _ginibre(dim: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)


def random_density(space: HilbertSpace | Sequence[int] | int, rng: np.random.Generator) -> DensityOperator:
    """Random full-rank density ``G G^dagger / Tr(G G^dagger)`` with Gaussian ``G``."""
    if isinstance(space, (list, tuple)):
        space = product_space(space)
    space = _space_for(space, space if isinstance(space, int) else space.dimension)
    g = _ginibre(space.dimension, rng)
    m = g @ dagger(g)
    m = m / np.trace(m).real
    return DensityOperator(space, 0.5 * (m + dagger(m)))


def random_unitary(space: HilbertSpace | Sequence[int] | int, rng: np.random.Generator) -> UnitaryOperator:
    """Haar-random unitary via QR of a Gaussian matrix with phase correction."""
    if isinstance(space, (list, tuple)):
        space = product_space(space)
    space = _space_for(space, space if isinstance(space, int) else space.dimension)
    q, r = np.linalg.qr(_ginibre(space.dimension, rng))
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return UnitaryOperator(space, q)


def random_state_vector(space: HilbertSpace | int, rng: np.random.Generator) -> StateVector:
    space = _space_for(space, space if isinstance(space, int) else space.dimension)
    v = rng.standard_normal(space.dimension) + 1j * rng.standard_normal(space.dimension)
    return StateVector(space, v / np.linalg.norm(v))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = _ginibre(dim, rng)
    return 0.5 * (g + dagger(g))
