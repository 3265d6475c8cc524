"""Dense complex-matrix kernel.

Every algebraic primitive used elsewhere in the package lives here: input
validation, Kronecker products, partial traces over tensor factors, Hermitian
eigendecomposition with a deterministic phase convention, and orthonormal
range bases.  All functions are pure and never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import NumericalInvariantError, ValidationError

MAX_DIMENSION = 4096


@dataclass(frozen=True)
class Tolerance:
    """Numerical tolerances used by validation and equality checks.

    Parameters
    ----------
    eps_hermitian : float
        Maximum Frobenius norm of ``m - m^dagger`` for a matrix to count as
        Hermitian.
    eps_psd : float
        Most negative eigenvalue tolerated for a positive-semidefinite matrix.
    eps_equality : float
        Generic equality tolerance (traces, idempotency, norms).
    """

    eps_hermitian: float = 1e-9
    eps_psd: float = 1e-9
    eps_equality: float = 1e-10

    def __post_init__(self):
        for name in ("eps_hermitian", "eps_psd", "eps_equality"):
            value = getattr(self, name)
            if not (0.0 < value <= 1e-3):
                raise ValidationError(f"tolerance {name}={value!r} outside (0, 1e-3]")

    def with_equality(self, eps: float) -> "Tolerance":
        return Tolerance(self.eps_hermitian, self.eps_psd, eps)


DEFAULT_TOL = Tolerance()


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D complex array, raising on bad input."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValidationError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if max(arr.shape) > MAX_DIMENSION:
        raise ValidationError(f"{name} dimension {arr.shape} exceeds {MAX_DIMENSION}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def as_square(m, name: str = "matrix") -> np.ndarray:
    arr = as_matrix(m, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    return arr


def frozen(arr: np.ndarray) -> np.ndarray:
    """Return a read-only copy so value objects stay immutable."""
    out = np.array(arr, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def hermiticity_defect(m) -> float:
    arr = as_square(m)
    return float(np.linalg.norm(arr - dagger(arr)))


def is_hermitian(m, tol: Tolerance = DEFAULT_TOL) -> bool:
    return hermiticity_defect(m) <= tol.eps_hermitian


def kron(a, b) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` of the result equals ``a[i, j] * b``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[0] * b.shape[0] > MAX_DIMENSION or a.shape[1] * b.shape[1] > MAX_DIMENSION:
        raise ValidationError("Kronecker product exceeds maximum supported dimension")
    return np.kron(a, b)


def kron_all(factors: Iterable) -> np.ndarray:
    factors = list(factors)
    if not factors:
        raise ValidationError("kron_all needs at least one factor")
    out = as_matrix(factors[0], "factor 0")
    for k, f in enumerate(factors[1:], start=1):
        out = kron(out, as_matrix(f, f"factor {k}"))
    return out


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> list[int]:
    dims = [int(d) for d in dims]
    if not dims or any(d <= 0 for d in dims):
        raise ValidationError(f"factor dimensions must be positive integers, got {dims}")
    if prod(dims) != m.shape[0]:
        raise ValidationError(
            f"factorization mismatch: dims {dims} multiply to {prod(dims)}, matrix is {m.shape[0]}"
        )
    return dims


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep``.

    Parameters
    ----------
    m : array_like
        Square matrix acting on the tensor product of spaces with sizes ``dims``.
    dims : sequence of int
        Factor dimensions; their product must equal ``m.shape[0]``.
    keep : iterable of int
        Factor indices to keep.  Kept factors appear in ascending index order.
        Passing an empty set traces out everything and yields a 1x1 matrix.

    Returns
    -------
    numpy.ndarray
        Reduced matrix of size ``prod(dims[k] for k in keep)``.
    """
    m = as_square(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValidationError(f"keep indices {keep} out of range for {n} factors")
    traced = [k for k in range(n) if k not in keep]

    t = m.reshape(dims + dims)
    # Trace highest factor first so remaining axis numbers stay valid.
    nrem = n
    for k in sorted(traced, reverse=True):
        t = np.trace(t, axis1=k, axis2=k + nrem)
        nrem -= 1
    d_keep = prod(dims[k] for k in keep) if keep else 1
    return t.reshape(d_keep, d_keep)


def permute_factors(m, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a square operator.

    ``order[i]`` names the input factor that becomes output factor ``i``.
    """
    m = as_square(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    order = [int(k) for k in order]
    if sorted(order) != list(range(n)):
        raise ValidationError(f"order {order} is not a permutation of {n} factors")
    t = m.reshape(dims + dims)
    t = np.transpose(t, order + [n + k for k in order])
    return t.reshape(m.shape)


def normalize_phases(vectors: np.ndarray, cutoff: float = 1e-12) -> np.ndarray:
    """Rotate each column so its first non-negligible component is real positive."""
    v = np.array(vectors, dtype=complex, copy=True)
    for j in range(v.shape[1]):
        col = v[:, j]
        scale = np.max(np.abs(col)) if col.size else 0.0
        if scale == 0.0:
            continue
        idx = int(np.argmax(np.abs(col) > cutoff * max(scale, 1.0)))
        phase = col[idx] / abs(col[idx])
        v[:, j] = col / phase
        v[idx, j] = abs(v[idx, j])
    return v


def eig_hermitian(m, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ascending real eigenvalues and an orthonormal eigenvector matrix
    whose columns follow the first-nonzero-component-real-positive convention.
    """
    m = as_square(m)
    defect = float(np.linalg.norm(m - dagger(m)))
    if defect > tol.eps_hermitian:
        raise ValidationError(f"not Hermitian: ||m - m^dagger||_F = {defect:.3e}")
    h = 0.5 * (m + dagger(m))
    w, v = np.linalg.eigh(h)
    v = normalize_phases(v)

    scale = max(1.0, float(np.linalg.norm(m)))
    resid = float(np.linalg.norm(h @ v - v * w))
    ortho = float(np.linalg.norm(dagger(v) @ v - np.eye(v.shape[1])))
    if resid > tol.eps_equality * scale or ortho > tol.eps_equality * max(1.0, v.shape[1]):
        raise NumericalInvariantError(
            f"eigendecomposition residual {resid:.3e}, orthonormality defect {ortho:.3e}"
        )
    return w, v


def range_basis(m, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) for the column space of ``m``.

    Singular directions below ``tol.eps_equality * sigma_max`` are dropped; a
    zero matrix yields an ``(rows, 0)`` array.
    """
    m = as_matrix(m)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    rank = int(np.sum(s > tol.eps_equality * s[0]))
    return normalize_phases(u[:, :rank])


def projector_onto(basis: np.ndarray) -> np.ndarray:
    """Orthogonal projector ``B B^dagger`` for orthonormal columns ``B``."""
    basis = np.asarray(basis, dtype=complex)
    return basis @ dagger(basis)


def is_orthonormal(basis, tol: Tolerance = DEFAULT_TOL) -> bool:
    b = as_matrix(basis, "basis")
    return float(np.linalg.norm(dagger(b) @ b - np.eye(b.shape[1]))) <= tol.eps_equality * max(
        1.0, b.shape[1]
    )
