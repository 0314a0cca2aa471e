"""Dense complex linear algebra and quantum-state primitives.

Conventions shared by every module:
- Operators are dense ``numpy`` complex128 arrays (``CMatrix``).
- Qubit 0 is the most-significant bit of a computational-basis index, and
  the left factor of a Kronecker product owns the most-significant index.
- Fidelity is the trace overlap Tr[rho0 rhot], not the Uhlmann fidelity.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import reduce
from math import prod
from typing import TYPE_CHECKING

import numpy as np
import numpy.typing as npt
from scipy.stats import unitary_group

from apps.dq_core.errors import (
    DimensionMismatchError,
    InvalidStateError,
    NotCPTPError,
    NotHermitianError,
)

if TYPE_CHECKING:
    from apps.dq_core.channels import QuantumChannel

logger = logging.getLogger(__name__)

CMatrix = npt.NDArray[np.complex128]

# Tolerances
ALGEBRA_TOL = 1e-10
POSITIVITY_TOL = 1e-10
CPTP_TOL = 1e-10
# Looser check applied on every DensityMatrix construction (no eigensolve).
STATE_TOL = 1e-8

PAULI: dict[str, CMatrix] = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def as_cmatrix(a: npt.ArrayLike) -> CMatrix:
    """Coerce input to a finite 2-D complex128 array.

    Raises:
        DimensionMismatchError: If the input is not two-dimensional.
        InvalidStateError: If any entry is NaN or infinite.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionMismatchError(f"Expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidStateError("Matrix contains NaN or infinite entries")
    return m


def _require_square(m: CMatrix, what: str = "matrix") -> int:
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"{what} must be square, got shape {m.shape}")
    return int(m.shape[0])


def hermiticity_residual(m: CMatrix) -> float:
    """Max-norm distance between a matrix and its adjoint."""
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def unitarity_residual(u: CMatrix) -> float:
    """Max-norm of U†U − I."""
    dim = _require_square(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(dim))))


def is_hermitian(m: CMatrix, tol: float = ALGEBRA_TOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return hermiticity_residual(m) <= tol * scale


def is_unitary(u: CMatrix, tol: float = ALGEBRA_TOL) -> bool:
    return unitarity_residual(u) <= tol


def canonical_phase(m: npt.ArrayLike) -> CMatrix:
    """Rescale by a global phase so the largest-magnitude entry is real positive.

    Ties within 1e-12 are broken by the first entry in row-major order, which
    keeps the convention stable under rounding noise.
    """
    arr = np.asarray(m, dtype=np.complex128)
    flat = arr.ravel()
    if flat.size == 0:
        return arr
    mags = np.abs(flat)
    peak = float(mags.max())
    if peak == 0.0:
        return arr
    idx = int(np.flatnonzero(mags >= peak - 1e-12)[0])
    phase = flat[idx] / abs(flat[idx])
    result: CMatrix = arr * np.conj(phase)
    return result


# ─────────────────────────────────────────────────────────────────────────────
# State types
# ─────────────────────────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A density operator on a finite-dimensional Hilbert space.

    Construction checks shape, Hermiticity and unit trace cheaply. Positivity
    needs an eigensolve and is checked by ``validate``.
    """

    matrix: CMatrix

    def __post_init__(self) -> None:
        m = as_cmatrix(self.matrix)
        _require_square(m, "Density matrix")
        if hermiticity_residual(m) > STATE_TOL:
            raise InvalidStateError("Density matrix is not Hermitian")
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > STATE_TOL:
            raise InvalidStateError(f"Density matrix trace is {trace:.3e}, expected 1")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def purity(self) -> float:
        return float(np.real(np.einsum("ij,ji->", self.matrix, self.matrix)))

    def validate(self, tol: float = POSITIVITY_TOL) -> DensityMatrix:
        """Check positivity; returns self so calls can be chained.

        Raises:
            InvalidStateError: If the smallest eigenvalue is below ``-tol``.
        """
        w = np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)
        if w[0] < -tol:
            raise InvalidStateError(f"Density matrix has eigenvalue {w[0]:.3e} < -{tol}")
        return self

    @classmethod
    def from_vector(cls, psi: npt.ArrayLike) -> DensityMatrix:
        """Pure state |psi><psi| (the vector is normalized first)."""
        v = np.asarray(psi, dtype=np.complex128).ravel()
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise InvalidStateError("Cannot build a state from the zero vector")
        v = v / norm
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityMatrix:
        return cls(np.eye(dim, dtype=np.complex128) / dim)


@dataclass(frozen=True, eq=False)
class StateVector:
    """A unit-norm pure state."""

    amplitudes: CMatrix

    def __post_init__(self) -> None:
        v = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        if not np.all(np.isfinite(v)):
            raise InvalidStateError("State vector contains NaN or infinite entries")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > STATE_TOL:
            raise InvalidStateError(f"State vector norm is {norm:.6f}, expected 1")
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.shape[0])

    def to_density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: StateVector) -> complex:
        """<self|other>."""
        if other.dim != self.dim:
            raise DimensionMismatchError(f"State dims differ: {self.dim} vs {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


# ─────────────────────────────────────────────────────────────────────────────
# Operations
# ─────────────────────────────────────────────────────────────────────────────
def tensor(a: npt.ArrayLike, b: npt.ArrayLike, *rest: npt.ArrayLike) -> CMatrix:
    """Kronecker product, left factor most significant."""
    factors = [as_cmatrix(a), as_cmatrix(b), *(as_cmatrix(r) for r in rest)]
    result: CMatrix = reduce(np.kron, factors)
    return result


def kron_power(a: npt.ArrayLike, n: int) -> CMatrix:
    """n-fold Kronecker power of a single operator (n >= 1)."""
    m = as_cmatrix(a)
    result: CMatrix = reduce(np.kron, [m] * n)
    return result


def partial_trace_array(matrix: CMatrix, dims: Sequence[int], keep: Sequence[int]) -> CMatrix:
    """Partial trace of a raw (not necessarily normalized) operator.

    Args:
        matrix: Square operator on the composite space.
        dims: Subsystem dimensions, most significant first.
        keep: Indices of subsystems to keep; order in the output follows ``dims``.

    Returns:
        Reduced operator over the kept subsystems.

    Raises:
        DimensionMismatchError: If ``dims`` does not factor the matrix or
            ``keep`` names a missing subsystem.
    """
    dims = [int(d) for d in dims]
    n = len(dims)
    if prod(dims) != matrix.shape[0] or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(
            f"Subsystem dims {dims} do not factor a {matrix.shape} operator"
        )
    kept = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in kept):
        raise DimensionMismatchError(f"keep={list(keep)} out of range for {n} subsystems")

    t = matrix.reshape(dims + dims)
    row_labels = list(range(n))
    col_labels = [n + i if i in kept else i for i in range(n)]
    out_labels = kept + [n + i for i in kept]
    reduced = np.einsum(t, row_labels + col_labels, out_labels)
    dk = prod(dims[i] for i in kept)
    result: CMatrix = np.asarray(reduced, dtype=np.complex128).reshape(dk, dk)
    return result


def partial_trace(rho: DensityMatrix, dims: Sequence[int], keep: Sequence[int]) -> DensityMatrix:
    """Reduced density matrix over the ``keep`` subsystems."""
    return DensityMatrix(partial_trace_array(rho.matrix, dims, keep))


def fidelity(rho0: DensityMatrix, rhot: DensityMatrix) -> float:
    """Trace-overlap fidelity F = Re Tr[rho0 rhot]."""
    if rho0.dim != rhot.dim:
        raise DimensionMismatchError(f"State dims differ: {rho0.dim} vs {rhot.dim}")
    return float(np.real(np.einsum("ij,ji->", rho0.matrix, rhot.matrix)))


def kraus_action(kraus: Sequence[CMatrix], rho: CMatrix) -> CMatrix:
    """Raw sum Σ_a A_a rho A_a† with no validation."""
    out = np.zeros_like(rho, dtype=np.complex128)
    for a in kraus:
        out += a @ rho @ a.conj().T
    return out


def apply_channel(ch: QuantumChannel, rho: DensityMatrix) -> DensityMatrix:
    """Apply a CPTP channel in operator-sum form.

    Diagonal channels are applied elementwise through their damping matrix.

    Raises:
        DimensionMismatchError: If the channel and state dims differ.
        NotCPTPError: If the completeness residual exceeds ``CPTP_TOL``.
    """
    if ch.dim != rho.dim:
        raise DimensionMismatchError(f"Channel dim {ch.dim} != state dim {rho.dim}")
    if ch.completeness_residual > CPTP_TOL:
        raise NotCPTPError(
            f"Channel '{ch.label}' completeness residual {ch.completeness_residual:.3e}"
        )
    if ch.is_diagonal:
        out = rho.matrix * ch.damping
    else:
        out = kraus_action(ch.kraus, rho.matrix)
    return DensityMatrix((out + out.conj().T) / 2)


def matrix_exp(h: npt.ArrayLike, t: float) -> CMatrix:
    """Unitary exp(-i h t) via Hermitian eigendecomposition.

    Raises:
        DimensionMismatchError: If ``h`` is not square.
        NotHermitianError: If ``h`` is not Hermitian within tolerance.
    """
    m = as_cmatrix(h)
    dim = _require_square(m, "Generator")
    if t == 0:
        return np.eye(dim, dtype=np.complex128)
    if not is_hermitian(m):
        raise NotHermitianError(f"Generator is not Hermitian (residual {hermiticity_residual(m):.3e})")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    result: CMatrix = (v * np.exp(-1j * w * t)) @ v.conj().T
    return result


def apply_local(op: CMatrix, vector: CMatrix, site: int, dims: Sequence[int]) -> CMatrix:
    """Act with ``op`` on subsystem ``site`` of a state vector."""
    dims = list(dims)
    psi = vector.reshape(dims)
    moved = np.tensordot(op, psi, axes=([1], [site]))
    result: CMatrix = np.moveaxis(moved, 0, site).reshape(-1)
    return result


def conjugate_local(op: CMatrix, rho: CMatrix, site: int, dims: Sequence[int]) -> CMatrix:
    """Return op_site · rho · op_site† for an operator acting on one subsystem."""
    dims = list(dims)
    n = len(dims)
    t = rho.reshape(dims + dims)
    t = np.moveaxis(np.tensordot(op, t, axes=([1], [site])), 0, site)
    t = np.moveaxis(np.tensordot(op.conj(), t, axes=([1], [n + site])), 0, n + site)
    total = prod(dims)
    result: CMatrix = t.reshape(total, total)
    return result


# ─────────────────────────────────────────────────────────────────────────────
# Seeded random instances
# ─────────────────────────────────────────────────────────────────────────────
def random_unitary(dim: int, rng: np.random.Generator) -> CMatrix:
    """Haar-random unitary."""
    result: CMatrix = np.asarray(unitary_group.rvs(dim, random_state=rng), dtype=np.complex128)
    return result


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> CMatrix:
    """Gaussian Hermitian matrix with entries of order ``scale / sqrt(dim)``."""
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    result: CMatrix = scale * (x + x.conj().T) / (2 * np.sqrt(dim))
    return result


def random_state(dim: int, rng: np.random.Generator) -> StateVector:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(v / np.linalg.norm(v))


def random_density_matrix(
    dim: int, rng: np.random.Generator, rank: int | None = None
) -> DensityMatrix:
    """Random mixed state G G† / Tr with G of shape (dim, rank)."""
    r = dim if rank is None else rank
    g = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m))
