"""Decoherence-free subspace detection, verification and codeword construction."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property
from math import comb

import numpy as np
import numpy.typing as npt
import scipy.linalg as la

from apps.dq_core.channels import QuantumChannel, collective_spin, f_values
from apps.dq_core.errors import CodeConstructionError, DimensionMismatchError
from apps.dq_core.qcore import CMatrix, as_cmatrix, canonical_phase

logger = logging.getLogger(__name__)

ISOMETRY_TOL = 1e-12
DFS_TOL = 1e-8
NULL_SPACE_THRESHOLD = 1e-10
# Largest k for which the dense f=0 codeword matrix is built.
MAX_DEPHASING_CODE_QUBITS = 12


# ─────────────────────────────────────────────────────────────────────────────
# Code spaces
# ─────────────────────────────────────────────────────────────────────────────
def orthonormal_complement(isometry: CMatrix) -> CMatrix:
    """Deterministic orthonormal basis of the complement of span(isometry).

    Built by pivoted QR of the complement projector; columns are ordered by
    the computational-basis index of their dominant amplitude and phase
    canonicalized.
    """
    phys, code = isometry.shape
    if phys == code:
        return np.zeros((phys, 0), dtype=np.complex128)
    projector = np.eye(phys) - isometry @ isometry.conj().T
    q, _, _ = la.qr(projector, pivoting=True)
    cols = [canonical_phase(q[:, i]) for i in range(phys - code)]
    dominant = [int(np.argmax(np.abs(c) >= np.abs(c).max() - 1e-12)) for c in cols]
    order = sorted(range(len(cols)), key=lambda i: (dominant[i], i))
    result: CMatrix = np.column_stack([cols[i] for i in order])
    return result


@dataclass(frozen=True, eq=False)
class CodeSpace:
    """An isometry whose orthonormal columns are the codewords."""

    isometry: CMatrix
    label: str = ""

    def __post_init__(self) -> None:
        v = as_cmatrix(self.isometry)
        phys, code = v.shape
        if code < 1 or code > phys:
            raise CodeConstructionError(f"Invalid code shape {v.shape}")
        deviation = float(np.max(np.abs(v.conj().T @ v - np.eye(code))))
        if deviation > ISOMETRY_TOL:
            raise CodeConstructionError(f"Codewords are not orthonormal (deviation {deviation:.3e})")
        object.__setattr__(self, "isometry", v)

    @property
    def phys_dim(self) -> int:
        return int(self.isometry.shape[0])

    @property
    def code_dim(self) -> int:
        return int(self.isometry.shape[1])

    @cached_property
    def projector(self) -> CMatrix:
        result: CMatrix = self.isometry @ self.isometry.conj().T
        return result

    @cached_property
    def complement(self) -> CMatrix:
        return orthonormal_complement(self.isometry)

    @cached_property
    def frame(self) -> CMatrix:
        """Unitary [V, V_perp] with the code first."""
        result: CMatrix = np.hstack([self.isometry, self.complement])
        return result

    @classmethod
    def from_indices(cls, phys_dim: int, indices: Sequence[int], label: str = "") -> CodeSpace:
        """Code spanned by computational-basis vectors, in the given order."""
        v = np.zeros((phys_dim, len(indices)), dtype=np.complex128)
        for col, idx in enumerate(indices):
            v[idx, col] = 1.0
        return cls(v, label)


# ─────────────────────────────────────────────────────────────────────────────
# Reports
# ─────────────────────────────────────────────────────────────────────────────
@dataclass
class DfsReport:
    """Verdict of the Kraus-level DFS check.

    ``coherence_deficit`` is max_ij (1 - |Σ_a C_a[i,i] C_a[j,j]*|) with
    C_a = U†V†A_aV: the damping left on code-basis coherences in the fitted
    frame. It equals 1 - |D_jk| for computational-basis codes.
    """

    is_dfs: bool
    residual: float
    fitted_g: npt.NDArray[np.complex128]
    fitted_u: CMatrix
    tol: float
    coherence_deficit: float = 0.0


@dataclass
class HamiltonianDfsReport:
    is_dfs: bool
    eigenvalues: npt.NDArray[np.complex128]
    residual: float
    tol: float = DFS_TOL
    per_operator: list[float] = field(default_factory=list)


# ─────────────────────────────────────────────────────────────────────────────
# Operations
# ─────────────────────────────────────────────────────────────────────────────
def sector_decomposition(k: int) -> dict[int, tuple[int, ...]]:
    """Partition basis indices by f(j), sectors in descending f."""
    f = f_values(k)
    sectors: dict[int, tuple[int, ...]] = {}
    for value in sorted({int(x) for x in f}, reverse=True):
        sectors[value] = tuple(int(i) for i in np.flatnonzero(f == value))
    return sectors


def verify_dfs(ch: QuantumChannel, code: CodeSpace, tol: float = DFS_TOL) -> DfsReport:
    """Check that every Kraus operator acts on the code as g_a times one shared unitary.

    The shared unitary is the polar factor of Σ_a c_a V†A_aV with phases
    aligned to the largest block; g_a is then the least-squares scalar. The
    residual is measured on full columns A_aV, so leakage out of the code is
    caught as well.

    Raises:
        DimensionMismatchError: If the channel and code dims differ.
    """
    if ch.dim != code.phys_dim:
        raise DimensionMismatchError(f"Channel dim {ch.dim} != code phys_dim {code.phys_dim}")
    v = code.isometry
    d = code.code_dim
    images = np.stack([a @ v for a in ch.kraus])
    blocks = np.einsum("pi,apj->aij", v.conj(), images)

    norms = np.linalg.norm(blocks, axis=(1, 2))
    ref = int(np.argmax(norms))
    align = np.einsum("aij,ij->a", blocks, blocks[ref].conj())
    summed = np.einsum("a,aij->ij", align.conj(), blocks)
    u_fit, _ = la.polar(summed)
    u_fit = canonical_phase(u_fit)

    g = np.einsum("ji,aji->a", u_fit.conj(), blocks) / d
    predicted = np.einsum("a,pj->apj", g, v @ u_fit)
    residual = float(np.max(np.abs(images - predicted)))

    rotated = np.einsum("ji,ajk->aik", u_fit.conj(), blocks)
    diags = np.einsum("aii->ai", rotated)
    coherence = np.abs(diags.T @ diags.conj())
    deficit = float(np.max(1.0 - coherence))

    report = DfsReport(
        is_dfs=residual < tol,
        residual=residual,
        fitted_g=g,
        fitted_u=u_fit,
        tol=tol,
        coherence_deficit=deficit,
    )
    logger.debug(f"verify_dfs '{ch.label}': residual={residual:.3e}, is_dfs={report.is_dfs}")
    return report


def verify_hamiltonian_dfs(
    f_ops: Sequence[npt.ArrayLike], code: CodeSpace, tol: float = DFS_TOL
) -> HamiltonianDfsReport:
    """Check F_a V = a_a V for each system operator, a_a the first codeword's Rayleigh quotient."""
    v = code.isometry
    first = v[:, 0]
    eigenvalues = []
    per_op = []
    for f in f_ops:
        m = as_cmatrix(f)
        if m.shape != (code.phys_dim, code.phys_dim):
            raise DimensionMismatchError(f"Operator shape {m.shape} != phys_dim {code.phys_dim}")
        a = complex(np.vdot(first, m @ first))
        eigenvalues.append(a)
        per_op.append(float(np.max(np.abs(m @ v - a * v))))
    residual = max(per_op) if per_op else 0.0
    return HamiltonianDfsReport(
        is_dfs=residual < tol,
        eigenvalues=np.array(eigenvalues, dtype=np.complex128),
        residual=residual,
        tol=tol,
        per_operator=per_op,
    )


def dfs_codewords_dephasing(k: int) -> CodeSpace:
    """The f = 0 sector of k (even) qubits as computational-basis codewords."""
    if k % 2 or k < 2:
        raise CodeConstructionError(f"Dephasing DFS needs an even qubit count >= 2, got {k}")
    if k > MAX_DEPHASING_CODE_QUBITS:
        raise CodeConstructionError(f"k={k} exceeds the dense code limit {MAX_DEPHASING_CODE_QUBITS}")
    indices = sector_decomposition(k)[0]
    assert len(indices) == comb(k, k // 2)
    return CodeSpace.from_indices(2**k, indices, f"dephasing_dfs(k={k})")


def _singlet() -> CMatrix:
    s = np.zeros(4, dtype=np.complex128)
    s[1], s[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    return s


def dfs_codewords_collective(k: int = 4) -> CodeSpace:
    """Two-dimensional singlet sector of four qubits under full collective decoherence.

    Column 0 is singlet⊗singlet on pairs (0,1),(2,3); column 1 spans the rest
    of the common null space of S_x, S_y, S_z.
    """
    if k != 4:
        raise CodeConstructionError(f"Collective DFS is only supported for k=4, got {k}")
    constraints = np.vstack([collective_spin(k, axis) for axis in ("x", "y", "z")])
    _, s, vh = np.linalg.svd(constraints)
    rank = int(np.sum(s > NULL_SPACE_THRESHOLD))
    null = vh[rank:].conj().T
    if null.shape[1] != 2:
        raise CodeConstructionError(f"Collective null space has dimension {null.shape[1]}, expected 2")

    null_proj = null @ null.conj().T
    first = null_proj @ np.kron(_singlet(), _singlet())
    first = canonical_phase(first / np.linalg.norm(first))
    rest = null_proj - np.outer(first, first.conj())
    col = int(np.argmax(np.linalg.norm(rest, axis=0)))
    second = rest[:, col]
    second = canonical_phase(second / np.linalg.norm(second))
    logger.info(f"Built collective DFS codewords on {k} qubits (null-space rank {rank})")
    return CodeSpace(np.column_stack([first, second]), "collective_dfs(k=4)")
