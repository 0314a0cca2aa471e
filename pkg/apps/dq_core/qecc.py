"""Knill-Laflamme verification, recovery construction and the 5-qubit perfect code."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg as la

from apps.dq_core.channels import QuantumChannel
from apps.dq_core.dfs import CodeSpace
from apps.dq_core.errors import DimensionMismatchError, KLViolationError, NotUnitaryError
from apps.dq_core.qcore import (
    ALGEBRA_TOL,
    PAULI,
    CMatrix,
    DensityMatrix,
    apply_channel,
    as_cmatrix,
    canonical_phase,
    is_unitary,
)

logger = logging.getLogger(__name__)

KL_TOL = 1e-10
FIVE_QUBIT_GENERATOR = "XZZXI"


@dataclass
class KlReport:
    """Knill-Laflamme verdict: V†A_a†A_bV = gamma_ab I."""

    passes: bool
    gamma: CMatrix
    off_block_residual: float
    gamma_rank: int
    degenerate: bool
    tol: float = KL_TOL

    @property
    def n_errors(self) -> int:
        return int(self.gamma.shape[0])


@dataclass
class RecoverySet:
    """Recovery operators R_r with coefficients lambda_ra of R_r A_a V = lambda_ra V."""

    ops: tuple[CMatrix, ...]
    lambda_coeffs: CMatrix
    labels: tuple[str, ...] = ()

    def as_channel(self) -> QuantumChannel:
        return QuantumChannel(self.ops, "recovery")


@dataclass
class Theorem2Report:
    holds: bool
    deviation: float
    constants: npt.NDArray[np.complex128]


# ─────────────────────────────────────────────────────────────────────────────
# Paulis
# ─────────────────────────────────────────────────────────────────────────────
def pauli_operator(label: str) -> CMatrix:
    """Tensor product of Paulis named by a string such as "XZZXI"."""
    op = np.ones((1, 1), dtype=np.complex128)
    for ch in label.upper():
        op = np.kron(op, PAULI[ch])
    return op


def single_qubit_paulis(n: int) -> tuple[list[CMatrix], list[str]]:
    """Identity plus X, Y, Z on each of n qubits (1 + 3n operators)."""
    labels = ["I" * n]
    for q in range(n):
        for p in "XYZ":
            labels.append("I" * q + p + "I" * (n - q - 1))
    return [pauli_operator(lbl) for lbl in labels], labels


# ─────────────────────────────────────────────────────────────────────────────
# Knill-Laflamme
# ─────────────────────────────────────────────────────────────────────────────
def kl_conditions(
    errors: Sequence[npt.ArrayLike], code: CodeSpace, tol: float = KL_TOL
) -> KlReport:
    """KL check of an arbitrary error list on a code.

    gamma_ab = Tr[V†A_a†A_bV] / code_dim; the rank counts singular values of
    gamma above tol·sigma_max and degeneracy compares it with the number of
    errors of non-negligible weight.
    """
    v = code.isometry
    mats = [as_cmatrix(e) for e in errors]
    for m in mats:
        if m.shape != (code.phys_dim, code.phys_dim):
            raise DimensionMismatchError(f"Error shape {m.shape} != phys_dim {code.phys_dim}")
    images = np.stack([m @ v for m in mats])
    overlaps = np.einsum("api,bpj->abij", images.conj(), images)
    gamma = np.einsum("abii->ab", overlaps) / code.code_dim
    eye = np.eye(code.code_dim)
    residual = float(np.max(np.abs(overlaps - gamma[:, :, None, None] * eye)))

    s = np.linalg.svd(gamma, compute_uv=False)
    rank = int(np.sum(s > tol * s[0])) if s[0] > 0 else 0
    weighted = int(np.sum(np.real(np.diagonal(gamma)) > tol))
    return KlReport(
        passes=residual < tol,
        gamma=gamma,
        off_block_residual=residual,
        gamma_rank=rank,
        degenerate=rank < weighted,
        tol=tol,
    )


def kl_gamma(ch: QuantumChannel, code: CodeSpace, tol: float = KL_TOL) -> KlReport:
    """KL check of a channel's Kraus operators on a code."""
    if ch.dim != code.phys_dim:
        raise DimensionMismatchError(f"Channel dim {ch.dim} != code phys_dim {code.phys_dim}")
    return kl_conditions(ch.kraus, code, tol)


def _diagonalize_gamma(gamma: CMatrix, tol: float) -> tuple[npt.NDArray[np.float64], CMatrix]:
    """Eigenpairs of gamma above threshold, largest first.

    An already diagonal gamma keeps the input error order so recoveries stay
    labelled by their errors.
    """
    diag = np.real(np.diagonal(gamma))
    off = gamma - np.diag(np.diagonal(gamma))
    if float(np.max(np.abs(off))) <= tol * max(float(diag.max()), 0.0):
        mu, u = diag, np.eye(len(diag), dtype=np.complex128)
    else:
        mu, u = np.linalg.eigh((gamma + gamma.conj().T) / 2)
        mu, u = mu[::-1], u[:, ::-1]
    keep = mu > tol * mu.max()
    return mu[keep], u[:, keep]


def build_recovery(
    errors: Sequence[npt.ArrayLike],
    code: CodeSpace,
    labels: Sequence[str] | None = None,
    tol: float = KL_TOL,
) -> RecoverySet:
    """Standard recovery for an error set that satisfies KL on the code.

    gamma is diagonalized into orthogonal effective errors F_k; each syndrome
    space F_kV is mapped isometrically back to the code by R_k = V W_k†, and
    a projector onto the remaining complement completes the channel.

    Raises:
        KLViolationError: If the KL conditions or the lambda_ra form fail.
    """
    report = kl_conditions(errors, code, tol)
    if not report.passes:
        raise KLViolationError(f"KL off-block residual {report.off_block_residual:.3e} >= {tol}")
    mats = [as_cmatrix(e) for e in errors]
    v = code.isometry
    mu, u = _diagonalize_gamma(report.gamma, tol)

    syndrome_maps = []
    for k in range(len(mu)):
        f_k = sum(u[a, k] * mats[a] for a in range(len(mats)))
        syndrome_maps.append(f_k @ v / np.sqrt(mu[k]))
    ops = [v @ w.conj().T for w in syndrome_maps]

    stacked = np.hstack(syndrome_maps)
    q, r, _ = la.qr(stacked, pivoting=True, mode="economic")
    span = int(np.sum(np.abs(np.diagonal(r)) > tol))
    basis = q[:, :span]
    complement = np.eye(code.phys_dim) - basis @ basis.conj().T
    has_complement = float(np.max(np.abs(complement))) > tol
    if has_complement:
        ops.append(complement)

    lam = np.zeros((len(ops), len(mats)), dtype=np.complex128)
    worst = 0.0
    for r_idx, rec in enumerate(ops):
        for a, e in enumerate(mats):
            image = rec @ e @ v
            lam[r_idx, a] = np.trace(v.conj().T @ image) / code.code_dim
            worst = max(worst, float(np.max(np.abs(image - lam[r_idx, a] * v))))
    if worst > max(tol, 1e3 * tol * float(np.max(mu))):
        raise KLViolationError(f"Recovery does not reach lambda_ra form (residual {worst:.3e})")

    names: list[str] = []
    for r_idx in range(len(ops)):
        if has_complement and r_idx == len(ops) - 1:
            names.append("complement")
        elif labels is not None:
            names.append(labels[int(np.argmax(np.abs(lam[r_idx])))])
        else:
            names.append(f"r{r_idx}")
    logger.info(f"Built recovery: {len(syndrome_maps)} syndromes, complement={has_complement}")
    return RecoverySet(tuple(ops), lam, tuple(names))


def apply_recovery(rec: RecoverySet, rho: DensityMatrix) -> DensityMatrix:
    """Σ_r R_r rho R_r†."""
    return apply_channel(rec.as_channel(), rho)


def verify_theorem2(
    rec: RecoverySet, u_s: npt.ArrayLike, code: CodeSpace, tol: float = ALGEBRA_TOL
) -> Theorem2Report:
    """Check that every recovery restricts to the code as c_r·U_S†.

    Restriction is read in block form: V†R_rV must be proportional to U_S†
    and both off-diagonal blocks (code to complement and back) must vanish.
    Deviations are spectral norms; c_r is the least-squares constant.
    """
    u = as_cmatrix(u_s)
    if u.shape != (code.code_dim, code.code_dim) or not is_unitary(u):
        raise NotUnitaryError("u_s must be a unitary on the code dimension")
    v = code.isometry
    v_perp = code.complement
    target = u.conj().T
    constants = []
    deviation = 0.0
    for rec_op in rec.ops:
        inner = v.conj().T @ rec_op @ v
        c = complex(np.trace(u @ inner)) / code.code_dim
        constants.append(c)
        dev = float(np.linalg.norm(inner - c * target, 2))
        if v_perp.shape[1]:
            dev = max(
                dev,
                float(np.linalg.norm(v_perp.conj().T @ rec_op @ v, 2)),
                float(np.linalg.norm(v.conj().T @ rec_op @ v_perp, 2)),
            )
        deviation = max(deviation, dev)
    return Theorem2Report(deviation < tol, deviation, np.array(constants, dtype=np.complex128))


# ─────────────────────────────────────────────────────────────────────────────
# 5-qubit perfect code
# ─────────────────────────────────────────────────────────────────────────────
def five_qubit_stabilizers() -> list[str]:
    g = FIVE_QUBIT_GENERATOR
    return [g[-i:] + g[:-i] if i else g for i in range(4)]


def five_qubit_code() -> CodeSpace:
    """Distance-3 code: joint +1 eigenspace of the cyclic shifts of XZZXI."""
    projector = np.eye(32, dtype=np.complex128)
    for label in five_qubit_stabilizers():
        projector = projector @ (np.eye(32) + pauli_operator(label)) / 2
    zero = np.zeros(32, dtype=np.complex128)
    zero[0] = 1.0
    logical_zero = projector @ zero
    logical_zero = canonical_phase(logical_zero / np.linalg.norm(logical_zero))
    logical_one = canonical_phase(pauli_operator("XXXXX") @ logical_zero)
    return CodeSpace(np.column_stack([logical_zero, logical_one]), "five_qubit")
