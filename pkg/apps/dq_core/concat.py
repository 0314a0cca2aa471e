"""Concatenated DFS-QECC code: DFS blocks inside the 5-qubit perfect code.

The DFS-level error basis is {X, Y, Z, P_j, P_j Z}; leakage out of a block
(P_j) is detected with an ancilla block and a modified controlled-NOT, reset
to |0_L>, and the residual logical Pauli is fixed by the outer code.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import numpy.typing as npt

from apps.dq_core.dfs import CodeSpace, dfs_codewords_collective, dfs_codewords_dephasing
from apps.dq_core.errors import (
    CodeConstructionError,
    DimensionMismatchError,
    InvalidStateError,
    ParameterError,
)
from apps.dq_core.qcore import (
    PAULI,
    CMatrix,
    DensityMatrix,
    StateVector,
    apply_local,
    conjugate_local,
    kron_power,
    partial_trace_array,
)
from apps.dq_core.qecc import RecoverySet, build_recovery, five_qubit_code, single_qubit_paulis

logger = logging.getLogger(__name__)

N_BLOCKS = 5
MAX_REGISTER_QUBITS = 10
ANCILLA_TOL = 1e-10
# Squared norm below which a branch is treated as exactly zero.
BRANCH_CUTOFF = 1e-30

INNER_CODES: dict[str, Callable[[], CodeSpace]] = {
    "dephasing2": lambda: dfs_codewords_dephasing(2),
    "collective4": lambda: dfs_codewords_collective(4),
}

_ERROR_NAME = re.compile(r"^(?:([XYZ])|P(\d+)(Z?))$")


def inner_code(name: str) -> CodeSpace:
    """Inner DFS code by selector name."""
    try:
        return INNER_CODES[name]()
    except KeyError as e:
        raise ParameterError(f"Unknown inner code '{name}', choose from {sorted(INNER_CODES)}") from e


# ─────────────────────────────────────────────────────────────────────────────
# Block-level operators
# ─────────────────────────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class LogicalOps:
    """Logical Paulis and leakage operators of one DFS block.

    ``basis`` holds |0_L>, |1_L> followed by the complement vectors |j_L>.
    """

    x_l: CMatrix
    y_l: CMatrix
    z_l: CMatrix
    p_j: tuple[CMatrix, ...]
    basis: CMatrix
    basis_labels: tuple[str, ...]

    @property
    def block_dim(self) -> int:
        return int(self.basis.shape[0])

    def leakage(self, j: int) -> CMatrix:
        """P_j for complement label j >= 2."""
        if not 2 <= j < self.block_dim:
            raise ParameterError(f"Leakage label must be in [2, {self.block_dim - 1}], got {j}")
        return self.p_j[j - 2]


def logical_ops(inner: CodeSpace) -> LogicalOps:
    """Embed sigma_x, sigma_z as V sigma V† and build P_j = |j_L>(<0_L| + <1_L|)."""
    if inner.code_dim != 2:
        raise CodeConstructionError(f"Inner code must encode one qubit, got code_dim {inner.code_dim}")
    v = inner.isometry
    x_l = v @ PAULI["X"] @ v.conj().T
    z_l = v @ PAULI["Z"] @ v.conj().T
    plus_bra = (v[:, 0] + v[:, 1]).conj()
    comp = inner.complement
    p_j = tuple(np.outer(comp[:, i], plus_bra) for i in range(comp.shape[1]))
    basis = inner.frame
    labels = tuple(f"{j}_L" for j in range(inner.phys_dim))
    return LogicalOps(x_l, x_l @ z_l, z_l, p_j, basis, labels)


def decompose_leakage(q3: npt.ArrayLike, ops: LogicalOps) -> tuple[CMatrix, float]:
    """Least-squares expansion of a code-to-complement block over {P_j, P_j Z}.

    Args:
        q3: (n_complement, 2) block in the logical frame.
        ops: Block operators.

    Returns:
        Coefficients shaped (n_complement, 2) as [P_j, P_j Z] pairs, and the
        max-norm residual of the reconstruction.
    """
    d = ops.block_dim
    q = np.asarray(q3, dtype=np.complex128)
    if q.shape != (d - 2, 2):
        raise DimensionMismatchError(f"Q3 block shape {q.shape}, expected {(d - 2, 2)}")
    target = ops.basis[:, 2:] @ q @ ops.basis[:, :2].conj().T
    dictionary = []
    for p in ops.p_j:
        dictionary.extend([p.ravel(), (p @ ops.z_l).ravel()])
    a = np.column_stack(dictionary)
    coeffs, *_ = np.linalg.lstsq(a, target.ravel(), rcond=None)
    residual = float(np.max(np.abs(a @ coeffs - target.ravel())))
    return coeffs.reshape(d - 2, 2), residual


def modified_cnot(inner: CodeSpace) -> CMatrix:
    """Controlled operation on (data block, ancilla block).

    In the logical frame: |0,0> -> |0,0>, |1,0> -> |1,0>, |j,0> -> |j,j>; all
    other inputs are sent, in ascending order, to the unused outputs.
    """
    d = inner.phys_dim
    fixed = {(0, 0): (0, 0), (1, 0): (1, 0)}
    fixed.update({(j, 0): (j, j) for j in range(2, d)})
    used_in = {a * d + b for a, b in fixed}
    used_out = {a * d + b for a, b in fixed.values()}
    perm = np.zeros((d * d, d * d), dtype=np.complex128)
    for (a, b), (c, e) in fixed.items():
        perm[c * d + e, a * d + b] = 1.0
    free_in = [i for i in range(d * d) if i not in used_in]
    free_out = [i for i in range(d * d) if i not in used_out]
    for i, o in zip(free_in, free_out, strict=True):
        perm[o, i] = 1.0
    frame = np.kron(inner.frame, inner.frame)
    result: CMatrix = frame @ perm @ frame.conj().T
    return result


def _reset_unitary(ops: LogicalOps, j: int) -> CMatrix:
    """Swap |j_L> and |0_L>; restricted to |j_L> it is the recovery |j_L> -> |0_L>."""
    perm = list(range(ops.block_dim))
    perm[0], perm[j] = j, 0
    swap = np.eye(ops.block_dim, dtype=np.complex128)[perm]
    result: CMatrix = ops.basis @ swap @ ops.basis.conj().T
    return result


def _outcomes(ops: LogicalOps) -> list[tuple[int, str]]:
    # Outcome 1_L is unreachable from an ancilla prepared in |0_L>.
    return [(0, "none")] + [(j, f"leaked({j})") for j in range(2, ops.block_dim)]


@dataclass
class LeakageResult:
    """Outcome of one leakage detect/correct round on a single block."""

    state: DensityMatrix
    probabilities: dict[str, float]
    joint: CMatrix
    branch_states: dict[str, CMatrix]

    @property
    def syndrome(self) -> str:
        return max(self.probabilities, key=lambda k: self.probabilities[k])


def leakage_detect_correct(
    block_rho: DensityMatrix, ops: LogicalOps, c_gate: CMatrix
) -> LeakageResult:
    """Attach-measure-recover round on (data block ⊗ ancilla block).

    Applies C, measures the ancilla projectively in the logical frame, and on
    outcome j >= 2 resets the data block |j_L> -> |0_L>. All outcomes are kept
    and averaged with their probabilities.

    Raises:
        DimensionMismatchError: If the state is not on two blocks.
        InvalidStateError: If the ancilla is not in |0_L>.
    """
    d = ops.block_dim
    if block_rho.dim != d * d:
        raise DimensionMismatchError(f"Expected a {d * d}-dim block+ancilla state, got {block_rho.dim}")
    ancilla = partial_trace_array(block_rho.matrix, [d, d], [1])
    zero = ops.basis[:, 0]
    population = float(np.real(np.vdot(zero, ancilla @ zero)))
    if population < 1 - ANCILLA_TOL:
        raise InvalidStateError(f"Ancilla |0_L> population is {population:.6f}")

    joint = c_gate @ block_rho.matrix @ c_gate.conj().T
    joint4 = joint.reshape(d, d, d, d)
    probabilities: dict[str, float] = {}
    branches: dict[str, CMatrix] = {}
    for m, label in _outcomes(ops):
        bm = ops.basis[:, m]
        branch = np.einsum("b,abcd,d->ac", bm.conj(), joint4, bm)
        if m >= 2:
            reset = _reset_unitary(ops, m)
            branch = reset @ branch @ reset.conj().T
        probabilities[label] = float(np.real(np.trace(branch)))
        branches[label] = branch
    total = sum(branches.values(), np.zeros((d, d), dtype=np.complex128))
    return LeakageResult(DensityMatrix((total + total.conj().T) / 2), probabilities, joint, branches)


def leakage_kraus(ops: LogicalOps, c_gate: CMatrix) -> tuple[tuple[str, CMatrix], ...]:
    """Effective data-block Kraus operators of one detect/correct round.

    K_m = S_m (1 ⊗ <m_L|) C (1 ⊗ |0_L>), with S_m the reset for m >= 2.
    """
    d = ops.block_dim
    c4 = c_gate.reshape(d, d, d, d)
    zero = ops.basis[:, 0]
    kraus = []
    for m, label in _outcomes(ops):
        k = np.einsum("b,abcd,d->ac", ops.basis[:, m].conj(), c4, zero)
        if m >= 2:
            k = _reset_unitary(ops, m) @ k
        kraus.append((label, k))
    return tuple(kraus)


def named_block_error(name: str, ops: LogicalOps) -> CMatrix:
    """Block operator for an element of {X, Y, Z, P<j>, P<j>Z}."""
    match = _ERROR_NAME.match(name.strip().upper())
    if not match:
        raise ParameterError(f"Unknown block error '{name}'; use X, Y, Z, P<j> or P<j>Z")
    pauli, j, z = match.groups()
    if pauli:
        return {"X": ops.x_l, "Y": ops.y_l, "Z": ops.z_l}[pauli]
    leak = ops.leakage(int(j))
    return leak @ ops.z_l if z else leak


# ─────────────────────────────────────────────────────────────────────────────
# Concatenated code
# ─────────────────────────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class ConcatCode:
    """Five inner DFS blocks carrying the 5-qubit perfect code."""

    inner: CodeSpace
    outer: CodeSpace
    block_qubits: int
    encoded_zero: StateVector
    encoded_one: StateVector
    n_blocks: int = N_BLOCKS

    def __post_init__(self) -> None:
        if abs(self.encoded_zero.overlap(self.encoded_one)) > 1e-12:
            raise CodeConstructionError("Encoded basis states are not orthogonal")
        for state in (self.encoded_zero, self.encoded_one):
            leak = state.amplitudes - self.lift @ (self.lift.conj().T @ state.amplitudes)
            if float(np.max(np.abs(leak))) > 1e-10:
                raise CodeConstructionError("Encoded state leaves the tensor power of the inner code")

    @property
    def block_dim(self) -> int:
        return self.inner.phys_dim

    @property
    def register_qubits(self) -> int:
        return self.block_qubits * self.n_blocks

    @property
    def register_dim(self) -> int:
        return int(self.block_dim**self.n_blocks)

    @property
    def block_dims(self) -> list[int]:
        return [self.block_dim] * self.n_blocks

    @cached_property
    def lift(self) -> CMatrix:
        """V^(⊗5): logical-block space (32) -> register."""
        return kron_power(self.inner.isometry, self.n_blocks)

    @cached_property
    def ops(self) -> LogicalOps:
        return logical_ops(self.inner)

    @cached_property
    def c_gate(self) -> CMatrix:
        return modified_cnot(self.inner)

    @cached_property
    def block_kraus(self) -> tuple[tuple[str, CMatrix], ...]:
        return leakage_kraus(self.ops, self.c_gate)

    @cached_property
    def outer_recovery(self) -> RecoverySet:
        errors, labels = single_qubit_paulis(self.n_blocks)
        return build_recovery(errors, self.outer, labels)


def build_concat_code(inner: CodeSpace | None = None) -> ConcatCode:
    """Concatenate an inner DFS (default: 2-qubit dephasing DFS) with the 5-qubit code.

    Raises:
        CodeConstructionError: If the register would exceed 10 qubits.
    """
    inner = inner if inner is not None else dfs_codewords_dephasing(2)
    if inner.code_dim != 2:
        raise CodeConstructionError(f"Inner code must encode one qubit, got code_dim {inner.code_dim}")
    block_qubits = int(round(np.log2(inner.phys_dim)))
    if 2**block_qubits != inner.phys_dim:
        raise CodeConstructionError(f"Inner phys_dim {inner.phys_dim} is not a qubit register")
    if block_qubits * N_BLOCKS > MAX_REGISTER_QUBITS:
        raise CodeConstructionError(
            f"{block_qubits}-qubit inner blocks need {block_qubits * N_BLOCKS} qubits; "
            f"register simulation is limited to {MAX_REGISTER_QUBITS} (use block-level checks)"
        )
    outer = five_qubit_code()
    lift = kron_power(inner.isometry, N_BLOCKS)
    zero = StateVector(lift @ outer.isometry[:, 0])
    one = StateVector(lift @ outer.isometry[:, 1])
    logger.info(f"Built concatenated code: {block_qubits * N_BLOCKS} physical qubits")
    return ConcatCode(inner, outer, block_qubits, zero, one)


@lru_cache(maxsize=1)
def default_concat_code() -> ConcatCode:
    return build_concat_code()


def encode_concatenated(alpha: complex, beta: complex, code: ConcatCode) -> StateVector:
    """alpha|0_E> + beta|1_E>.

    Raises:
        InvalidStateError: If |alpha|^2 + |beta|^2 != 1.
    """
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1) > 1e-10:
        raise InvalidStateError(f"|alpha|^2 + |beta|^2 = {norm}, expected 1")
    return StateVector(alpha * code.encoded_zero.amplitudes + beta * code.encoded_one.amplitudes)


def transversal(op: CMatrix, vector: CMatrix, code: ConcatCode) -> CMatrix:
    """Apply one block operator to every block of a register vector."""
    out = vector
    for b in range(code.n_blocks):
        out = apply_local(op, out, b, code.block_dims)
    return out


def apply_block_error(rho: DensityMatrix, op: CMatrix, block: int, code: ConcatCode) -> DensityMatrix:
    """E_block rho E_block† renormalized (leakage operators are not unitary)."""
    if not 0 <= block < code.n_blocks:
        raise ParameterError(f"Block index must be in [0, {code.n_blocks - 1}], got {block}")
    out = conjugate_local(op, rho.matrix, block, code.block_dims)
    trace = float(np.real(np.trace(out)))
    if trace <= 0:
        raise InvalidStateError("Error annihilates the state")
    return DensityMatrix(out / trace)


def apply_physical_pauli(rho: DensityMatrix, qubit: int, pauli: str, code: ConcatCode) -> DensityMatrix:
    """Single physical-qubit Pauli on the register."""
    n = code.register_qubits
    if not 0 <= qubit < n:
        raise ParameterError(f"Qubit index must be in [0, {n - 1}], got {qubit}")
    key = pauli.strip().upper()
    if key not in PAULI:
        raise ParameterError(f"Unknown Pauli '{pauli}'")
    out = conjugate_local(PAULI[key], rho.matrix, qubit, [2] * n)
    return DensityMatrix(out)


# ─────────────────────────────────────────────────────────────────────────────
# Correction cycle
# ─────────────────────────────────────────────────────────────────────────────
@dataclass
class CycleResult:
    """Branch-averaged result of one full correction cycle."""

    state: DensityMatrix
    block_outcomes: list[dict[str, float]]
    outer_syndromes: dict[str, float]


def _check_register(dim: int, code: ConcatCode) -> None:
    if dim != code.register_dim:
        raise DimensionMismatchError(f"Register dim {dim} != code register dim {code.register_dim}")


def run_correction_cycle(rho: DensityMatrix, code: ConcatCode) -> CycleResult:
    """Leakage detect/correct on every block, then outer 5-qubit recovery.

    Each block round is the extend-operate-measure-trace sequence folded into
    its effective Kraus operators; the outer recovery acts on the 32-dim
    logical-block space and the result is lifted back.
    """
    _check_register(rho.dim, code)
    dims = code.block_dims
    current = rho.matrix
    block_outcomes = []
    for b in range(code.n_blocks):
        updated = np.zeros_like(current)
        probs = {}
        for label, k in code.block_kraus:
            term = conjugate_local(k, current, b, dims)
            probs[label] = float(np.real(np.trace(term)))
            updated += term
        block_outcomes.append(probs)
        current = updated
        logger.debug(f"Block {b} leakage outcomes: {probs}")

    lift = code.lift
    logical = lift.conj().T @ current @ lift
    recovered = np.zeros_like(logical)
    syndromes = {}
    for label, r in zip(code.outer_recovery.labels, code.outer_recovery.ops, strict=True):
        term = r @ logical @ r.conj().T
        syndromes[label] = float(np.real(np.trace(term)))
        recovered += term
    out = lift @ recovered @ lift.conj().T
    return CycleResult(DensityMatrix((out + out.conj().T) / 2), block_outcomes, syndromes)


def full_correction_cycle(rho: DensityMatrix, code: ConcatCode) -> DensityMatrix:
    """Corrected register state, averaged over all measurement branches."""
    return run_correction_cycle(rho, code).state


def correct_branches_logical(vectors: Iterable[CMatrix], code: ConcatCode) -> list[CMatrix]:
    """Correction cycle on an ensemble of unnormalized pure branches.

    Returns the surviving output branches in the 32-dim logical-block space.
    """
    dims = code.block_dims
    branches = [np.asarray(v, dtype=np.complex128) for v in vectors]
    for v in branches:
        _check_register(v.shape[0], code)
    for b in range(code.n_blocks):
        nxt = []
        for v in branches:
            for _, k in code.block_kraus:
                w = apply_local(k, v, b, dims)
                if float(np.vdot(w, w).real) > BRANCH_CUTOFF:
                    nxt.append(w)
        branches = nxt

    lift_dag = code.lift.conj().T
    out = []
    for v in branches:
        logical = lift_dag @ v
        for r in code.outer_recovery.ops:
            w = r @ logical
            if float(np.vdot(w, w).real) > BRANCH_CUTOFF:
                out.append(w)
    return out


def correct_branches(vectors: Sequence[CMatrix], code: ConcatCode) -> list[CMatrix]:
    """Same as ``correct_branches_logical`` but lifted back to the register."""
    return [code.lift @ w for w in correct_branches_logical(vectors, code)]
