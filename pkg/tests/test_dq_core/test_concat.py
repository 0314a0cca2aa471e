"""Tests for the concatenated DFS-QECC code and its correction cycle."""

import numpy as np
import pytest

from apps.dq_core.concat import (
    ConcatCode,
    LogicalOps,
    apply_block_error,
    apply_physical_pauli,
    build_concat_code,
    correct_branches,
    decompose_leakage,
    encode_concatenated,
    full_correction_cycle,
    inner_code,
    leakage_detect_correct,
    leakage_kraus,
    logical_ops,
    modified_cnot,
    named_block_error,
    run_correction_cycle,
)
from apps.dq_core.dfs import CodeSpace, dfs_codewords_collective
from apps.dq_core.errors import (
    CodeConstructionError,
    InvalidStateError,
    ParameterError,
)
from apps.dq_core.harness import generic_logical_amplitudes
from apps.dq_core.qcore import (
    DensityMatrix,
    fidelity,
    is_unitary,
    random_density_matrix,
    random_state,
)

BLOCK_ERRORS = ["X", "Y", "Z", "P2", "P2Z", "P3", "P3Z"]


@pytest.fixture
def ops(dephasing_code: CodeSpace) -> LogicalOps:
    return logical_ops(dephasing_code)


@pytest.fixture(scope="module")
def encoded(concat_code: ConcatCode) -> DensityMatrix:
    alpha, beta = generic_logical_amplitudes()
    return DensityMatrix.from_vector(encode_concatenated(alpha, beta, concat_code).amplitudes)


class TestLogicalOps:
    """Tests for logical_ops and named_block_error."""

    def test_logical_x_flips_codewords(self, ops: LogicalOps, dephasing_code: CodeSpace) -> None:
        """X_L |0_L> = |1_L>."""
        v = dephasing_code.isometry
        assert np.allclose(ops.x_l @ v[:, 0], v[:, 1], atol=1e-12)

    def test_leakage_operator_counts(self, ops: LogicalOps) -> None:
        """One P_j per complement vector."""
        assert len(ops.p_j) == 2
        assert len(logical_ops(dfs_codewords_collective(4)).p_j) == 14

    def test_complement_labels(self, ops: LogicalOps) -> None:
        """|2_L> = |00> and |3_L> = |11> for the 2-qubit dephasing code."""
        assert np.allclose(ops.basis[:, 2], np.eye(4)[:, 0])
        assert np.allclose(ops.basis[:, 3], np.eye(4)[:, 3])

    def test_named_errors(self, ops: LogicalOps) -> None:
        """Names resolve to logical Paulis and leakage operators."""
        assert np.array_equal(named_block_error("z", ops), ops.z_l)
        assert np.allclose(named_block_error("P3Z", ops), ops.p_j[1] @ ops.z_l)

    @pytest.mark.parametrize("name", ["Q", "P1", "P4", "PZ"])
    def test_unknown_errors(self, ops: LogicalOps, name: str) -> None:
        """Malformed names and out-of-range leakage labels are refused."""
        with pytest.raises(ParameterError):
            named_block_error(name, ops)

    def test_unknown_inner_code(self) -> None:
        """Only the registered inner codes are selectable."""
        with pytest.raises(ParameterError):
            inner_code("bogus")


class TestDecomposeLeakage:
    """Tests for decompose_leakage."""

    def test_random_block_expands_exactly(self, ops: LogicalOps, rng: np.random.Generator) -> None:
        """{P_j, P_j Z} spans every code-to-complement block."""
        q3 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        coeffs, residual = decompose_leakage(q3, ops)
        assert residual < 1e-12
        assert np.allclose(coeffs[:, 0], (q3[:, 0] + q3[:, 1]) / 2, atol=1e-12)
        assert np.allclose(coeffs[:, 1], (q3[:, 0] - q3[:, 1]) / 2, atol=1e-12)


class TestModifiedCnot:
    """Tests for the leakage-detecting controlled gate."""

    def test_is_unitary(self, dephasing_code: CodeSpace) -> None:
        """C is a unitary on data ⊗ ancilla."""
        assert is_unitary(modified_cnot(dephasing_code))

    def test_copies_leakage_label(self, ops: LogicalOps, dephasing_code: CodeSpace) -> None:
        """|j_L>|0_L> -> |j_L>|j_L> and code states are untouched."""
        c = modified_cnot(dephasing_code)
        b = ops.basis
        for j in (2, 3):
            assert np.allclose(c @ np.kron(b[:, j], b[:, 0]), np.kron(b[:, j], b[:, j]), atol=1e-12)
        for a in (0, 1):
            assert np.allclose(c @ np.kron(b[:, a], b[:, 0]), np.kron(b[:, a], b[:, 0]), atol=1e-12)

    def test_leakage_kraus_is_complete(self, ops: LogicalOps, dephasing_code: CodeSpace) -> None:
        """Σ K_m† K_m = I over the reachable outcomes."""
        kraus = leakage_kraus(ops, modified_cnot(dephasing_code))
        assert [label for label, _ in kraus] == ["none", "leaked(2)", "leaked(3)"]
        total = sum(k.conj().T @ k for _, k in kraus)
        assert np.allclose(total, np.eye(4), atol=1e-12)

    @pytest.mark.parametrize("inner", ["dephasing2", "collective4"])
    def test_copies_leakage_in_superposition(self, inner: str, rng: np.random.Generator) -> None:
        """(|x_L> + |2_L>)|0_L> -> |x_L>|0_L> + |2_L>|2_L>."""
        code = inner_code(inner)
        b = logical_ops(code).basis
        x = random_state(2, rng).amplitudes
        x_l = b[:, :2] @ x
        before = np.kron(x_l + b[:, 2], b[:, 0]) / np.sqrt(2)
        after = (np.kron(x_l, b[:, 0]) + np.kron(b[:, 2], b[:, 2])) / np.sqrt(2)
        assert np.allclose(modified_cnot(code) @ before, after, atol=1e-12)


class TestLeakageDetectCorrect:
    """Tests for leakage_detect_correct."""

    def test_leaked_block_is_reset(self, ops: LogicalOps, dephasing_code: CodeSpace) -> None:
        """A block in |2_L> is detected with certainty and reset to |0_L>."""
        b = ops.basis
        rho = DensityMatrix.from_vector(np.kron(b[:, 2], b[:, 0]))
        result = leakage_detect_correct(rho, ops, modified_cnot(dephasing_code))
        assert result.syndrome == "leaked(2)"
        assert result.probabilities["leaked(2)"] == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(result.state.matrix, np.outer(b[:, 0], b[:, 0].conj()), atol=1e-12)

    def test_code_state_passes_through(self, ops: LogicalOps, dephasing_code: CodeSpace) -> None:
        """A code state yields outcome 'none' and is unchanged."""
        b = ops.basis
        data = (b[:, 0] + 1j * b[:, 1]) / np.sqrt(2)
        rho = DensityMatrix.from_vector(np.kron(data, b[:, 0]))
        result = leakage_detect_correct(rho, ops, modified_cnot(dephasing_code))
        assert result.syndrome == "none"
        assert np.allclose(result.state.matrix, np.outer(data, data.conj()), atol=1e-12)

    def test_ancilla_must_start_in_zero(self, ops: LogicalOps, dephasing_code: CodeSpace) -> None:
        """An ancilla outside |0_L> is refused."""
        b = ops.basis
        rho = DensityMatrix.from_vector(np.kron(b[:, 0], b[:, 1]))
        with pytest.raises(InvalidStateError):
            leakage_detect_correct(rho, ops, modified_cnot(dephasing_code))

    def test_matches_effective_kraus(
        self, ops: LogicalOps, dephasing_code: CodeSpace, rng: np.random.Generator
    ) -> None:
        """Measuring the ancilla gives the same block state as Σ K_m ρ K_m†."""
        c = modified_cnot(dephasing_code)
        data = random_density_matrix(4, rng).matrix
        zero = ops.basis[:, 0]
        rho = DensityMatrix(np.kron(data, np.outer(zero, zero.conj())))
        result = leakage_detect_correct(rho, ops, c)
        expected = sum(k @ data @ k.conj().T for _, k in leakage_kraus(ops, c))
        assert np.allclose(result.state.matrix, expected, atol=1e-12)

    def test_none_branch_keeps_code_component(
        self, ops: LogicalOps, dephasing_code: CodeSpace
    ) -> None:
        """With code and leaked amplitudes mixed, outcome 'none' holds the code part exactly."""
        b = ops.basis
        code_part = 0.6 * b[:, 0] + 0.48j * b[:, 1]
        data = code_part + 0.64 * b[:, 2]
        rho = DensityMatrix.from_vector(np.kron(data, b[:, 0]))
        result = leakage_detect_correct(rho, ops, modified_cnot(dephasing_code))
        expected = np.outer(code_part, code_part.conj())
        assert np.allclose(result.branch_states["none"], expected, atol=1e-12)
        assert result.probabilities["leaked(2)"] == pytest.approx(0.64**2, abs=1e-12)


class TestConcatCode:
    """Tests for the 10-qubit concatenated register."""

    def test_register_size(self, concat_code: ConcatCode) -> None:
        """Five 2-qubit blocks."""
        assert concat_code.register_qubits == 10
        assert concat_code.register_dim == 1024

    def test_collective_inner_exceeds_register_limit(self) -> None:
        """Four-qubit blocks would need 20 qubits."""
        with pytest.raises(CodeConstructionError):
            build_concat_code(dfs_codewords_collective(4))

    def test_encode_requires_normalized_amplitudes(self, concat_code: ConcatCode) -> None:
        """|alpha|^2 + |beta|^2 must be 1."""
        with pytest.raises(InvalidStateError):
            encode_concatenated(1.0, 1.0, concat_code)

    def test_block_index_checked(self, concat_code: ConcatCode, encoded: DensityMatrix) -> None:
        """Block indices run 0..4."""
        with pytest.raises(ParameterError):
            apply_block_error(encoded, concat_code.ops.x_l, 5, concat_code)


class TestCorrectionCycle:
    """Every single DFS-level and physical error is corrected."""

    @pytest.mark.parametrize("block", range(5))
    @pytest.mark.parametrize("name", BLOCK_ERRORS)
    def test_block_errors(
        self, concat_code: ConcatCode, encoded: DensityMatrix, block: int, name: str
    ) -> None:
        """Logical Paulis and leakage on any block are undone."""
        err = named_block_error(name, concat_code.ops)
        damaged = apply_block_error(encoded, err, block, concat_code)
        assert fidelity(full_correction_cycle(damaged, concat_code), encoded) >= 1 - 1e-10

    @pytest.mark.parametrize("qubit", range(10))
    @pytest.mark.parametrize("pauli", ["X", "Y", "Z"])
    def test_physical_paulis(
        self, concat_code: ConcatCode, encoded: DensityMatrix, qubit: int, pauli: str
    ) -> None:
        """Any single physical Pauli is undone."""
        damaged = apply_physical_pauli(encoded, qubit, pauli, concat_code)
        assert fidelity(full_correction_cycle(damaged, concat_code), encoded) >= 1 - 1e-10

    @pytest.mark.parametrize("block", range(5))
    @pytest.mark.parametrize("name", BLOCK_ERRORS)
    def test_second_cycle_changes_nothing(
        self, concat_code: ConcatCode, encoded: DensityMatrix, block: int, name: str
    ) -> None:
        """Running the cycle on its own output is a no-op."""
        err = named_block_error(name, concat_code.ops)
        once = full_correction_cycle(apply_block_error(encoded, err, block, concat_code), concat_code)
        twice = full_correction_cycle(once, concat_code)
        assert abs(fidelity(twice, encoded) - fidelity(once, encoded)) < 1e-12

    def test_leakage_is_reported(self, concat_code: ConcatCode, encoded: DensityMatrix) -> None:
        """P2 on block 1 is flagged by that block's detector only."""
        err = named_block_error("P2", concat_code.ops)
        result = run_correction_cycle(apply_block_error(encoded, err, 1, concat_code), concat_code)
        assert result.block_outcomes[1]["leaked(2)"] == pytest.approx(1.0, abs=1e-12)
        assert result.block_outcomes[0]["none"] == pytest.approx(1.0, abs=1e-12)

    def test_branches_match_density_cycle(
        self, concat_code: ConcatCode, encoded: DensityMatrix
    ) -> None:
        """Summing corrected pure branches reproduces the density-matrix cycle."""
        alpha, beta = generic_logical_amplitudes()
        vector = encode_concatenated(alpha, beta, concat_code).amplitudes
        x_on_block = np.kron(concat_code.ops.x_l, np.eye(256))
        branches = correct_branches([x_on_block @ vector], concat_code)
        summed = sum(np.outer(w, w.conj()) for w in branches)
        damaged = apply_block_error(encoded, concat_code.ops.x_l, 0, concat_code)
        assert np.allclose(summed, full_correction_cycle(damaged, concat_code).matrix, atol=1e-10)
