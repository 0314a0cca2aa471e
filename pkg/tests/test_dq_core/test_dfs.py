"""Tests for DFS verification and codeword construction."""

import numpy as np
import pytest

from apps.dq_core.channels import (
    BathModel,
    QuantumChannel,
    collective_dephasing_exact,
    collective_spin,
    collective_sz,
    dephasing_function,
    markovian_dephasing,
)
from apps.dq_core.dfs import (
    CodeSpace,
    dfs_codewords_collective,
    dfs_codewords_dephasing,
    orthonormal_complement,
    sector_decomposition,
    verify_dfs,
    verify_hamiltonian_dfs,
)
from apps.dq_core.errors import CodeConstructionError, DimensionMismatchError
from apps.dq_core.qcore import (
    DensityMatrix,
    apply_channel,
    fidelity,
    random_state,
    random_unitary,
)

SAMPLE_TIMES = np.linspace(0.3, 3.0, 10)


class TestCodeSpace:
    """Tests for CodeSpace."""

    def test_rejects_non_orthonormal_columns(self) -> None:
        """Codewords must be orthonormal."""
        with pytest.raises(CodeConstructionError):
            CodeSpace(np.array([[1, 1], [0, 1], [0, 0]], dtype=complex))

    def test_frame_is_unitary(self, rng: np.random.Generator) -> None:
        """[V, V_perp] is unitary with the code first."""
        code = CodeSpace(random_unitary(6, rng)[:, :2])
        frame = code.frame
        assert np.allclose(frame.conj().T @ frame, np.eye(6), atol=1e-12)
        assert np.allclose(frame[:, :2], code.isometry)

    def test_complement_is_deterministic(self, dephasing_code: CodeSpace) -> None:
        """The complement of {|01>, |10>} is |00>, |11> in index order."""
        comp = orthonormal_complement(dephasing_code.isometry)
        assert np.allclose(comp, np.eye(4)[:, [0, 3]])


class TestSectorDecomposition:
    """Tests for sector_decomposition."""

    def test_two_qubits(self) -> None:
        """Sectors f = 2, 0, -2 in descending order."""
        sectors = sector_decomposition(2)
        assert list(sectors) == [2, 0, -2]
        assert sectors[0] == (1, 2)

    def test_sector_sizes_are_binomial(self) -> None:
        """Sector f = k - 2w has C(k, w) members."""
        sectors = sector_decomposition(4)
        assert [len(v) for v in sectors.values()] == [1, 4, 6, 4, 1]


class TestVerifyDfs:
    """Tests for verify_dfs."""

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_every_sector_is_dfs(self, k: int, default_bath: BathModel) -> None:
        """Each f-sector of exact collective dephasing is decoherence free."""
        for t in SAMPLE_TIMES:
            ch = collective_dephasing_exact(k, default_bath, float(t))
            for indices in sector_decomposition(k).values():
                code = CodeSpace.from_indices(2**k, indices)
                report = verify_dfs(ch, code)
                assert report.is_dfs
                assert report.residual < 1e-10

    def test_markovian_dephasing_keeps_f0_code(self, dephasing_code: CodeSpace) -> None:
        """The f = 0 code is also protected under Gaussian dephasing."""
        report = verify_dfs(markovian_dephasing(2, 1.0, 0.5), dephasing_code)
        assert report.is_dfs
        assert report.coherence_deficit < 1e-10

    def test_mixed_sector_code_fails(self, default_bath: BathModel) -> None:
        """span{|00>, |11>} is not a DFS; the deficit equals |1 - D_{0,3}|."""
        ch = collective_dephasing_exact(2, default_bath, 1.0)
        code = CodeSpace.from_indices(4, [0, 3])
        report = verify_dfs(ch, code)
        assert not report.is_dfs
        assert report.residual > 1e-3
        expected = abs(1 - dephasing_function(default_bath, 2, -2, 1.0))
        assert report.coherence_deficit == pytest.approx(expected, rel=0.1)

    def test_invariant_unitary_is_dfs(self, rng: np.random.Generator) -> None:
        """A unitary leaving the code invariant passes with |g| = 1."""
        code = CodeSpace.from_indices(4, [0, 1])
        block = np.zeros((4, 4), dtype=complex)
        block[:2, :2] = random_unitary(2, rng)
        block[2:, 2:] = random_unitary(2, rng)
        report = verify_dfs(QuantumChannel((block,)), code)
        assert report.is_dfs
        assert abs(report.fitted_g[0]) == pytest.approx(1.0, abs=1e-12)

    def test_dimension_mismatch(self, default_bath: BathModel) -> None:
        """Channel and code dims must agree."""
        ch = collective_dephasing_exact(3, default_bath, 1.0)
        with pytest.raises(DimensionMismatchError):
            verify_dfs(ch, dfs_codewords_dephasing(2))

    def test_code_evolves_unitarily(self, default_bath: BathModel, rng: np.random.Generator) -> None:
        """A passing code state comes back with fidelity 1 after undoing the fitted unitary."""
        code = dfs_codewords_dephasing(4)
        ch = collective_dephasing_exact(4, default_bath, 1.7)
        self._assert_unitary_on_code(ch, code, rng)

    def test_mixture_sharing_code_block_evolves_unitarily(self, rng: np.random.Generator) -> None:
        """Kraus operators that differ only off the code still act as one unitary on it."""
        code = CodeSpace.from_indices(4, [0, 1])
        shared = random_unitary(2, rng)
        ops = []
        for weight in (0.3, 0.7):
            block = np.zeros((4, 4), dtype=complex)
            block[:2, :2] = shared
            block[2:, 2:] = random_unitary(2, rng)
            ops.append(np.sqrt(weight) * block)
        self._assert_unitary_on_code(QuantumChannel(tuple(ops)), code, rng)

    @staticmethod
    def _assert_unitary_on_code(ch: QuantumChannel, code: CodeSpace, rng: np.random.Generator) -> None:
        report = verify_dfs(ch, code)
        assert report.is_dfs
        v = code.isometry
        undo = v @ report.fitted_u.conj().T @ v.conj().T
        for _ in range(5):
            rho = DensityMatrix.from_vector(v @ random_state(code.code_dim, rng).amplitudes)
            out = apply_channel(ch, rho).matrix
            back = DensityMatrix(undo @ out @ undo.conj().T)
            assert fidelity(back, rho) == pytest.approx(1.0, abs=1e-10)


class TestVerifyHamiltonianDfs:
    """Tests for verify_hamiltonian_dfs."""

    def test_sz_annihilates_f0_code(self, dephasing_code: CodeSpace) -> None:
        """S_z V = 0 on the f = 0 code."""
        report = verify_hamiltonian_dfs([collective_sz(2)], dephasing_code)
        assert report.is_dfs
        assert abs(report.eigenvalues[0]) < 1e-12

    def test_collective_code_annihilated_by_all_spins(self) -> None:
        """S_x, S_y, S_z all vanish on the 4-qubit singlet code."""
        code = dfs_codewords_collective(4)
        ops = [collective_spin(4, axis) for axis in ("x", "y", "z")]
        report = verify_hamiltonian_dfs(ops, code)
        assert report.is_dfs
        assert max(report.per_operator) < 1e-10

    def test_sx_breaks_dephasing_code(self, dephasing_code: CodeSpace) -> None:
        """S_x mixes sectors, so the f = 0 code is not a DFS for it."""
        report = verify_hamiltonian_dfs([collective_spin(2, "x")], dephasing_code)
        assert not report.is_dfs

    def test_hamiltonian_pass_implies_kraus_pass(self, rng: np.random.Generator) -> None:
        """Whenever S_z acts as a scalar on a code, the exact channel preserves it."""
        k = 3
        candidates = [CodeSpace.from_indices(2**k, idx) for idx in sector_decomposition(k).values()]
        candidates += [CodeSpace.from_indices(2**k, [0, 7]), CodeSpace(random_unitary(2**k, rng)[:, :2])]
        sz = collective_sz(k)
        passed = 0
        for _ in range(20):
            t = float(rng.uniform(0.1, 3.0))
            beta = float(rng.uniform(0.0, 2.0))
            g = float(rng.uniform(0.2, 2.0))
            ch = collective_dephasing_exact(k, BathModel.spin_bath(g=g, beta=beta), t)
            for code in candidates:
                if verify_hamiltonian_dfs([sz], code).is_dfs:
                    passed += 1
                    assert verify_dfs(ch, code).is_dfs
        assert passed == 20 * len(sector_decomposition(k))


class TestCodewords:
    """Tests for DFS codeword construction."""

    def test_dephasing_codewords_k4(self) -> None:
        """Six f = 0 codewords on four qubits."""
        code = dfs_codewords_dephasing(4)
        assert code.code_dim == 6
        support = [int(np.flatnonzero(code.isometry[:, c])[0]) for c in range(6)]
        assert support == [3, 5, 6, 9, 10, 12]

    def test_dephasing_needs_even_k(self) -> None:
        """Odd k has no f = 0 sector."""
        with pytest.raises(CodeConstructionError):
            dfs_codewords_dephasing(3)

    def test_collective_codewords(self) -> None:
        """Two orthonormal codewords, the first singlet ⊗ singlet."""
        code = dfs_codewords_collective(4)
        assert code.isometry.shape == (16, 2)
        singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
        first = code.isometry[:, 0]
        assert abs(np.vdot(np.kron(singlet, singlet), first)) == pytest.approx(1.0, abs=1e-12)

    def test_collective_codewords_deterministic(self) -> None:
        """Repeated construction gives identical codewords."""
        a = dfs_codewords_collective(4).isometry
        b = dfs_codewords_collective(4).isometry
        assert np.allclose(a, b, atol=1e-12)

    def test_collective_only_k4(self) -> None:
        """Only k = 4 is supported for full collective decoherence."""
        with pytest.raises(CodeConstructionError):
            dfs_codewords_collective(6)
