"""Quantum channel constructors.

Covers exact collective dephasing from a finite bath, a phenomenological
Markovian dephasing model, independent per-qubit error channels, raw block
perturbations and Kraus extraction from a joint system-bath unitary.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property

import numpy as np
import numpy.typing as npt

from apps.dq_core.errors import (
    DimensionMismatchError,
    NotCPTPError,
    NotHermitianError,
    NotUnitaryError,
    ParameterError,
)
from apps.dq_core.qcore import (
    ALGEBRA_TOL,
    CPTP_TOL,
    PAULI,
    CMatrix,
    DensityMatrix,
    as_cmatrix,
    is_hermitian,
    is_unitary,
    kron_power,
    matrix_exp,
    unitarity_residual,
)

logger = logging.getLogger(__name__)

# Bath eigenvalues below this weight are dropped from Kraus sets.
BATH_WEIGHT_CUTOFF = 1e-14
# Upper bound on n_kraus * dim**2 complex entries held by one dense channel.
MAX_CHANNEL_ENTRIES = 2**26
MAX_QUBITS = 20

# Gauss-Hermite node counts tried for Markovian dephasing.
QUADRATURE_START = 16
QUADRATURE_MAX = 512
QUADRATURE_TOL = 1e-12


# ─────────────────────────────────────────────────────────────────────────────
# Channel value type
# ─────────────────────────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """A set of same-dimension Kraus operators.

    Completeness is not enforced on construction so that perturbed sets can be
    represented before renormalization; ``check_cptp`` and ``apply_channel``
    enforce it.
    """

    kraus: tuple[CMatrix, ...]
    label: str = ""

    def __post_init__(self) -> None:
        ops = tuple(as_cmatrix(k) for k in self.kraus)
        if not ops:
            raise DimensionMismatchError("A channel needs at least one Kraus operator")
        shape = ops[0].shape
        if shape[0] != shape[1]:
            raise DimensionMismatchError(f"Kraus operators must be square, got {shape}")
        for k in ops:
            if k.shape != shape:
                raise DimensionMismatchError(f"Kraus shapes differ: {k.shape} vs {shape}")
        object.__setattr__(self, "kraus", ops)

    @property
    def dim(self) -> int:
        return int(self.kraus[0].shape[0])

    def __len__(self) -> int:
        return len(self.kraus)

    @cached_property
    def completeness_residual(self) -> float:
        """‖Σ_a A_a†A_a − I‖_max."""
        total = sum((k.conj().T @ k for k in self.kraus), np.zeros((self.dim, self.dim)))
        return float(np.max(np.abs(total - np.eye(self.dim))))

    @cached_property
    def is_diagonal(self) -> bool:
        return all(np.count_nonzero(k - np.diag(np.diagonal(k))) == 0 for k in self.kraus)

    @cached_property
    def damping(self) -> CMatrix:
        """D_jk = Σ_a A_a[j,j] A_a[k,k]* for diagonal channels.

        Raises:
            ValueError: If the channel is not diagonal.
        """
        if not self.is_diagonal:
            raise ValueError(f"Channel '{self.label}' is not diagonal")
        diags = np.stack([np.diagonal(k) for k in self.kraus])
        result: CMatrix = diags.T @ diags.conj()
        return result

    def check_cptp(self, tol: float = CPTP_TOL) -> QuantumChannel:
        """Raise NotCPTPError unless the completeness residual is below ``tol``."""
        if self.completeness_residual > tol:
            raise NotCPTPError(
                f"Channel '{self.label}' completeness residual {self.completeness_residual:.3e}"
            )
        return self

    @classmethod
    def identity(cls, dim: int, label: str = "identity") -> QuantumChannel:
        return cls((np.eye(dim, dtype=np.complex128),), label)


def _prune(ops: Sequence[CMatrix]) -> tuple[CMatrix, ...]:
    """Drop Kraus operators that are exactly (numerically) zero."""
    kept = tuple(k for k in ops if float(np.vdot(k, k).real) > 1e-28)
    return kept if kept else (np.zeros_like(ops[0]),)


def _check_size(n_kraus: int, dim: int, what: str) -> None:
    if n_kraus * dim * dim > MAX_CHANNEL_ENTRIES:
        raise ParameterError(
            f"{what}: {n_kraus} Kraus operators of dim {dim} exceed the dense channel budget"
        )


def _check_time(t: float) -> None:
    if t < 0 or not np.isfinite(t):
        raise ParameterError(f"Time must be finite and >= 0, got {t}")


def compose(first: QuantumChannel, second: QuantumChannel) -> QuantumChannel:
    """Channel applying ``first`` then ``second``: Kraus set {B_b A_a}."""
    if first.dim != second.dim:
        raise DimensionMismatchError(f"Cannot compose dims {first.dim} and {second.dim}")
    ops = [b @ a for b in second.kraus for a in first.kraus]
    return QuantumChannel(_prune(ops), f"{second.label}∘{first.label}")


# ─────────────────────────────────────────────────────────────────────────────
# Kraus extraction
# ─────────────────────────────────────────────────────────────────────────────
def bath_ensemble(bath_state: DensityMatrix) -> tuple[npt.NDArray[np.float64], CMatrix]:
    """Eigen-ensemble (weights, eigenvector columns) of a bath state above the cutoff."""
    w, v = np.linalg.eigh(bath_state.matrix)
    keep = w > BATH_WEIGHT_CUTOFF
    return w[keep], v[:, keep]


def kraus_from_joint(
    u_joint: npt.ArrayLike, dims: tuple[int, int], bath_state: DensityMatrix
) -> QuantumChannel:
    """Kraus operators A_(mu,nu) = sqrt(nu) <mu|U|nu> of a joint unitary.

    mu runs over the computational bath basis and nu over the eigenvectors of
    ``bath_state`` with weight above ``BATH_WEIGHT_CUTOFF``.

    Raises:
        DimensionMismatchError: If dims do not match the unitary or bath state.
        NotUnitaryError: If ``u_joint`` is not unitary.
    """
    u = as_cmatrix(u_joint)
    sys_dim, bath_dim = int(dims[0]), int(dims[1])
    if u.shape != (sys_dim * bath_dim, sys_dim * bath_dim):
        raise DimensionMismatchError(f"Joint unitary shape {u.shape} != dims {dims}")
    if bath_state.dim != bath_dim:
        raise DimensionMismatchError(f"Bath state dim {bath_state.dim} != {bath_dim}")
    if not is_unitary(u):
        raise NotUnitaryError(f"Joint operator is not unitary (residual {unitarity_residual(u):.3e})")

    weights, vecs = bath_ensemble(bath_state)
    u4 = u.reshape(sys_dim, bath_dim, sys_dim, bath_dim)
    blocks = np.einsum("imjn,nv->vmij", u4, vecs) * np.sqrt(weights)[:, None, None, None]
    ops = blocks.reshape(-1, sys_dim, sys_dim)
    return QuantumChannel(_prune(list(ops)), "kraus_from_joint").check_cptp()


# ─────────────────────────────────────────────────────────────────────────────
# Collective dephasing
# ─────────────────────────────────────────────────────────────────────────────
def _check_qubits(k: int) -> None:
    if not 1 <= k <= MAX_QUBITS:
        raise ParameterError(f"Qubit count must be in [1, {MAX_QUBITS}], got {k}")


def f_values(k: int) -> npt.NDArray[np.int64]:
    """f(j) = (number of 0 bits) - (number of 1 bits) for j in [0, 2^k)."""
    _check_qubits(k)
    j = np.arange(2**k, dtype=np.int64)
    ones = ((j[:, None] >> np.arange(k, dtype=np.int64)) & 1).sum(axis=1)
    result: npt.NDArray[np.int64] = k - 2 * ones
    return result


def collective_sz(k: int) -> CMatrix:
    """S_z = diag[f(j)] on k qubits."""
    _check_qubits(k)
    _check_size(1, 2**k, "collective_sz")
    return np.diag(f_values(k).astype(np.complex128))


def collective_spin(k: int, axis: str) -> CMatrix:
    """S_axis = Σ_i σ^axis_i on k qubits, axis in {"x", "y", "z"}."""
    _check_qubits(k)
    key = axis.upper()
    if key not in ("X", "Y", "Z"):
        raise ParameterError(f"Unknown spin axis '{axis}'")
    _check_size(1, 2**k, "collective_spin")
    ident = PAULI["I"]
    total = np.zeros((2**k, 2**k), dtype=np.complex128)
    for site in range(k):
        factors = [PAULI[key] if i == site else ident for i in range(k)]
        op = factors[0]
        for f in factors[1:]:
            op = np.kron(op, f)
        total += op
    return total


@dataclass(frozen=True, eq=False)
class BathModel:
    """Finite bath for exact collective dephasing (V_+ = V_- = 0)."""

    h_bath: CMatrix
    v_z: CMatrix
    rho_bath: DensityMatrix

    def __post_init__(self) -> None:
        h = as_cmatrix(self.h_bath)
        v = as_cmatrix(self.v_z)
        dim = self.rho_bath.dim
        if h.shape != (dim, dim) or v.shape != (dim, dim):
            raise DimensionMismatchError(
                f"Bath operators {h.shape}, {v.shape} do not match bath state dim {dim}"
            )
        if not is_hermitian(h) or not is_hermitian(v):
            raise NotHermitianError("Bath Hamiltonian and coupling must be Hermitian")
        self.rho_bath.validate()
        object.__setattr__(self, "h_bath", h)
        object.__setattr__(self, "v_z", v)

    @property
    def bath_dim(self) -> int:
        return self.rho_bath.dim

    @cached_property
    def ensemble(self) -> tuple[npt.NDArray[np.float64], CMatrix]:
        return bath_ensemble(self.rho_bath)

    def scaled(self, coupling: float) -> BathModel:
        """Same bath with the coupling V_z multiplied by ``coupling``."""
        return BathModel(self.h_bath, self.v_z * coupling, self.rho_bath)

    @classmethod
    def spin_bath(
        cls, bath_dim: int = 2, omega: float = 1.0, g: float = 1.0, beta: float = 1.0
    ) -> BathModel:
        """Spin-like bath: H_B = omega·diag(d-1-2i), V_z = g·(nearest-level hopping).

        For bath_dim = 2 this is H_B = omega·sigma_z and V_z = g·sigma_x with a
        thermal state at inverse temperature ``beta``.
        """
        if bath_dim < 1:
            raise ParameterError(f"bath_dim must be >= 1, got {bath_dim}")
        if beta < 0:
            raise ParameterError(f"beta must be >= 0, got {beta}")
        levels = np.arange(bath_dim - 1, -bath_dim, -2, dtype=np.float64)
        energies = omega * levels
        h = np.diag(energies).astype(np.complex128)
        hop = np.diag(np.ones(bath_dim - 1), k=1)
        v = (g * (hop + hop.T)).astype(np.complex128)
        boltz = np.exp(-beta * (energies - energies.min()))
        rho = np.diag(boltz / boltz.sum()).astype(np.complex128)
        return cls(h, v, DensityMatrix(rho))

    @classmethod
    def default(cls) -> BathModel:
        return cls.spin_bath()


def sector_amplitudes(bath: BathModel, f: int, t: float) -> CMatrix:
    """g_(mu,nu)^(f) = sqrt(nu) <mu| exp(-i (f V_z + H_B) t) |nu>, flattened nu-major."""
    weights, vecs = bath.ensemble
    u_f = matrix_exp(f * bath.v_z + bath.h_bath, t)
    g = (u_f @ vecs) * np.sqrt(weights)[None, :]
    result: CMatrix = g.T.reshape(-1)
    return result


def collective_dephasing_exact(k: int, bath: BathModel, t: float) -> QuantumChannel:
    """Exact collective dephasing of k qubits coupled through S_z ⊗ V_z.

    Each Kraus operator is diagonal with entry g_a^(f(j)) at basis index j;
    one exponential is computed per distinct f value.
    """
    _check_qubits(k)
    _check_time(t)
    f = f_values(k)
    distinct, inverse = np.unique(f, return_inverse=True)
    table = np.stack([sector_amplitudes(bath, int(fv), t) for fv in distinct])
    diags = table[inverse].T
    _check_size(diags.shape[0], 2**k, "collective_dephasing_exact")
    ops = _prune([np.diag(row) for row in diags])
    logger.info(f"Built exact collective dephasing: k={k}, t={t}, {len(ops)} Kraus operators")
    return QuantumChannel(ops, f"collective_dephasing_exact(k={k}, t={t})").check_cptp()


def dephasing_function(bath: BathModel, fj: int, fk: int, t: float) -> complex:
    """Decay factor D_jk(t) = Tr[rho_B U_fk† U_fj] of coherence (j, k)."""
    _check_time(t)
    if fj == fk:
        return 1 + 0j
    gj = sector_amplitudes(bath, fj, t)
    gk = sector_amplitudes(bath, fk, t)
    return complex(np.sum(gj * gk.conj()))


def markovian_damping(k: int, rate: float, t: float) -> CMatrix:
    """D_jk = exp(-rate·t·(f_j - f_k)^2 / 2)."""
    f = f_values(k).astype(np.float64)
    diff = f[:, None] - f[None, :]
    result: CMatrix = np.exp(-rate * t * diff**2 / 2).astype(np.complex128)
    return result


def _gaussian_phase_nodes(s: float, k: int) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Phase nodes and weights whose characteristic function matches exp(-s Δ^2 / 2)."""
    deltas = np.arange(0, 2 * k + 1, 2, dtype=np.float64)
    target = np.exp(-s * deltas**2 / 2)
    n = QUADRATURE_START
    while n <= QUADRATURE_MAX:
        x, w = np.polynomial.hermite.hermgauss(n)
        theta = np.sqrt(2 * s) * x
        weights = w / w.sum()
        keep = weights > 1e-18
        theta, weights = theta[keep], weights[keep] / weights[keep].sum()
        realized = np.exp(1j * np.outer(deltas, theta)) @ weights
        err = float(np.max(np.abs(realized - target)))
        if err <= QUADRATURE_TOL:
            logger.debug(f"Gauss-Hermite n={n} reached damping error {err:.2e}")
            return theta, weights
        n *= 2
    raise ParameterError(
        f"Dephasing strength lambda*t={s} with k={k} needs more than {QUADRATURE_MAX} phase nodes"
    )


def markovian_dephasing(k: int, lam: float, t: float) -> QuantumChannel:
    """Gaussian collective dephasing with D_jk = exp(-lam t (f_j - f_k)^2 / 2).

    Realized as a random-phase unraveling: Kraus operators
    sqrt(w_m) diag[exp(i theta_m f(j))] with Gauss-Hermite nodes theta_m.
    """
    _check_qubits(k)
    _check_time(t)
    if lam < 0:
        raise ParameterError(f"Rate must be >= 0, got {lam}")
    dim = 2**k
    s = lam * t
    if s == 0:
        return QuantumChannel.identity(dim, f"markovian_dephasing(k={k}, lt=0)")
    theta, weights = _gaussian_phase_nodes(s, k)
    _check_size(len(theta), dim, "markovian_dephasing")
    f = f_values(k).astype(np.float64)
    ops = [np.sqrt(w) * np.diag(np.exp(1j * th * f)) for th, w in zip(theta, weights, strict=True)]
    return QuantumChannel(tuple(ops), f"markovian_dephasing(k={k}, lt={s})").check_cptp()


def collective_damping(
    k: int, t: float, *, bath: BathModel | None = None, rate: float | None = None
) -> CMatrix:
    """Elementwise damping matrix of collective dephasing on k qubits.

    Exactly one of ``bath`` (exact finite bath) or ``rate`` (Markovian) is given.
    """
    if (bath is None) == (rate is None):
        raise ParameterError("Give exactly one of bath or rate")
    _check_qubits(k)
    _check_time(t)
    if rate is not None:
        return markovian_damping(k, rate, t)
    assert bath is not None
    f = f_values(k)
    distinct, inverse = np.unique(f, return_inverse=True)
    table = np.array(
        [[dephasing_function(bath, int(a), int(b), t) for b in distinct] for a in distinct],
        dtype=np.complex128,
    )
    result: CMatrix = table[np.ix_(inverse, inverse)]
    return result


# ─────────────────────────────────────────────────────────────────────────────
# Perturbations
# ─────────────────────────────────────────────────────────────────────────────
class PerturbationModel(StrEnum):
    INDEPENDENT_DEPHASING = "independent_dephasing"
    INDEPENDENT_DEPOLARIZING = "independent_depolarizing"
    RAW_BLOCK = "raw_block"


@dataclass(frozen=True, eq=False)
class PerturbationSpec:
    """Symmetry-breaking perturbation of strength epsilon.

    ``q_blocks`` holds (Q1, Q2, Q3, Q4) in raw_block mode; Q4 is carried along
    but nothing asserts on it.
    """

    epsilon: float
    model: PerturbationModel = PerturbationModel.INDEPENDENT_DEPHASING
    q_blocks: tuple[CMatrix, CMatrix, CMatrix, CMatrix] | None = None

    def __post_init__(self) -> None:
        if self.epsilon < 0 or not np.isfinite(self.epsilon):
            raise ParameterError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        object.__setattr__(self, "model", PerturbationModel(self.model))
        if self.model is PerturbationModel.RAW_BLOCK and self.q_blocks is None:
            raise ParameterError("raw_block perturbation needs q_blocks")


def pauli_mixture(model: PerturbationModel, p: float) -> dict[str, float]:
    """Single-qubit Pauli probabilities for an independent error model."""
    if model is PerturbationModel.INDEPENDENT_DEPHASING:
        return {"I": 1 - p, "Z": p}
    if model is PerturbationModel.INDEPENDENT_DEPOLARIZING:
        return {"I": 1 - p, "X": p / 3, "Y": p / 3, "Z": p / 3}
    raise ParameterError(f"Model {model} is not an independent error model")


def error_probability(spec: PerturbationSpec, t: float) -> float:
    """Per-qubit error probability p = epsilon^2 t."""
    _check_time(t)
    p = spec.epsilon**2 * t
    if p > 1:
        raise ParameterError(f"Error probability epsilon^2 t = {p} exceeds 1")
    return p


def single_qubit_pauli_weights(spec: PerturbationSpec, t: float) -> dict[str, float]:
    return pauli_mixture(spec.model, error_probability(spec, t))


def single_qubit_error_kraus(spec: PerturbationSpec, t: float) -> tuple[CMatrix, ...]:
    weights = single_qubit_pauli_weights(spec, t)
    return _prune([np.sqrt(w) * PAULI[name] for name, w in weights.items()])


def independent_error_channel(k: int, spec: PerturbationSpec, t: float) -> QuantumChannel:
    """Tensor power of identical single-qubit error channels with p = epsilon^2 t."""
    _check_qubits(k)
    single = single_qubit_error_kraus(spec, t)
    _check_size(len(single) ** k, 2**k, "independent_error_channel")
    ops = []
    for combo in itertools.product(single, repeat=k):
        op = combo[0]
        for factor in combo[1:]:
            op = np.kron(op, factor)
        ops.append(op)
    label = f"{spec.model.value}(k={k}, eps={spec.epsilon}, t={t})"
    return QuantumChannel(tuple(ops), label).check_cptp()


def _inverse_sqrt(m: CMatrix) -> CMatrix:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    if w[0] <= 0:
        raise NotCPTPError("Perturbed Kraus set is singular and cannot be renormalized")
    result: CMatrix = (v / np.sqrt(w)) @ v.conj().T
    return result


def perturb_channel(
    ideal: QuantumChannel,
    spec: PerturbationSpec,
    split_dim: int,
    frame: npt.ArrayLike | None = None,
) -> tuple[QuantumChannel, float]:
    """Shift every Kraus operator by epsilon·[[Q1, Q2], [Q3, Q4]] and renormalize.

    The block matrix is written in ``frame``, a unitary whose first
    ``split_dim`` columns span the protected subspace (computational basis
    when omitted). Renormalization is A_a <- A_a M^(-1/2), M = Σ A_a†A_a.

    Returns:
        The renormalized channel and the pre-normalization completeness residual.

    Raises:
        DimensionMismatchError: If Q-block shapes do not match the split.
        ParameterError: If the spec is not in raw_block mode.
    """
    if spec.model is not PerturbationModel.RAW_BLOCK or spec.q_blocks is None:
        raise ParameterError("perturb_channel needs a raw_block PerturbationSpec")
    dim = ideal.dim
    rest = dim - split_dim
    if not 0 < split_dim <= dim:
        raise DimensionMismatchError(f"split_dim {split_dim} out of range for dim {dim}")
    q1, q2, q3, q4 = (as_cmatrix(q) for q in spec.q_blocks)
    expected = [(split_dim, split_dim), (split_dim, rest), (rest, split_dim), (rest, rest)]
    for name, q, shape in zip(("Q1", "Q2", "Q3", "Q4"), (q1, q2, q3, q4), expected, strict=True):
        if q.shape != shape:
            raise DimensionMismatchError(f"{name} has shape {q.shape}, expected {shape}")

    if spec.epsilon == 0:
        return ideal, ideal.completeness_residual

    block = np.block([[q1, q2], [q3, q4]])
    if frame is not None:
        w = as_cmatrix(frame)
        if w.shape != (dim, dim) or not is_unitary(w, ALGEBRA_TOL):
            raise DimensionMismatchError("frame must be a unitary of the channel dimension")
        block = w @ block @ w.conj().T

    shifted = [a + spec.epsilon * block for a in ideal.kraus]
    m = sum((a.conj().T @ a for a in shifted), np.zeros((dim, dim), dtype=np.complex128))
    residual = float(np.max(np.abs(m - np.eye(dim))))
    m_inv_sqrt = _inverse_sqrt(m)
    ops = tuple(a @ m_inv_sqrt for a in shifted)
    logger.debug(f"Perturbed '{ideal.label}' by eps={spec.epsilon}, residual {residual:.3e}")
    return QuantumChannel(ops, f"perturbed({ideal.label}, eps={spec.epsilon})").check_cptp(), residual
