"""dq_core - Collective-decoherence channels, DFS/QECC verification and experiments.

Dense numpy linear algebra throughout; every public operation validates its
inputs and raises a DqError subclass on failure.
"""

from apps.dq_core.channels import (
    BathModel,
    PerturbationModel,
    PerturbationSpec,
    QuantumChannel,
    collective_dephasing_exact,
    collective_sz,
    compose,
    dephasing_function,
    independent_error_channel,
    kraus_from_joint,
    markovian_dephasing,
    perturb_channel,
)
from apps.dq_core.concat import (
    ConcatCode,
    LogicalOps,
    build_concat_code,
    encode_concatenated,
    full_correction_cycle,
    leakage_detect_correct,
    logical_ops,
    modified_cnot,
)
from apps.dq_core.config import ExperimentConfig, build_experiment_config
from apps.dq_core.dfs import (
    CodeSpace,
    DfsReport,
    dfs_codewords_collective,
    dfs_codewords_dephasing,
    sector_decomposition,
    verify_dfs,
    verify_hamiltonian_dfs,
)
from apps.dq_core.errors import DqError
from apps.dq_core.harness import (
    SweepResult,
    fit_scaling,
    oracle_check,
    run_scenario,
    run_sweep,
    simulate_joint,
)
from apps.dq_core.qcore import (
    DensityMatrix,
    StateVector,
    apply_channel,
    fidelity,
    matrix_exp,
    partial_trace,
    tensor,
)
from apps.dq_core.qecc import (
    KlReport,
    RecoverySet,
    apply_recovery,
    build_recovery,
    five_qubit_code,
    kl_gamma,
    verify_theorem2,
)

__all__ = [
    "DqError",
    "DensityMatrix",
    "StateVector",
    "tensor",
    "partial_trace",
    "apply_channel",
    "fidelity",
    "matrix_exp",
    "QuantumChannel",
    "BathModel",
    "PerturbationModel",
    "PerturbationSpec",
    "kraus_from_joint",
    "collective_sz",
    "collective_dephasing_exact",
    "dephasing_function",
    "markovian_dephasing",
    "independent_error_channel",
    "compose",
    "perturb_channel",
    "CodeSpace",
    "DfsReport",
    "sector_decomposition",
    "verify_dfs",
    "verify_hamiltonian_dfs",
    "dfs_codewords_dephasing",
    "dfs_codewords_collective",
    "KlReport",
    "RecoverySet",
    "kl_gamma",
    "five_qubit_code",
    "build_recovery",
    "apply_recovery",
    "verify_theorem2",
    "ConcatCode",
    "LogicalOps",
    "logical_ops",
    "modified_cnot",
    "leakage_detect_correct",
    "build_concat_code",
    "encode_concatenated",
    "full_correction_cycle",
    "ExperimentConfig",
    "build_experiment_config",
    "SweepResult",
    "simulate_joint",
    "oracle_check",
    "fit_scaling",
    "run_scenario",
    "run_sweep",
]
