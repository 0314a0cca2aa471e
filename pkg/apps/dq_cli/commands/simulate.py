"""dq simulate - Inject one error into an encoded state and run the correction cycle."""

from typing import Any

import numpy as np
import typer

from apps.dq_cli.common import emit_json, exit_with_error
from apps.dq_core.concat import (
    apply_block_error,
    apply_physical_pauli,
    build_concat_code,
    encode_concatenated,
    inner_code,
    leakage_detect_correct,
    logical_ops,
    modified_cnot,
    named_block_error,
    run_correction_cycle,
)
from apps.dq_core.errors import DqError, ParameterError
from apps.dq_core.harness import generic_logical_amplitudes
from apps.dq_core.qcore import PAULI, DensityMatrix, apply_local, fidelity, tensor


def _injection(
    block: int | None, error: str | None, qubit: int | None, pauli: str | None
) -> dict[str, Any]:
    block_given = block is not None or error is not None
    qubit_given = qubit is not None or pauli is not None
    if block_given == qubit_given:
        raise ParameterError("Give either --block with --error or --qubit with --pauli")
    if block_given:
        if block is None or error is None:
            raise ParameterError("--block and --error must be given together")
        return {"kind": "block", "block": block, "error": error.strip().upper()}
    if qubit is None or pauli is None:
        raise ParameterError("--qubit and --pauli must be given together")
    return {"kind": "physical", "qubit": qubit, "pauli": pauli.strip().upper()}


def _dominant(probabilities: dict[str, float]) -> str:
    return max(probabilities, key=lambda k: probabilities[k])


def _simulate_register(injected: dict[str, Any]) -> dict[str, Any]:
    code = build_concat_code()
    alpha, beta = generic_logical_amplitudes()
    rho0 = encode_concatenated(alpha, beta, code).to_density()
    if injected["kind"] == "block":
        op = named_block_error(injected["error"], code.ops)
        corrupted = apply_block_error(rho0, op, injected["block"], code)
    else:
        corrupted = apply_physical_pauli(rho0, injected["qubit"], injected["pauli"], code)
    cycle = run_correction_cycle(corrupted, code)
    return {
        "syndromes": {
            "blocks": [_dominant(p) for p in cycle.block_outcomes],
            "outer": _dominant(cycle.outer_syndromes),
        },
        "final_fidelity": fidelity(rho0, cycle.state),
    }


def _simulate_block(injected: dict[str, Any]) -> dict[str, Any]:
    inner = inner_code("collective4")
    ops = logical_ops(inner)
    alpha, beta = generic_logical_amplitudes()
    psi = inner.isometry @ np.array([alpha, beta])
    if injected["kind"] == "block":
        if injected["block"] != 0:
            raise ParameterError("collective4 runs a single block; use --block 0")
        corrupted = named_block_error(injected["error"], ops) @ psi
    else:
        n_qubits = 4
        if not 0 <= injected["qubit"] < n_qubits:
            raise ParameterError(f"Qubit index must be in [0, {n_qubits - 1}], got {injected['qubit']}")
        if injected["pauli"] not in PAULI:
            raise ParameterError(f"Unknown Pauli '{injected['pauli']}'")
        corrupted = apply_local(PAULI[injected["pauli"]], psi, injected["qubit"], [2] * n_qubits)
    norm = float(np.linalg.norm(corrupted))
    if norm == 0:
        raise ParameterError("Error annihilates the encoded state")
    data = DensityMatrix.from_vector(corrupted / norm)
    ancilla = DensityMatrix.from_vector(ops.basis[:, 0])
    result = leakage_detect_correct(
        DensityMatrix(tensor(data.matrix, ancilla.matrix)), ops, modified_cnot(inner)
    )
    return {
        "syndromes": {"blocks": [result.syndrome], "outer": None},
        "final_fidelity": fidelity(DensityMatrix.from_vector(psi), result.state),
    }


def simulate_command(
    inner: str = typer.Option("dephasing2", "--inner", "-i", help="Inner code: dephasing2 or collective4"),
    block: int | None = typer.Option(None, "--block", "-b", help="Block index for a block error"),
    error: str | None = typer.Option(None, "--error", "-e", help="Block error: X, Y, Z, P<j>, P<j>Z"),
    qubit: int | None = typer.Option(None, "--qubit", "-q", help="Physical qubit for a Pauli error"),
    pauli: str | None = typer.Option(None, "--pauli", "-p", help="Physical Pauli: X, Y or Z"),
) -> None:
    """Encode a generic logical state, inject one error and correct it.

    dephasing2 runs the full 10-qubit concatenated cycle; collective4 runs
    one 4-qubit block through leakage detection only.
    """
    try:
        injected = _injection(block, error, qubit, pauli)
        if inner == "dephasing2":
            outcome = _simulate_register(injected)
        elif inner == "collective4":
            outcome = _simulate_block(injected)
        else:
            raise ParameterError(f"Unknown inner code '{inner}', use dephasing2 or collective4")
    except DqError as e:
        exit_with_error(e)
    emit_json({"inner": inner, "injected": injected, **outcome})
