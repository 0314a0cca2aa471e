"""dq verify-dfs / verify-qecc - Check a channel against a code."""

from pathlib import Path

import typer

from apps.dq_cli.common import emit_json, exit_with_error
from apps.dq_core.dfs import DFS_TOL, verify_dfs
from apps.dq_core.errors import DqError
from apps.dq_core.qecc import KL_TOL, kl_gamma
from apps.dq_core.serialization import load_channel, load_code


def verify_dfs_command(
    channel_path: Path = typer.Option(..., "--channel", "-c", help="Channel JSON file"),
    code_path: Path = typer.Option(..., "--code", "-k", help="Code-space JSON file"),
    tol: float = typer.Option(DFS_TOL, "--tol", help="Residual tolerance"),
) -> None:
    """Check that every Kraus operator acts on the code as a scalar times one unitary."""
    try:
        report = verify_dfs(load_channel(channel_path), load_code(code_path), tol)
    except DqError as e:
        exit_with_error(e)
    emit_json({
        "is_dfs": report.is_dfs,
        "residual": report.residual,
        "coherence_deficit": report.coherence_deficit,
        "n_kraus": int(report.fitted_g.shape[0]),
        "tol": report.tol,
    })


def verify_qecc_command(
    channel_path: Path = typer.Option(..., "--channel", "-c", help="Channel JSON file"),
    code_path: Path = typer.Option(..., "--code", "-k", help="Code-space JSON file"),
    tol: float = typer.Option(KL_TOL, "--tol", help="Knill-Laflamme tolerance"),
) -> None:
    """Check the Knill-Laflamme conditions of the channel's Kraus operators on the code."""
    try:
        report = kl_gamma(load_channel(channel_path), load_code(code_path), tol)
    except DqError as e:
        exit_with_error(e)
    emit_json({
        "passes": report.passes,
        "residual": report.off_block_residual,
        "rank": report.gamma_rank,
        "degenerate": report.degenerate,
        "n_errors": report.n_errors,
    })
