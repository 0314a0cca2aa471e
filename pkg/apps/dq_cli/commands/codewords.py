"""dq codewords - Emit DFS codewords in the code-space JSON format."""

from enum import StrEnum
from pathlib import Path

import typer
from rich.console import Console

from apps.dq_cli.common import exit_with_error
from apps.dq_core.dfs import dfs_codewords_collective, dfs_codewords_dephasing
from apps.dq_core.errors import DqError
from apps.dq_core.serialization import CodeSpacePayload, dumps_payload, write_payload

console = Console(stderr=True)


class CodewordMode(StrEnum):
    DEPHASING = "dephasing"
    COLLECTIVE = "collective"


def codewords_command(
    mode: CodewordMode = typer.Option(CodewordMode.DEPHASING, "--mode", "-m", help="DFS family"),
    qubits: int = typer.Option(2, "--qubits", "-k", help="Physical qubit count"),
    out: Path | None = typer.Option(None, "--out", "-o", help="Write to file instead of stdout"),
) -> None:
    """Build the codewords of the f = 0 dephasing DFS or the 4-qubit collective DFS."""
    try:
        if mode is CodewordMode.DEPHASING:
            code = dfs_codewords_dephasing(qubits)
        else:
            code = dfs_codewords_collective(qubits)
    except DqError as e:
        exit_with_error(e)

    payload = CodeSpacePayload.from_code(code)
    if out is None:
        typer.echo(dumps_payload(payload), nl=False)
        return
    write_payload(payload, out)
    console.print(f"[green]✅ Wrote {code.code_dim} codewords ({code.label}) to {out}[/green]")
