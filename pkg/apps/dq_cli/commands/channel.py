"""dq channel - Export a collective dephasing channel as JSON."""

from pathlib import Path

import typer
from rich.console import Console

from apps.dq_cli.common import exit_with_error
from apps.dq_core.channels import collective_dephasing_exact, markovian_dephasing
from apps.dq_core.config import BathMode, load_bath_model
from apps.dq_core.errors import DqError
from apps.dq_core.serialization import ChannelPayload, dumps_payload, write_payload

console = Console(stderr=True)


def channel_command(
    qubits: int = typer.Option(2, "--qubits", "-k", help="Physical qubit count"),
    t: float = typer.Option(1.0, "--t", help="Evolution time"),
    bath: BathMode = typer.Option(BathMode.EXACT, "--bath", help="exact (finite bath) or markov"),
    rate: float = typer.Option(1.0, "--lambda", help="Markovian collective rate"),
    config: Path | None = typer.Option(None, "--config", help="Config file with bath keys"),
    out: Path | None = typer.Option(None, "--out", "-o", help="Write to file instead of stdout"),
) -> None:
    """Build collective dephasing on k qubits and print its Kraus operators."""
    try:
        if bath is BathMode.EXACT:
            ch = collective_dephasing_exact(qubits, load_bath_model(config), t)
        else:
            ch = markovian_dephasing(qubits, rate, t)
    except DqError as e:
        exit_with_error(e)

    payload = ChannelPayload.from_channel(ch)
    if out is None:
        typer.echo(dumps_payload(payload), nl=False)
        return
    write_payload(payload, out)
    console.print(f"[green]✅ Wrote {len(ch)} Kraus operators ({ch.label}) to {out}[/green]")
