"""dq CLI - Main entry point.

Environment variables:
    DQ_LOG_LEVEL: Logging level for library messages (default: WARNING).
"""

import logging
import os

import typer
from rich.console import Console

from apps.dq_cli.commands import channel, codewords, simulate, sweep, verify

app = typer.Typer(
    name="dq",
    help="DFS-QECC CLI - Verify decoherence-free subspaces and error-correcting codes.",
    add_completion=False,
)
console = Console()

VERSION = "0.1.0"

# Register commands
app.command("verify-dfs")(verify.verify_dfs_command)
app.command("verify-qecc")(verify.verify_qecc_command)
app.command("codewords")(codewords.codewords_command)
app.command("simulate")(simulate.simulate_command)
app.command("sweep")(sweep.sweep_command)
app.command("channel")(channel.channel_command)


@app.callback()
def main() -> None:
    """Configure logging for every subcommand."""
    level = os.getenv("DQ_LOG_LEVEL", "WARNING").upper()
    if level not in logging.getLevelNamesMapping():
        level = "WARNING"
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )


@app.command()
def version() -> None:
    """Show version information."""
    console.print(f"[bold]dfs-qecc[/bold] v{VERSION}")


if __name__ == "__main__":
    app()
