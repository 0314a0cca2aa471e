"""Shared helpers for dq commands."""

import json
from typing import Any, NoReturn

import typer

EXIT_FAILURE = 2


def emit_json(record: dict[str, Any]) -> None:
    """Print a machine-readable record on stdout."""
    typer.echo(json.dumps(record, indent=2, ensure_ascii=False, sort_keys=True))


def exit_with_error(e: Exception) -> NoReturn:
    """Print ``{"error", "message"}`` on stderr and exit non-zero."""
    record = {"error": type(e).__name__, "message": str(e)}
    typer.echo(json.dumps(record, ensure_ascii=False, sort_keys=True), err=True)
    raise typer.Exit(EXIT_FAILURE) from e
