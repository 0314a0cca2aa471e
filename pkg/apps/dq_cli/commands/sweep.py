"""dq sweep - Run a fidelity-decay experiment over a (lambda, epsilon, t) grid."""

import logging
from pathlib import Path

import typer
from rich.console import Console
from rich.table import Table

from apps.dq_cli.common import exit_with_error
from apps.dq_core.config import BathMode, Scenario, build_experiment_config, parse_grid
from apps.dq_core.errors import DqError
from apps.dq_core.harness import SweepResult, run_sweep
from apps.dq_core.outputs import render_sweep, write_sweep

console = Console(stderr=True)
logger = logging.getLogger(__name__)


def _print_summary(result: SweepResult, out: Path) -> None:
    failed = sum(1 for p in result.points if p.error is not None)
    console.print(f"[bold green]✅ Sweep complete:[/bold green] {len(result.points)} points -> {out}")
    if failed:
        console.print(f"[yellow]⚠️  {failed} point(s) failed; see the error field[/yellow]")
    if not result.fits:
        return
    table = Table(title=f"Scaling fits ({result.scenario})")
    table.add_column("Axis", style="cyan")
    table.add_column("Slope", justify="right")
    table.add_column("Intercept", justify="right")
    table.add_column("r²", justify="right")
    for axis, fit in sorted(result.fits.items()):
        table.add_row(axis, f"{fit.slope:.4f}", f"{fit.intercept:.4f}", f"{fit.r_squared:.6f}")
    console.print(table)


def sweep_command(
    config: Path | None = typer.Option(None, "--config", help="YAML key-value config file"),
    scenario: Scenario | None = typer.Option(None, "--scenario", "-s", help="Experiment scenario"),
    eps_grid: str | None = typer.Option(None, "--eps-grid", help="Comma-separated epsilons"),
    lambda_grid: str | None = typer.Option(None, "--lambda-grid", help="Comma-separated rates"),
    t_grid: str | None = typer.Option(None, "--t-grid", help="Comma-separated times"),
    bath: BathMode | None = typer.Option(None, "--bath", help="Collective noise: exact or markov"),
    inner: str | None = typer.Option(None, "--inner", help="Inner code: dephasing2 or collective4"),
    noise_model: str | None = typer.Option(None, "--noise-model", help="independent_dephasing or independent_depolarizing"),
    seed: int | None = typer.Option(None, "--seed", help="Experiment seed"),
    out: Path | None = typer.Option(None, "--out", "-o", help="Output file (stdout when omitted)"),
    output_format: str | None = typer.Option(None, "--format", "-f", help="csv or json"),
    parallel: int | None = typer.Option(None, "--parallel", "-j", help="Worker processes"),
) -> None:
    """Evaluate infidelity over the grid and fit log-log scaling exponents.

    Flags override environment variables (DQ_SEED, DQ_PARALLEL), which
    override the config file.
    """
    try:
        cfg = build_experiment_config(
            config,
            {
                "scenario": scenario,
                "eps_grid": parse_grid(eps_grid),
                "lambda_grid": parse_grid(lambda_grid),
                "t_grid": parse_grid(t_grid),
                "bath": bath,
                "inner": inner,
                "noise_model": noise_model,
                "seed": seed,
                "format": output_format,
                "parallel": parallel,
            },
        )
        logger.info(f"Running sweep: {cfg.scenario} with {cfg.parallel} worker(s)")
        result = run_sweep(cfg, cfg.parallel)
    except DqError as e:
        exit_with_error(e)

    if out is None:
        typer.echo(render_sweep(result, cfg.output_format), nl=False)
        return
    write_sweep(result, out, cfg.output_format)
    _print_summary(result, out)
