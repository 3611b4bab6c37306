"""CLI entry point: run, validate, list-scenarios with rich output."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from bohmex import __version__
from bohmex.config import ConfigError, ScenarioConfig, load_config
from bohmex.errors import BohmexError
from bohmex.scenarios import SCENARIOS, check_config, run_scenario

console = Console()

EXIT_ERROR = 1
EXIT_GATES_FAILED = 2


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=True, show_path=verbose)],
        force=True,
    )


def _load(config_path: str, label: str) -> ScenarioConfig:
    try:
        return load_config(config_path)
    except ConfigError as e:
        console.print(f"[red]{label}:[/red] {e}")
        sys.exit(EXIT_ERROR)


@click.group()
@click.version_option(version=__version__, package_name="bohmex")
@click.option("--verbose", "-v", is_flag=True, help="Log per-step diagnostics.")
def cli(verbose: bool) -> None:
    """bohmex: many-particle Bohmian trajectories with exchange symmetry."""
    _setup_logging(verbose)


@cli.command()
@click.argument("config_path", type=click.Path(exists=True))
def run(config_path: str) -> None:
    """Run a scenario from a YAML config file."""
    config = _load(config_path, "Config error")

    console.print(f"[bold blue]Running scenario:[/bold blue] {config.scenario}")
    console.print(f"  Seed: {config.seed}")
    console.print(f"  Output: {config.output_path()}")
    console.print()

    try:
        with console.status("[bold green]Simulating...[/bold green]"):
            outcome = run_scenario(config)
    except (BohmexError, ConfigError) as e:
        console.print(f"[red]Run failed:[/red] {type(e).__name__}: {e}")
        sys.exit(EXIT_ERROR)

    if outcome.gates:
        table = Table(title="Acceptance Gates")
        table.add_column("Gate", style="cyan")
        table.add_column("Value", style="green")
        table.add_column("Threshold", style="blue")
        table.add_column("Result")
        for gate in outcome.gates:
            verdict = "[green]PASS[/green]" if gate.passed else "[red]FAIL[/red]"
            table.add_row(gate.name, f"{gate.value:.4g}", f"{gate.threshold:.4g}", verdict)
        console.print(table)

    summary = Table(title="Summary")
    summary.add_column("Metric", style="cyan")
    summary.add_column("Value", style="green")
    summary.add_row("Artifacts", str(len(outcome.artifacts)))
    for key, value in outcome.summary.items():
        summary.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    console.print(summary)

    if not outcome.passed:
        console.print(f"[yellow]{len(outcome.failed_gates)} gate(s) failed[/yellow]")
        sys.exit(EXIT_GATES_FAILED)
    console.print("[green]Completed successfully![/green]")


@cli.command()
@click.argument("config_path", type=click.Path(exists=True))
def validate(config_path: str) -> None:
    """Validate a scenario config and its physical sanity without running it."""
    config = _load(config_path, "Invalid config")
    try:
        warnings = check_config(config)
    except (BohmexError, ConfigError) as e:
        console.print(f"[red]Invalid config:[/red] {type(e).__name__}: {e}")
        sys.exit(EXIT_ERROR)

    table = Table(title=f"Config: {config.scenario}")
    table.add_column("Field", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("Scenario", config.scenario)
    table.add_row("Seed", str(config.seed))
    table.add_row("Species", config.species)
    table.add_row("Packets", str(len(config.packets)))
    table.add_row("Members", str(config.ensemble.members))
    table.add_row("Grid", f"[{config.grid.x_min:g}, {config.grid.x_max:g}] nm, "
                  f"{config.grid.n_points} points")
    table.add_row("dt / t_total", f"{config.propagation.dt:g} / {config.propagation.t_total:g} fs")
    table.add_row("Output", str(config.output_path()))
    console.print(table)
    for warning in warnings:
        console.print(f"[yellow]Warning:[/yellow] {warning}")
    console.print("[green]Config is valid![/green]")


@cli.command("list-scenarios")
@click.option("--dir", "config_dir", default="./configs", help="Directory containing config files.")
def list_scenarios(config_dir: str) -> None:
    """List the available scenarios and the configs that select them."""
    configs: dict[str, list[str]] = {}
    config_path = Path(config_dir)
    if config_path.is_dir():
        for yaml_file in sorted(config_path.glob("*.yaml")) + sorted(config_path.glob("*.yml")):
            try:
                configs.setdefault(load_config(yaml_file).scenario, []).append(yaml_file.name)
            except ConfigError:
                configs.setdefault("", []).append(yaml_file.name)

    table = Table(title="Available Scenarios")
    table.add_column("Scenario", style="cyan")
    table.add_column("Description", style="green")
    table.add_column("Configs", style="blue")
    for name, scenario in SCENARIOS.items():
        table.add_row(str(name), scenario.description, ", ".join(configs.get(str(name), [])))
    console.print(table)

    if configs.get(""):
        console.print(f"[red]Invalid configs:[/red] {', '.join(configs[''])}")


if __name__ == "__main__":
    cli()
