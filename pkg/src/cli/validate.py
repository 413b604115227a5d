"""`validate` subcommand: check a schedule spec against its rate cap."""

from pathlib import Path

import click
import numpy as np
from rich.table import Table

from src.cli.common import EXIT_VALIDATION, console, handle_errors
from src.config import settings
from src.models.perimeter import PerimeterPoint, validate_rate_cap
from src.reporting import realization_to_csv, save_payload, to_json
from src.schedules.spec import RATE_SLACK, load_schedule_spec

RATE_CAP_HORIZON_LOAD = 1e4


@click.command(name="validate")
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Schedule-spec JSON")
@click.option("--horizon", type=float, default=None, help="Measured span (default 10^4 / lambda)")
@click.option("--point", type=float, default=settings.attack_point, show_default=True,
              help="Perimeter point where passes are counted")
@click.option("--tolerance", type=float, default=settings.rate_cap_tolerance, show_default=True,
              help="Allowed relative excess of the dispatch rate")
@click.option("--seed", type=int, default=settings.seed, show_default=True, help="Random seed")
@click.option("--dump", type=click.Path(dir_okay=False), default=None,
              help="Also write the sampled realization as CSV")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", help="Output format")
@handle_errors
def cmd_validate(spec_path, horizon, point, tolerance, seed, dump, fmt):
    """Sample a schedule spec and report dispatch and pass rates against lambda"""

    generator = load_schedule_spec(spec_path, enforce_rate_cap=False)
    lam = generator.params.lam
    span = horizon or RATE_CAP_HORIZON_LOAD / lam
    realization = generator.sample(generator.horizon_for(span), np.random.default_rng(seed))
    report = validate_rate_cap(realization, lam, PerimeterPoint(point), tolerance)
    declared_excess = generator.expected_rate > lam * (1.0 + RATE_SLACK)
    violated = report.violation or declared_excess

    if dump:
        save_payload(realization_to_csv(realization), Path(dump))

    if fmt == "json":
        click.echo(to_json({
            "spec": str(spec_path),
            "seed": seed,
            "declared_rate": generator.expected_rate,
            "report": report.as_dict(),
            "violation": violated,
        }), nl=False)
    else:
        console.print(f"[cyan]Seed: {seed}[/cyan]")
        table = Table(title=f"Rate cap check for '{generator.label}' (lambda={lam:g})")
        table.add_column("Quantity", style="cyan")
        table.add_column("Value", style="white")
        table.add_row("declared dispatch rate", f"{generator.expected_rate:.6g}")
        table.add_row("observed dispatch rate", f"{report.dispatch_rate:.6g}")
        table.add_row(f"pass rate at x={point:g}", f"{report.pass_rate:.6g}")
        table.add_row("pass/dispatch ratio", f"{report.pass_dispatch_ratio:.6g}")
        table.add_row("span", f"{report.horizon:.6g}")
        console.print(table)

    if violated:
        console.print("[red]✗ Rate cap violated[/red]")
        click.get_current_context().exit(EXIT_VALIDATION)
    console.print("[green]✓ Within rate cap[/green]")
