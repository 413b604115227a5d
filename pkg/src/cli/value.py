"""`value` subcommand: closed-form game value."""

import click
from rich.table import Table

from src.analytics import game_value_forms
from src.cli.common import console, game_options, handle_errors
from src.errors import InvalidParamsError
from src.models.params import GameParams
from src.reporting import to_json


@click.command(name="value")
@game_options
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", help="Output format")
@handle_errors
def cmd_value(lam, t, p, fmt):
    """Print the game value V(lambda, t, p) with m, r and both formula forms"""

    if lam is None or t is None or p is None:
        raise InvalidParamsError("--lambda, --t and --p are all required")
    forms = game_value_forms(GameParams(lam=lam, t=t, p=p))

    if fmt == "json":
        click.echo(to_json(forms.as_dict()), nl=False)
        return

    table = Table(title=f"Game value for lambda={lam:g}, t={t:g}, p={p:g}")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="white")
    table.add_row("V", f"{forms.value:.10g}")
    table.add_row("m", str(forms.params.m))
    table.add_row("r", f"{forms.params.r:.10g}")
    table.add_row("delta", f"{forms.params.delta:.10g}")
    table.add_row("branch", f"r = 0 ({forms.branch})" if forms.params.is_integer_load else f"r > 0 ({forms.branch})")
    table.add_row("case form", f"{forms.case_form:.15g}")
    table.add_row("concise form", f"{forms.concise_form:.15g}")
    console.print(table)
