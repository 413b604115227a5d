"""`lemma` subcommand: closed-form minimizer of E[(1-p)^N] against the brute-force oracle."""

import click
from rich.table import Table

from src.analytics import AGREEMENT_TOLERANCE, expected_miss, lemma_oracle, optimal_count_distribution, poisson_count_distribution
from src.cli.common import console, format_pmf, handle_errors
from src.config import settings
from src.reporting import to_json


@click.command(name="lemma")
@click.option("--c", "c", type=float, required=True, help="Mean pass count")
@click.option("--p", "p", type=float, default=0.5, show_default=True, help="Per-pass detection probability")
@click.option("--max-support", type=int, default=settings.max_support, show_default=True,
              help="Largest count the oracle may use")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table", help="Output format")
@handle_errors
def cmd_lemma(c, p, max_support, fmt):
    """Compare the two-point minimizer with exhaustive two-point enumeration"""

    closed = optimal_count_distribution(c)
    closed_miss = expected_miss(closed, p)
    oracle_miss, oracle = lemma_oracle(c, p, max_support)
    poisson_miss = expected_miss(poisson_count_distribution(c), p)
    agree = abs(closed_miss - oracle_miss) <= AGREEMENT_TOLERANCE

    if fmt == "json":
        click.echo(to_json({
            "c": c,
            "p": p,
            "max_support": max_support,
            "closed_form": {"pmf": closed.as_dict(), "miss": closed_miss},
            "oracle": {"pmf": oracle.as_dict(), "miss": oracle_miss},
            "poisson_miss": poisson_miss,
            "agree": agree,
        }), nl=False)
        return

    table = Table(title=f"Minimizing E[(1-p)^N] with E[N] = {c:g}, p = {p:g}")
    table.add_column("Source", style="cyan")
    table.add_column("Distribution", style="white")
    table.add_column("Miss", style="yellow")
    table.add_row("closed form", format_pmf(closed), f"{closed_miss:.10g}")
    table.add_row("oracle", format_pmf(oracle), f"{oracle_miss:.10g}")
    table.add_row("poisson", f"Poisson({c:g})", f"{poisson_miss:.10g}")
    console.print(table)
    console.print("[green]AGREE[/green]" if agree else "[red]DISAGREE[/red]")
