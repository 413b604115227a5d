"""Shared CLI plumbing: consoles, option groups, error-to-exit-code mapping."""

import functools
import json
from datetime import datetime
from pathlib import Path

import click
from rich.console import Console
from rich.markup import escape

from src.errors import PatrolGameError
from src.models.distribution import CountDistribution
from src.reporting import save_payload

console = Console()
err_console = Console(stderr=True)

EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _fail(error: Exception, code: int):
    ctx = click.get_current_context()
    obj = ctx.find_root().obj or {}
    if obj.get("error_json"):
        click.echo(
            json.dumps({"error": type(error).__name__, "message": str(error), "exit_code": code}),
            err=True,
        )
    else:
        err_console.print(f"[red]Error: {escape(str(error))}[/red]")
    ctx.exit(code)


def handle_errors(func):
    """Map library errors to exit codes: 2 for invalid input, 3 for runtime failures."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (click.exceptions.Exit, click.ClickException, click.Abort):
            raise
        except PatrolGameError as e:
            _fail(e, e.exit_code)
        except Exception as e:
            _fail(e, EXIT_RUNTIME)

    return wrapper


def game_options(func):
    """--lambda, --t and --p, left unset so config files can fill them."""
    func = click.option("--p", "p", type=float, default=None, help="Per-pass detection probability in (0, 1]")(func)
    func = click.option("--t", "t", type=float, default=None, help="Attack duration")(func)
    func = click.option("--lambda", "lam", type=float, default=None, help="Dispatch-rate cap")(func)
    return func


def experiment_options(func):
    """Options shared by the Monte Carlo commands."""
    options = [
        click.option("-c", "--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="Experiment config JSON; flags override its fields"),
        click.option("--generator", default=None,
                     help="optimal | deterministic | poisson | uniform-offset | file"),
        click.option("--schedule-spec", default=None, help="Schedule-spec JSON for --generator file"),
        click.option("--replications", type=int, default=None, help="Monte Carlo replications"),
        click.option("--seed", type=int, default=None, help="Random seed"),
        click.option("--horizon", type=float, default=None,
                     help="Time the schedule runs before the attacker engages"),
        click.option("--point", type=float, default=None, help="Attack point on the unit perimeter"),
        click.option("--workers", type=int, default=None, help="Worker processes"),
        click.option("-o", "--output", type=click.Path(dir_okay=False), default=None,
                     help="Write the payload here instead of stdout"),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None,
                     help="Payload format"),
    ]
    for option in reversed(options):
        func = option(func)
    return game_options(func)


def print_header(command: str):
    """The single timestamped line of a run; payloads never carry timestamps."""
    err_console.print(f"[dim]# patrolgame {command} run at {datetime.now().isoformat(timespec='seconds')}[/dim]")


def format_pmf(distribution: CountDistribution) -> str:
    return "{" + ", ".join(f"{n}: {mass:.6g}" for n, mass in distribution.pmf.items()) + "}"


def emit_payload(content: str, output: str | None):
    """Send a payload to stdout or to the requested file."""
    if output:
        save_payload(content, Path(output))
        err_console.print(f"[green]✓ Results saved to: {output}[/green]")
    else:
        click.echo(content, nl=False)
