import logging

import click
from rich.logging import RichHandler

from src.cli.best_response import cmd_best_response
from src.cli.common import err_console
from src.cli.compare import cmd_compare
from src.cli.lemma import cmd_lemma
from src.cli.repro import cmd_repro
from src.cli.simulate import cmd_simulate
from src.cli.validate import cmd_validate
from src.cli.value import cmd_value

LOG_LEVELS = {0: logging.WARNING, 1: logging.INFO}


def setup_logging(verbosity: int):
    logging.basicConfig(
        level=LOG_LEVELS.get(verbosity, logging.DEBUG),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


@click.group()
@click.version_option(version="0.1.0")
@click.option("-v", "--verbose", count=True, help="Log more (-v info, -vv debug)")
@click.option("--error-json", is_flag=True, help="Report errors as a JSON object on stderr")
@click.pass_context
def cli(ctx, verbose, error_json):
    """Perimeter patrol game CLI - values, schedules and Monte Carlo checks

    Compute the game value, simulate patrol schedules against attackers and
    reproduce the bundled experiments.
    """
    setup_logging(verbose)
    ctx.ensure_object(dict)
    ctx.obj["error_json"] = error_json


# Register subcommands
cli.add_command(cmd_best_response)
cli.add_command(cmd_compare)
cli.add_command(cmd_lemma)
cli.add_command(cmd_repro)
cli.add_command(cmd_simulate)
cli.add_command(cmd_validate)
cli.add_command(cmd_value)


if __name__ == "__main__":
    cli()
