"""`compare` subcommand: rank (generator, strategy) pairs under shared seeds."""

import click
from rich.table import Table

from src.attackers.strategies import AttackerStrategy
from src.cli.common import emit_payload, err_console, experiment_options, handle_errors, print_header
from src.cli.experiment import ResolvedExperiment, build_config, load_config_file, resolve
from src.cli.simulate import echo_config
from src.engine.compare import compare_strategies
from src.errors import StrategySpecError
from src.reporting import results_to_csv, to_json
from src.schedules.generators import ScheduleGenerator
from src.schedules.spec import resolve_generator

DEFAULT_PAIRS = ("optimal+stationary", "poisson+stationary")


def split_pair(pair: str) -> tuple[str, str]:
    generator, sep, strategy = pair.partition("+")
    if not sep or not generator or not strategy:
        raise StrategySpecError(f"Pair '{pair}' must look like <generator>+<strategy>")
    return generator.strip(), strategy.strip()


def resolve_pairs(experiment: ResolvedExperiment, pairs) -> list[tuple[ScheduleGenerator, AttackerStrategy]]:
    """Turn `<generator>+<strategy>` strings into library objects sharing the experiment's setup."""
    resolved = []
    for pair in pairs:
        generator_name, strategy_spec = split_pair(pair)
        generator = resolve_generator(generator_name, experiment.params, experiment.config.schedule_spec)
        resolved.append((generator, experiment.strategy(strategy_spec)))
    return resolved


@click.command(name="compare")
@experiment_options
@click.option("--pair", "pairs", multiple=True,
              help="<generator>+<strategy>, repeatable (default: the config's pairs, else optimal+stationary, poisson+stationary)")
@handle_errors
def cmd_compare(config_path, pairs, fmt, **flags):
    """Compare detection across generator/strategy pairs with common random numbers"""

    base = load_config_file(config_path) if config_path else None
    config = build_config(base, format=fmt, **flags)
    experiment = resolve(config)

    resolved = resolve_pairs(experiment, pairs or config.pairs or DEFAULT_PAIRS)

    print_header("compare")
    echo_config(config)
    comparison = compare_strategies(
        resolved,
        experiment.params,
        replications=config.replications,
        seed=config.seed,
        workers=config.workers,
    )

    table = Table(title="Detection by pair (shared seeds)")
    table.add_column("Rank", style="cyan")
    table.add_column("Pair", style="white")
    table.add_column("Estimate", style="yellow")
    table.add_column("CI", style="yellow")
    for row in comparison.rows:
        table.add_row(str(row.rank), row.label, f"{row.result.estimate:.6f}", f"± {row.result.ci_half_width:.6f}")
    err_console.print(table)

    gaps = Table(title="Pairwise differences")
    gaps.add_column("First - Second", style="cyan")
    gaps.add_column("Difference", style="white")
    gaps.add_column("CI", style="yellow")
    for diff in comparison.differences:
        gaps.add_row(f"{diff.first} - {diff.second}", f"{diff.difference:+.6f}", f"± {diff.ci_half_width:.6f}")
    err_console.print(gaps)

    if config.format == "csv":
        payload = results_to_csv(row.result for row in comparison.rows)
    else:
        payload = to_json({"config": config.payload_dict(), "comparison": comparison.as_dict()})
    emit_payload(payload, config.output)
