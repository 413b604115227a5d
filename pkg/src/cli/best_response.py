"""`best-response` subcommand: search the attacker family for the lowest detection."""

import click
from rich.table import Table

from src.analytics import game_value
from src.attackers.search import best_response_search
from src.cli.common import emit_payload, err_console, experiment_options, handle_errors, print_header
from src.cli.experiment import build_config, load_config_file, resolve
from src.cli.simulate import echo_config
from src.reporting import results_to_csv, to_json

SHOWN_CANDIDATES = 10


@click.command(name="best-response")
@experiment_options
@click.option("--family", default=None,
              help="Comma-separated tokens: stationary, sweep, after-pass, or single strategies")
@handle_errors
def cmd_best_response(config_path, family, fmt, **flags):
    """Find the attacker strategy in the family that minimizes detection"""

    base = load_config_file(config_path) if config_path else None
    tokens = family.split(",") if family else None
    config = build_config(base, family=tokens, format=fmt, command="best-response", **flags)
    experiment = resolve(config)
    candidates = experiment.family()

    print_header("best-response")
    echo_config(config)
    err_console.print(f"[cyan]Searching {len(candidates)} candidate strategies...[/cyan]")
    search = best_response_search(
        experiment.generator,
        experiment.params,
        candidates,
        replications=config.replications,
        seed=config.seed,
        workers=config.workers,
    )

    value = game_value(experiment.params)
    ranked = sorted(search.candidates, key=lambda pair: pair[1].estimate)
    table = Table(title=f"Best responses to {experiment.generator.label} (game value {value:.6f})")
    table.add_column("Strategy", style="cyan")
    table.add_column("Estimate", style="white")
    table.add_column("CI", style="yellow")
    for strategy, result in ranked[:SHOWN_CANDIDATES]:
        table.add_row(strategy.label, f"{result.estimate:.6f}", f"± {result.ci_half_width:.6f}")
    err_console.print(table)
    err_console.print(f"[green]✓ Winner: {search.strategy.label} at {search.estimate:.6f}[/green]")

    if config.format == "csv":
        payload = results_to_csv(result for _, result in search.candidates)
    else:
        payload = to_json({
            "config": config.payload_dict(),
            "winner": search.strategy.label,
            "worst_case": search.worst.model_dump(mode="json"),
            "candidates": [result.model_dump(mode="json") for _, result in search.candidates],
        })
    emit_payload(payload, config.output)
