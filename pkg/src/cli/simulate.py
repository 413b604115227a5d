"""`simulate` subcommand: Monte Carlo estimate for one generator and one strategy."""

import click
from rich.table import Table

from src.analytics import game_value
from src.cli.common import emit_payload, err_console, experiment_options, handle_errors, print_header
from src.cli.experiment import ExperimentConfig, build_config, load_config_file, resolve
from src.engine.simulation import SimulationResult, estimate_detection
from src.reporting import results_to_csv, to_json


def echo_config(config: ExperimentConfig):
    """Echo the resolved config so every run can be reproduced from its own output."""
    err_console.print(f"[cyan]Seed: {config.seed}[/cyan]")
    err_console.print_json(to_json(config.payload_dict()))


def summary_table(result: SimulationResult, value: float) -> Table:
    gap = (result.estimate - value) / result.standard_error if result.standard_error else 0.0
    table = Table(title=f"{result.generator} vs {result.strategy}")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="white")
    table.add_row("estimate", f"{result.estimate:.6f} ± {result.ci_half_width:.6f}")
    table.add_row("game value", f"{value:.6f}")
    table.add_row("gap / sigma", f"{gap:+.2f}")
    table.add_row("replications", str(result.replications))
    table.add_row("mean passes", f"{result.mean_passes():.6f}")
    return table


def simulation_payload(config: ExperimentConfig, result: SimulationResult) -> str:
    if config.format == "csv":
        return results_to_csv([result])
    return to_json({"config": config.payload_dict(), "result": result.model_dump(mode="json")})


@click.command(name="simulate")
@experiment_options
@click.option("--strategy", default=None, help="fixed:<s> | stationary | after-pass:<k>:<delay> | sweep:<phase>")
@handle_errors
def cmd_simulate(config_path, strategy, fmt, **flags):
    """Estimate the detection probability of one attacker against one schedule"""

    base = load_config_file(config_path) if config_path else None
    config = build_config(base, strategy=strategy, format=fmt, **flags)
    experiment = resolve(config)
    attacker = experiment.strategy()

    print_header("simulate")
    echo_config(config)
    result = estimate_detection(
        experiment.generator,
        attacker,
        experiment.params,
        replications=config.replications,
        seed=config.seed,
        workers=config.workers,
    )
    err_console.print(summary_table(result, game_value(experiment.params)))
    emit_payload(simulation_payload(config, result), config.output)
