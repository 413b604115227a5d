"""`repro` subcommand: run every bundled experiment and check it against its expectation."""

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple

import click
import numpy as np
from rich.table import Table

from src.analytics import (
    AGREEMENT_TOLERANCE,
    expected_miss,
    game_value,
    game_value_forms,
    lemma_oracle,
    optimal_count_distribution,
)
from src.attackers.search import best_response_search
from src.cli.common import EXIT_RUNTIME, console, handle_errors, print_header
from src.cli.compare import resolve_pairs
from src.cli.experiment import ExperimentConfig, build_config, load_config_file, resolve
from src.cli.simulate import simulation_payload
from src.cli.validate import RATE_CAP_HORIZON_LOAD
from src.config import settings
from src.engine.compare import compare_strategies
from src.engine.simulation import SimulationResult, estimate_detection
from src.engine.stats import chi_square_pvalue, ks_distance_exponential
from src.errors import FormulaMismatchError, InsufficientPassesError, InvalidParamsError
from src.models.params import GameParams
from src.models.perimeter import PerimeterPoint, validate_rate_cap
from src.schedules.generators import sample_optimal

GAP_SAMPLES = 100_000
GAP_DISTANCE = 0.02
VALUE_SAMPLES = 10_000
LEMMA_SAMPLES = 200
LEMMA_MAX_MEAN = 10.0


class Verdict(NamedTuple):
    observed: float
    target: str
    passed: bool


@dataclass(frozen=True)
class ReproOutcome:
    name: str
    check: str
    observed: float
    target: str
    passed: bool
    seconds: float
    max_seconds: float | None = None

    @property
    def in_time(self) -> bool:
        return self.max_seconds is None or self.seconds <= self.max_seconds

    @property
    def ok(self) -> bool:
        return self.passed and self.in_time


def _within_sigmas(observed: float, expected: float, standard_error: float, sigmas: float) -> Verdict:
    if standard_error == 0:
        deviation = 0.0 if observed == expected else float("inf")
    else:
        deviation = abs(observed - expected) / standard_error
    return Verdict(observed, f"{expected:.6f} ± {sigmas:g}σ ({deviation:.2f}σ)", deviation <= sigmas)


def _measure(config: ExperimentConfig, replications: int) -> SimulationResult:
    experiment = resolve(config)
    if config.command == "best-response":
        search = best_response_search(
            experiment.generator,
            experiment.params,
            experiment.family(),
            replications=replications,
            seed=config.seed,
            workers=config.workers,
        )
        return search.worst
    return estimate_detection(
        experiment.generator,
        experiment.strategy(),
        experiment.params,
        replications=replications,
        seed=config.seed,
        workers=config.workers,
    )


def check_estimate(config: ExperimentConfig, replications: int) -> Verdict:
    """Detection estimate within `sigmas` of the expectation (the game value by default)."""
    result = _measure(config, replications)
    expected = config.expected if config.expected is not None else game_value(config.game_params())
    return _within_sigmas(result.estimate, expected, result.standard_error, config.sigmas)


def check_mean_passes(config: ExperimentConfig, replications: int) -> Verdict:
    """Mean pass count within `sigmas` of the expectation (lambda * t by default)."""
    result = _measure(config, replications)
    expected = config.expected if config.expected is not None else config.game_params().load
    return _within_sigmas(result.mean_passes(), expected, result.pass_count_standard_error(), config.sigmas)


def check_pass_pmf(config: ExperimentConfig, replications: int) -> Verdict:
    """Chi-square fit of the pass counts to the two-point law around lambda * t."""
    result = _measure(config, replications)
    law = optimal_count_distribution(config.game_params().load)
    pvalue = chi_square_pvalue(result.pass_counts, law)
    return Verdict(pvalue, f"p-value > {config.min_pvalue:g}", pvalue > config.min_pvalue)


def check_paired_gap(config: ExperimentConfig, replications: int) -> Verdict:
    """First pair below the second by more than `sigmas` standard errors of the paired difference."""
    experiment = resolve(config)
    table = compare_strategies(
        resolve_pairs(experiment, config.pairs),
        experiment.params,
        replications=replications,
        seed=config.seed,
        workers=config.workers,
    )
    (diff,) = table.differences
    margin = config.sigmas * diff.standard_error
    return Verdict(diff.difference, f"< -{config.sigmas:g}σ = {-margin:.6f}", diff.difference < -margin)


def check_rate_cap(config: ExperimentConfig, replications: int) -> Verdict:
    """Per-point pass rate within the tolerance of lambda and no dispatch-rate violation."""
    experiment = resolve(config)
    generator, lam = experiment.generator, experiment.params.lam
    span = config.horizon or RATE_CAP_HORIZON_LOAD / lam
    realization = generator.sample(generator.horizon_for(span), np.random.default_rng(config.seed))
    tolerance = config.tolerance or settings.rate_cap_tolerance
    report = validate_rate_cap(realization, lam, experiment.point, tolerance)
    within = abs(report.pass_rate - lam) <= tolerance * lam
    return Verdict(report.pass_rate, f"{lam:g} ± {tolerance:.0%}", within and not report.violation)


def check_gap_ks(config: ExperimentConfig, replications: int) -> Verdict:
    """KS distance between optimal-schedule interarrival gaps and Exp(lambda)."""
    params = config.game_params()
    samples = config.samples or GAP_SAMPLES
    limit = config.max_distance or GAP_DISTANCE
    rng = np.random.default_rng(config.seed)
    horizon = max(1.02 * (samples + 1) / params.lam, params.t)
    for _ in range(settings.max_horizon_doublings + 1):
        gaps = sample_optimal(params, horizon, rng).interarrival_gaps()
        if len(gaps) >= samples:
            distance = ks_distance_exponential(gaps[:samples], params.lam)
            return Verdict(distance, f"< {limit:g}", distance < limit)
        horizon *= 2
    raise InsufficientPassesError(f"Could not sample {samples} gaps at lambda = {params.lam:g}")


def check_value_forms(config: ExperimentConfig, replications: int) -> Verdict:
    """Largest disagreement between the two value forms over random parameters."""
    samples = config.samples or VALUE_SAMPLES
    tolerance = config.tolerance or AGREEMENT_TOLERANCE
    rng = np.random.default_rng(config.seed)
    draws = zip(rng.uniform(0.1, 5.0, samples), rng.uniform(0.01, 5.0, samples), rng.uniform(0.01, 1.0, samples))
    worst = 0.0
    for lam, t, p in draws:
        try:
            forms = game_value_forms(GameParams(float(lam), float(t), float(p)))
        except FormulaMismatchError:
            worst = float("inf")
            break
        worst = max(worst, abs(forms.case_form - forms.concise_form))
    return Verdict(worst, f"<= {tolerance:g}", worst <= tolerance)


def check_lemma_oracle(config: ExperimentConfig, replications: int) -> Verdict:
    """Largest gap between the two-point minimizer and exhaustive enumeration."""
    samples = config.samples or LEMMA_SAMPLES
    tolerance = config.tolerance or AGREEMENT_TOLERANCE
    rng = np.random.default_rng(config.seed)
    worst = 0.0
    for c, p in zip(rng.uniform(0.0, LEMMA_MAX_MEAN, samples), rng.uniform(0.01, 1.0, samples)):
        closed = expected_miss(optimal_count_distribution(float(c)), float(p))
        oracle, _ = lemma_oracle(float(c), float(p), max(settings.max_support, int(LEMMA_MAX_MEAN)))
        # the oracle is a minimum, so any enumerated law beating the closed form shows up here
        worst = max(worst, abs(closed - oracle))
    return Verdict(worst, f"<= {tolerance:g}", worst <= tolerance)


def check_rerun(config: ExperimentConfig, replications: int) -> Verdict:
    """Two runs with the same seed and replications give byte-identical payloads."""
    first = _measure(config, replications)
    second = _measure(config, replications)
    same = simulation_payload(config, first).encode() == simulation_payload(config, second).encode()
    return Verdict(first.estimate, "identical payloads", same)


CHECKS: dict[str, Callable[[ExperimentConfig, int], Verdict]] = {
    "estimate": check_estimate,
    "mean_passes": check_mean_passes,
    "pass_pmf": check_pass_pmf,
    "paired_gap": check_paired_gap,
    "rate_cap": check_rate_cap,
    "gap_ks": check_gap_ks,
    "value_forms": check_value_forms,
    "lemma_oracle": check_lemma_oracle,
    "rerun": check_rerun,
}


def run_experiment(config: ExperimentConfig, replications: int | None = None) -> ReproOutcome:
    """Run one config's check and time it against its `max_seconds` budget."""
    started = time.perf_counter()
    verdict = CHECKS[config.check](config, replications or config.replications)
    return ReproOutcome(
        name=config.name or config.command,
        check=config.check,
        observed=verdict.observed,
        target=verdict.target,
        passed=verdict.passed,
        seconds=time.perf_counter() - started,
        max_seconds=config.max_seconds,
    )


def load_repro_dir(directory: Path) -> list[ExperimentConfig]:
    configs = []
    # schedule specs live in a subdirectory, so only experiments match here
    for path in sorted(directory.glob("*.json")):
        data = load_config_file(path)
        data.setdefault("name", path.stem)
        configs.append(build_config(data))
    if not configs:
        raise InvalidParamsError(f"No experiment configs found in {directory}")
    return configs


def _status(outcome: ReproOutcome) -> str:
    if not outcome.passed:
        return "[red]FAIL[/red]"
    if not outcome.in_time:
        return "[red]SLOW[/red]"
    return "[green]PASS[/green]"


@click.command(name="repro")
@click.option("--dir", "directory", type=click.Path(exists=True, file_okay=False), default="repro",
              show_default=True, help="Directory of experiment configs")
@click.option("--replications", type=int, default=None, help="Override every config's replication count")
@click.option("--only", default=None, help="Run only configs whose name contains this text")
@handle_errors
def cmd_repro(directory, replications, only):
    """Run bundled experiments and compare each with its expected value"""

    configs = load_repro_dir(Path(directory))
    if only:
        configs = [c for c in configs if only in (c.name or "")]

    print_header("repro")
    table = Table(title=f"Reproduction runs in {directory}")
    table.add_column("Experiment", style="cyan")
    table.add_column("Check", style="white")
    table.add_column("Observed", style="white")
    table.add_column("Target", style="white")
    table.add_column("Time", style="yellow")
    table.add_column("Status")

    failures = 0
    for config in configs:
        console.print(f"[cyan]Running {config.name} (seed {config.seed})...[/cyan]")
        outcome = run_experiment(config, replications)
        failures += not outcome.ok
        budget = f" / {outcome.max_seconds:g}s" if outcome.max_seconds is not None else ""
        table.add_row(
            outcome.name,
            outcome.check,
            f"{outcome.observed:.6g}",
            outcome.target,
            f"{outcome.seconds:.2f}s{budget}",
            _status(outcome),
        )
    console.print(table)

    if failures:
        console.print(f"[red]✗ {failures} of {len(configs)} experiments failed[/red]")
        click.get_current_context().exit(EXIT_RUNTIME)
    console.print(f"[green]✓ All {len(configs)} experiments passed[/green]")
