"""Best-response search over a finite family of attacker strategies."""

import logging
from dataclasses import dataclass
from typing import Iterable

from src.attackers.strategies import AttackerKind, AttackerStrategy, parse_strategy
from src.config import settings
from src.engine.simulation import SimulationResult, estimate_detection
from src.errors import StrategySpecError
from src.models.params import GameParams
from src.models.perimeter import PerimeterPoint
from src.schedules.generators import ScheduleGenerator

logger = logging.getLogger(__name__)

DEFAULT_FAMILY = ("stationary", "sweep", "after-pass")


@dataclass(frozen=True)
class BestResponseResult:
    """The candidate with the lowest detection estimate, plus every candidate's result."""
    strategy: AttackerStrategy
    worst: SimulationResult
    candidates: list[tuple[AttackerStrategy, SimulationResult]]

    @property
    def estimate(self) -> float:
        return self.worst.estimate


def phase_grid(size: int | None = None) -> list[float]:
    size = settings.phase_grid_size if size is None else size
    return [i / size for i in range(size)]


def after_pass_grid(params: GameParams, steps: int | None = None) -> list[tuple[int, float]]:
    """Pass indices 1..2(m+1) crossed with delays 0, delta/steps, ..., delta."""
    steps = settings.delay_grid_steps if steps is None else steps
    delays = [j * params.delta / steps for j in range(steps + 1)]
    return [(k, delay) for k in range(1, 2 * (params.m + 1) + 1) for delay in delays]


def strategy_family(
    params: GameParams,
    tokens: Iterable[str] = DEFAULT_FAMILY,
    point: PerimeterPoint | None = None,
) -> list[AttackerStrategy]:
    """Expand family tokens into concrete strategies.

    `sweep` becomes the phase grid and a bare `after-pass` the (k, delay) grid; any other
    token is parsed as a single strategy.
    """
    point = point or PerimeterPoint(settings.attack_point)
    family: list[AttackerStrategy] = []
    for token in tokens:
        token = token.strip()
        if token == "sweep":
            family.extend(AttackerStrategy(AttackerKind.SWEPT_PHASE, phase=phase, point=point) for phase in phase_grid())
        elif token == "after-pass":
            family.extend(
                AttackerStrategy(AttackerKind.AFTER_KTH_PASS, k=k, delay=delay, point=point)
                for k, delay in after_pass_grid(params)
            )
        elif token:
            family.append(parse_strategy(token, point))
    if not family:
        raise StrategySpecError("Strategy family is empty")
    return family


def best_response_search(
    generator: ScheduleGenerator,
    params: GameParams,
    family: list[AttackerStrategy],
    replications: int | None = None,
    seed: int | None = None,
    workers: int | None = None,
) -> BestResponseResult:
    """Estimate every candidate with common random numbers and return the minimizer.

    Ties go to the earliest candidate in family order.
    """
    if not family:
        raise StrategySpecError("Strategy family is empty")
    seed = settings.seed if seed is None else seed

    candidates = []
    for strategy in family:
        result = estimate_detection(generator, strategy, params, replications, seed, workers)
        candidates.append((strategy, result))

    best_strategy, best_result = min(candidates, key=lambda pair: pair[1].estimate)
    logger.info(
        f"Best response to {generator.label} among {len(family)} candidates: "
        f"{best_strategy.label} at {best_result.estimate:.6f}"
    )
    return BestResponseResult(strategy=best_strategy, worst=best_result, candidates=candidates)
