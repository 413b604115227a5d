"""Side-by-side comparison of (generator, strategy) pairs under common random numbers."""

import logging
from dataclasses import dataclass
from itertools import combinations

from src.attackers.strategies import AttackerStrategy
from src.config import settings
from src.engine.simulation import SimulationResult, run_replications, summarize
from src.engine.stats import paired_difference
from src.models.params import GameParams
from src.schedules.generators import ScheduleGenerator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComparisonRow:
    rank: int
    label: str
    result: SimulationResult


@dataclass(frozen=True)
class PairwiseDifference:
    """Estimate of `first` minus estimate of `second`, with a paired CI."""
    first: str
    second: str
    difference: float
    standard_error: float
    ci_half_width: float


@dataclass(frozen=True)
class ComparisonTable:
    rows: list[ComparisonRow]
    differences: list[PairwiseDifference]

    def as_dict(self) -> dict:
        return {
            "rows": [
                {"rank": row.rank, "label": row.label, **row.result.model_dump(mode="json")}
                for row in self.rows
            ],
            "differences": [vars(d) for d in self.differences],
        }


def pair_label(generator: ScheduleGenerator, strategy: AttackerStrategy) -> str:
    return f"{generator.label}+{strategy.label}"


def compare_strategies(
    pairs: list[tuple[ScheduleGenerator, AttackerStrategy]],
    params: GameParams,
    replications: int | None = None,
    seed: int | None = None,
    workers: int | None = None,
) -> ComparisonTable:
    """Estimate every pair with the same seed and rank them by detection probability.

    Shared seeds make replication i of every pair use the same substreams, so pairwise
    differences are estimated from paired outcomes.
    """
    replications = settings.replications if replications is None else replications
    seed = settings.seed if seed is None else seed

    runs = []
    for generator, strategy in pairs:
        outcomes = run_replications(generator, strategy, params, replications, seed, workers)
        result = summarize(outcomes, generator, strategy, params, seed)
        runs.append((pair_label(generator, strategy), outcomes, result))

    differences = []
    for (label_a, out_a, _), (label_b, out_b, _) in combinations(runs, 2):
        diff, se, half = paired_difference(out_a.detected, out_b.detected, settings.ci_level)
        differences.append(PairwiseDifference(label_a, label_b, diff, se, half))

    ranked = sorted(runs, key=lambda run: -run[2].estimate)
    rows = [ComparisonRow(rank=i + 1, label=label, result=result) for i, (label, _, result) in enumerate(ranked)]
    logger.info(f"Compared {len(rows)} pairs; best: {rows[0].label if rows else 'none'}")
    return ComparisonTable(rows=rows, differences=differences)
