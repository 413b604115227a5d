"""Seeded Monte Carlo estimation of detection probabilities.

Replications run in fixed-size blocks that share vectorized draws. Streams are keyed by
(seed, block), so results do not depend on how blocks are split across worker processes.
"""

import logging
import math
from dataclasses import dataclass
from multiprocessing import Pool

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.attackers.strategies import AttackerStrategy
from src.config import SCHEMA_VERSION, settings
from src.engine.stats import confidence_half_width, z_score
from src.errors import InsufficientPassesError, InvalidParamsError
from src.models.distribution import CountDistribution
from src.models.params import GameParams
from src.models.perimeter import DispatchBatch, PatrollerTag, PerimeterPoint
from src.schedules.generators import ScheduleGenerator

logger = logging.getLogger(__name__)

NOT_DETECTED = -1
BLOCK_SIZE = 1024
DETECTION_SLACK = 8


class SimulationResult(BaseModel):
    """Aggregated outcome of one (generator, strategy) Monte Carlo run."""
    model_config = ConfigDict(frozen=True)

    schema_version: int = SCHEMA_VERSION
    generator: str
    strategy: str
    lam: float
    t: float
    p: float
    replications: int
    detections: int
    estimate: float
    ci_level: float
    ci_half_width: float
    standard_error: float
    seed: int
    pass_counts: dict[int, int]
    pass_pmf: dict[int, float]
    detections_by_tag: dict[str, int]

    def pass_distribution(self) -> CountDistribution:
        return CountDistribution.from_counts(self.pass_counts)

    def mean_passes(self) -> float:
        return sum(n * c for n, c in self.pass_counts.items()) / self.replications

    def pass_count_standard_error(self) -> float:
        mean = self.mean_passes()
        second = sum(n * n * c for n, c in self.pass_counts.items()) / self.replications
        variance = max(second - mean * mean, 0.0)
        return (variance / self.replications) ** 0.5


@dataclass(frozen=True)
class Outcomes:
    """Per-replication outcomes, in replication order."""
    detected: np.ndarray
    passes: np.ndarray
    first_detector: np.ndarray


@dataclass(frozen=True)
class _Block:
    generator: ScheduleGenerator
    strategy: AttackerStrategy
    params: GameParams
    seed: int
    index: int
    size: int
    max_doublings: int


def block_streams(seed: int, block: int) -> tuple[np.random.Generator, ...]:
    """Independent schedule, attacker and detection streams for one block of replications."""
    root = np.random.SeedSequence([seed, block])
    return tuple(np.random.default_rng(child) for child in root.spawn(3))


def detection_columns(params: GameParams) -> int:
    """Detection uniforms held per replication; enough for all but far-tail pass counts.

    The width depends on the parameters only, so every pairing of generator and strategy
    reads the same uniform for the same pass rank of the same replication.
    """
    return math.ceil(params.load + 6 * math.sqrt(params.load)) + DETECTION_SLACK


def _overflow_uniforms(seed: int, index: int, count: int) -> np.ndarray:
    return np.random.default_rng(np.random.SeedSequence([seed, index, 1])).random(count)


def _attack_starts(
    block: _Block,
    schedule_rng: np.random.Generator,
    attack_rng: np.random.Generator,
) -> list[tuple[np.ndarray, DispatchBatch, np.ndarray]]:
    """Sample every row's dispatch stretch and pick its attack start.

    A row only needs the dispatches in [anchor - max_lap, anchor + reach): earlier ones
    pass the point before the anchor and later ones after the window. After-pass rows
    whose k-th pass comes too late get their stretch extended with doubled reach.

    Returns:
        Groups of (row indices, their dispatch stretches, their start times).

    Raises:
        InsufficientPassesError: If rows still lack passes after the allowed doublings.
    """
    generator, strategy, params = block.generator, block.strategy, block.params
    offsets = generator.draw_offsets(BLOCK_SIZE, schedule_rng)
    anchors = strategy.anchors(generator, BLOCK_SIZE, attack_rng)
    reach = strategy.reach(generator, params)
    limits = anchors + reach
    batch = generator.sample_batch(anchors - generator.max_lap_time, limits, offsets, schedule_rng)
    rows = np.arange(BLOCK_SIZE)
    if not strategy.is_reactive:
        return [(rows, batch, anchors)]

    groups = []
    for _ in range(block.max_doublings + 1):
        starts, fits = strategy.after_pass_starts(
            batch.arrival_times(strategy.point), anchors[rows], limits[rows], params
        )
        groups.append((rows[fits], batch.rows(fits), starts[fits]))
        if fits.all():
            return groups
        rows, batch = rows[~fits], batch.rows(~fits)
        reach *= 2
        extended = anchors[rows] + reach
        batch = batch.extend(generator.sample_batch(limits[rows], extended, offsets[rows], schedule_rng))
        limits[rows] = extended
    raise InsufficientPassesError(
        f"{len(rows)} replication(s) of block {block.index} still lacked passes after "
        f"{block.max_doublings} reach doublings"
    )


def _rank_tags(batch: DispatchBatch, starts: np.ndarray, point: PerimeterPoint, duration: float):
    """Pass counts in [start, start + duration) and the passing tags in arrival order."""
    arrivals = batch.arrival_times(point)
    inside = (arrivals >= starts[:, None]) & (arrivals < (starts + duration)[:, None])
    order = np.argsort(np.where(inside, arrivals, np.inf), axis=1, kind="stable")
    return np.count_nonzero(inside, axis=1), np.take_along_axis(batch.tags, order, axis=1)


def _run_block(block: _Block) -> Outcomes:
    schedule_rng, attack_rng, detect_rng = block_streams(block.seed, block.index)
    # one Bernoulli(p) trial per pass, matched to uniforms by arrival rank
    uniforms = detect_rng.random((BLOCK_SIZE, detection_columns(block.params)))
    p = block.params.p

    detected = np.zeros(BLOCK_SIZE, dtype=bool)
    passes = np.zeros(BLOCK_SIZE, dtype=np.int64)
    first = np.full(BLOCK_SIZE, NOT_DETECTED, dtype=np.int8)
    for rows, batch, starts in _attack_starts(block, schedule_rng, attack_rng):
        counts, ranked = _rank_tags(batch, starts, block.strategy.point, block.params.t)
        width = min(uniforms.shape[1], ranked.shape[1])
        hits = (np.arange(width) < counts[:, None]) & (uniforms[rows, :width] < p)
        found = hits.any(axis=1)
        rank = np.argmax(hits, axis=1)
        tags = np.where(found, ranked[np.arange(len(rows)), rank], NOT_DETECTED)

        for i in np.flatnonzero(~found & (counts > width)):
            index = block.index * BLOCK_SIZE + rows[i]
            late = np.flatnonzero(_overflow_uniforms(block.seed, index, counts[i] - width) < p)
            if late.size:
                found[i], tags[i] = True, ranked[i, width + late[0]]

        detected[rows], passes[rows], first[rows] = found, counts, tags

    keep = slice(0, block.size)
    return Outcomes(detected=detected[keep], passes=passes[keep], first_detector=first[keep])


def run_replications(
    generator: ScheduleGenerator,
    strategy: AttackerStrategy,
    params: GameParams,
    replications: int,
    seed: int,
    workers: int | None = None,
) -> Outcomes:
    """Run all replications and return their outcomes in index order.

    Replications run in fixed blocks of BLOCK_SIZE with streams keyed by (seed, block),
    so the outcome of replication i depends on (seed, i) only.
    """
    workers = settings.workers if workers is None else workers
    if replications < 1:
        raise InvalidParamsError(f"replications must be >= 1, got {replications}")
    if seed < 0:
        raise InvalidParamsError(f"seed must be >= 0, got {seed}")

    blocks = [
        _Block(generator, strategy, params, seed, start // BLOCK_SIZE,
               min(BLOCK_SIZE, replications - start), settings.max_horizon_doublings)
        for start in range(0, replications, BLOCK_SIZE)
    ]
    logger.info(
        f"Simulating {generator.label} vs {strategy.label}: {replications} replications "
        f"in {len(blocks)} blocks, {workers} worker(s), seed {seed}"
    )
    if workers > 1 and len(blocks) > 1:
        with Pool(processes=workers) as pool:
            parts = pool.map(_run_block, blocks)
    else:
        parts = [_run_block(block) for block in blocks]

    return Outcomes(
        detected=np.concatenate([part.detected for part in parts]),
        passes=np.concatenate([part.passes for part in parts]),
        first_detector=np.concatenate([part.first_detector for part in parts]),
    )


def summarize(
    outcomes: Outcomes,
    generator: ScheduleGenerator,
    strategy: AttackerStrategy,
    params: GameParams,
    seed: int,
    ci_level: float | None = None,
) -> SimulationResult:
    ci_level = settings.ci_level if ci_level is None else ci_level
    replications = len(outcomes.detected)
    detections = int(np.count_nonzero(outcomes.detected))
    half_width = confidence_half_width(detections, replications, ci_level)

    histogram = np.bincount(outcomes.passes)
    pass_counts = {int(n): int(c) for n, c in enumerate(histogram) if c}
    by_tag = {tag.label: int(np.count_nonzero(outcomes.first_detector == tag)) for tag in PatrollerTag}

    return SimulationResult(
        generator=generator.label,
        strategy=strategy.label,
        lam=params.lam,
        t=params.t,
        p=params.p,
        replications=replications,
        detections=detections,
        estimate=detections / replications,
        ci_level=ci_level,
        ci_half_width=half_width,
        standard_error=half_width / z_score(ci_level),
        seed=seed,
        pass_counts=pass_counts,
        pass_pmf={n: c / replications for n, c in pass_counts.items()},
        detections_by_tag=by_tag,
    )


def estimate_detection(
    generator: ScheduleGenerator,
    strategy: AttackerStrategy,
    params: GameParams,
    replications: int | None = None,
    seed: int | None = None,
    workers: int | None = None,
    ci_level: float | None = None,
) -> SimulationResult:
    """Monte Carlo estimate of the probability that `strategy`'s attack is detected.

    Each replication samples the stretch of a realization its window can reach, lets the
    strategy pick the window, counts the passes N and draws one Bernoulli(p) detection
    trial per pass.

    Raises:
        InsufficientPassesError: If an after-pass attacker never sees its k-th pass.
    """
    replications = settings.replications if replications is None else replications
    seed = settings.seed if seed is None else seed
    outcomes = run_replications(generator, strategy, params, replications, seed, workers)
    result = summarize(outcomes, generator, strategy, params, seed, ci_level)
    logger.info(
        f"{result.generator} vs {result.strategy}: estimate {result.estimate:.6f} "
        f"± {result.ci_half_width:.6f}"
    )
    return result


def empirical_pass_pmf(
    generator: ScheduleGenerator,
    strategy: AttackerStrategy,
    params: GameParams,
    replications: int | None = None,
    seed: int | None = None,
    workers: int | None = None,
) -> CountDistribution:
    """Empirical law of the pass count N under `strategy`."""
    return estimate_detection(generator, strategy, params, replications, seed, workers).pass_distribution()
