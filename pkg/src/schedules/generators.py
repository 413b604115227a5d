"""Defender strategies as samplers of schedule realizations."""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.errors import HorizonTooShortError, InvalidParamsError
from src.models.params import GameParams
from src.models.perimeter import (
    DEFAULT_SPEED,
    Direction,
    DispatchBatch,
    DispatchEvent,
    PatrollerTag,
    ScheduleRealization,
    SpeedProfile,
)

logger = logging.getLogger(__name__)


class GeneratorKind(str, Enum):
    OPTIMAL = "optimal"
    DETERMINISTIC = "deterministic"
    POISSON = "poisson"
    UNIFORM_OFFSET = "uniform-offset"
    FILE = "file"


@dataclass(frozen=True)
class RoutingPolicy:
    """How each dispatched patroller picks its direction and speed profile.

    Attributes:
        counterclockwise_fraction: Probability that a patroller goes counterclockwise.
        profiles: Speed palette; each patroller draws one uniformly.
    """
    counterclockwise_fraction: float = 0.0
    profiles: tuple[SpeedProfile, ...] = (DEFAULT_SPEED,)

    def __post_init__(self):
        if not (0.0 <= self.counterclockwise_fraction <= 1.0):
            raise InvalidParamsError(
                f"counterclockwise_fraction must lie in [0, 1], got {self.counterclockwise_fraction}"
            )
        if not self.profiles:
            raise InvalidParamsError("Routing policy needs at least one speed profile")

    @property
    def max_lap_time(self) -> float:
        return max(p.lap_time for p in self.profiles)

    def assign(
        self, n: int | tuple[int, ...], rng: np.random.Generator | None
    ) -> tuple[np.ndarray, np.ndarray]:
        """Directions (True = clockwise) and palette indices for `n` patrollers (or an array shape)."""
        if self.counterclockwise_fraction == 0.0:
            clockwise = np.ones(n, dtype=bool)
        elif self.counterclockwise_fraction == 1.0:
            clockwise = np.zeros(n, dtype=bool)
        else:
            clockwise = rng.random(n) >= self.counterclockwise_fraction
        if len(self.profiles) == 1:
            index = np.zeros(n, dtype=np.int64)
        else:
            index = rng.integers(0, len(self.profiles), size=n)
        return clockwise, index


DEFAULT_ROUTING = RoutingPolicy()


@dataclass(frozen=True)
class DispatchPattern:
    """A user-declared cycle of dispatches repeated every `period` time units."""
    period: float
    dispatches: tuple[DispatchEvent, ...]

    def __post_init__(self):
        if not self.period > 0:
            raise InvalidParamsError(f"Pattern period must be > 0, got {self.period}")
        if not self.dispatches:
            raise InvalidParamsError("Pattern needs at least one dispatch")
        for event in self.dispatches:
            if event.dispatch_time >= self.period:
                raise InvalidParamsError(
                    f"Pattern offset {event.dispatch_time} must be smaller than the period {self.period}"
                )
        ordered = tuple(sorted(self.dispatches, key=lambda e: e.dispatch_time))
        object.__setattr__(self, "dispatches", ordered)

    @property
    def rate(self) -> float:
        return len(self.dispatches) / self.period

    @property
    def max_lap_time(self) -> float:
        return max(e.speed.lap_time for e in self.dispatches)

    @property
    def profiles(self) -> tuple[SpeedProfile, ...]:
        """Distinct speed profiles, in order of first use."""
        return tuple(dict.fromkeys(e.speed for e in self.dispatches))


def _realize(
    horizon: float,
    times: np.ndarray,
    tags: np.ndarray,
    routing: RoutingPolicy,
    rng: np.random.Generator | None,
) -> ScheduleRealization:
    order = np.argsort(times, kind="stable")
    times, tags = times[order], tags[order]
    clockwise, index = routing.assign(len(times), rng)
    return ScheduleRealization(
        horizon=horizon,
        dispatch_times=times,
        clockwise=clockwise,
        profile_index=index,
        tags=tags,
        profiles=routing.profiles,
    )


def _lattice(lam: float, horizon: float, offset: float = 0.0) -> np.ndarray:
    count = math.ceil((horizon - offset) * lam) + 1
    times = offset + np.arange(max(count, 0)) / lam
    return times[times < horizon]


def sample_deterministic(
    lam: float,
    horizon: float,
    routing: RoutingPolicy = DEFAULT_ROUTING,
    rng: np.random.Generator | None = None,
) -> ScheduleRealization:
    """Dispatches at k / lambda for k = 0, 1, ... below the horizon."""
    times = _lattice(lam, horizon)
    return _realize(horizon, times, np.full(len(times), PatrollerTag.PLAIN), routing, rng)


def sample_optimal(
    params: GameParams,
    horizon: float,
    rng: np.random.Generator,
    routing: RoutingPolicy = DEFAULT_ROUTING,
) -> ScheduleRealization:
    """Blue/red schedule that guarantees the game value.

    Every period j (of length t) carries m blue dispatches at j*t + k*delta, k = 1..m,
    with delta = t / (m + 1), and one red dispatch at j*t present independently with
    probability r. When lambda * t is an integer this is the 1/lambda lattice.

    Raises:
        HorizonTooShortError: If the horizon is shorter than one attack.
    """
    if horizon < params.t:
        raise HorizonTooShortError(f"Horizon {horizon} is shorter than the attack time {params.t}")
    if params.is_integer_load:
        return sample_deterministic(params.lam, horizon, routing, rng)

    t, m, delta = params.t, params.m, params.delta
    periods = np.arange(math.ceil(horizon / t) + 1)
    red_slots = periods * t
    red_slots = red_slots[red_slots < horizon]
    present = rng.random(len(red_slots)) < params.r
    reds = red_slots[present]

    ks = np.arange(1, m + 1)
    blues = (periods[:, None] * t + ks[None, :] * delta).ravel()
    blues = blues[blues < horizon]

    times = np.concatenate([reds, blues])
    tags = np.concatenate([
        np.full(len(reds), PatrollerTag.RED),
        np.full(len(blues), PatrollerTag.BLUE),
    ])
    return _realize(horizon, times, tags, routing, rng)


def sample_poisson(
    lam: float,
    horizon: float,
    rng: np.random.Generator,
    routing: RoutingPolicy = DEFAULT_ROUTING,
) -> ScheduleRealization:
    """Homogeneous Poisson dispatches built from exponential interarrival times."""
    expected = lam * horizon
    batch = int(expected + 4 * math.sqrt(expected)) + 16
    chunks = []
    elapsed = 0.0
    while elapsed < horizon:
        arrivals = elapsed + np.cumsum(rng.exponential(1.0 / lam, size=batch))
        chunks.append(arrivals)
        elapsed = arrivals[-1]
    times = np.concatenate(chunks)
    times = times[times < horizon]
    return _realize(horizon, times, np.full(len(times), PatrollerTag.PLAIN), routing, rng)


def sample_uniform_offset(
    lam: float,
    horizon: float,
    rng: np.random.Generator,
    routing: RoutingPolicy = DEFAULT_ROUTING,
) -> ScheduleRealization:
    """The 1/lambda lattice shifted by an offset drawn uniformly from [0, 1/lambda)."""
    offset = rng.uniform(0.0, 1.0 / lam)
    times = _lattice(lam, horizon, offset)
    return _realize(horizon, times, np.full(len(times), PatrollerTag.PLAIN), routing, rng)


def sample_pattern(pattern: DispatchPattern, horizon: float) -> ScheduleRealization:
    """Repeat a declared dispatch cycle from time 0 up to the horizon."""
    cycles = math.ceil(horizon / pattern.period) + 1
    events = [
        DispatchEvent(
            dispatch_time=j * pattern.period + e.dispatch_time,
            direction=e.direction,
            speed=e.speed,
            tag=e.tag,
        )
        for j in range(cycles)
        for e in pattern.dispatches
        if j * pattern.period + e.dispatch_time < horizon
    ]
    return ScheduleRealization.from_events(horizon, events)


def _clip(times: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    inside = (times >= lo[:, None]) & (times < hi[:, None])
    return np.where(inside, times, np.inf)


def _routed_batch(
    times: np.ndarray,
    tags: np.ndarray | int,
    routing: RoutingPolicy,
    rng: np.random.Generator | None,
) -> DispatchBatch:
    clockwise, index = routing.assign(times.shape, rng)
    return DispatchBatch(
        times=times,
        clockwise=clockwise,
        profile_index=index,
        tags=np.broadcast_to(np.asarray(tags, dtype=np.int8), times.shape).copy(),
        profiles=routing.profiles,
    )


def batch_lattice(
    lam: float,
    lo: np.ndarray,
    hi: np.ndarray,
    offsets: np.ndarray,
    routing: RoutingPolicy = DEFAULT_ROUTING,
    rng: np.random.Generator | None = None,
) -> DispatchBatch:
    """Lattice points offset + k / lambda inside [max(lo, 0), hi), one row per offset."""
    lo = np.maximum(lo, 0.0)
    first = np.maximum(np.floor((lo - offsets) * lam), 0.0)
    width = math.ceil(float(np.max(hi - lo)) * lam) + 2
    times = offsets[:, None] + (first[:, None] + np.arange(width)) / lam
    return _routed_batch(_clip(times, lo, hi), PatrollerTag.PLAIN, routing, rng)


def batch_optimal(
    params: GameParams,
    lo: np.ndarray,
    hi: np.ndarray,
    rng: np.random.Generator,
    routing: RoutingPolicy = DEFAULT_ROUTING,
) -> DispatchBatch:
    """The blue/red schedule restricted to [max(lo, 0), hi), one row per stretch.

    Red coins are drawn only for the red slots inside each stretch, so adjoining
    stretches of one row combine into a single realization.
    """
    if params.is_integer_load:
        return batch_lattice(params.lam, lo, hi, np.zeros(len(lo)), routing, rng)

    t, m, delta = params.t, params.m, params.delta
    lo = np.maximum(lo, 0.0)
    count = math.ceil(float(np.max(hi - lo)) / t) + 2
    periods = np.floor(lo / t)[:, None] + np.arange(count)
    reds = periods * t
    reds = np.where(rng.random(reds.shape) < params.r, reds, np.inf)
    ks = np.arange(1, m + 1)
    blues = (periods[:, :, None] * t + ks * delta).reshape(len(lo), -1)

    times = np.concatenate([reds, blues], axis=1)
    tags = np.concatenate([
        np.full(count, PatrollerTag.RED),
        np.full(count * m, PatrollerTag.BLUE),
    ])
    return _routed_batch(_clip(times, lo, hi), tags, routing, rng)


def batch_poisson(
    lam: float,
    lo: np.ndarray,
    hi: np.ndarray,
    rng: np.random.Generator,
    routing: RoutingPolicy = DEFAULT_ROUTING,
) -> DispatchBatch:
    """Poisson dispatches on [max(lo, 0), hi): a Poisson count of uniform points per row."""
    lo = np.maximum(lo, 0.0)
    span = hi - lo
    counts = rng.poisson(lam * span)
    width = max(int(counts.max()), 1)
    times = lo[:, None] + rng.random((len(lo), width)) * span[:, None]
    times = np.where(np.arange(width) < counts[:, None], times, np.inf)
    return _routed_batch(_clip(times, lo, hi), PatrollerTag.PLAIN, routing, rng)


def batch_pattern(pattern: DispatchPattern, lo: np.ndarray, hi: np.ndarray) -> DispatchBatch:
    """The declared dispatch cycle restricted to [max(lo, 0), hi), one row per stretch."""
    lo = np.maximum(lo, 0.0)
    count = math.ceil(float(np.max(hi - lo)) / pattern.period) + 2
    cycles = np.floor(lo / pattern.period)[:, None] + np.arange(count)
    offsets = np.array([e.dispatch_time for e in pattern.dispatches])
    times = (cycles[:, :, None] * pattern.period + offsets).reshape(len(lo), -1)

    palette = pattern.profiles
    shape = times.shape
    return DispatchBatch(
        times=_clip(times, lo, hi),
        clockwise=np.broadcast_to(
            np.tile([e.direction is Direction.CLOCKWISE for e in pattern.dispatches], count), shape
        ).copy(),
        profile_index=np.broadcast_to(
            np.tile([palette.index(e.speed) for e in pattern.dispatches], count), shape
        ).copy(),
        tags=np.broadcast_to(
            np.tile(np.array([e.tag for e in pattern.dispatches], dtype=np.int8), count), shape
        ).copy(),
        profiles=palette,
    )


@dataclass(frozen=True)
class ScheduleGenerator:
    """A defender strategy that can be sampled over any horizon.

    Attributes:
        kind: Which construction to sample.
        params: Game parameters; lambda sets the dispatch rate of the built-in kinds.
        routing: Direction/speed assignment applied to built-in kinds.
        pattern: Dispatch cycle, only for the `file` kind.
    """
    kind: GeneratorKind
    params: GameParams
    routing: RoutingPolicy = DEFAULT_ROUTING
    pattern: DispatchPattern | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GeneratorKind(self.kind))
        if (self.kind is GeneratorKind.FILE) != (self.pattern is not None):
            raise InvalidParamsError("A dispatch pattern is required by, and only by, the file kind")

    @property
    def label(self) -> str:
        return self.kind.value

    @property
    def period(self) -> float:
        """Cycle length: stationary attackers draw their phase over one period."""
        if self.kind is GeneratorKind.FILE:
            return self.pattern.period
        if self.kind is GeneratorKind.OPTIMAL and not self.params.is_integer_load:
            return self.params.t
        return 1.0 / self.params.lam

    @property
    def expected_rate(self) -> float:
        if self.kind is GeneratorKind.FILE:
            return self.pattern.rate
        return self.params.lam

    @property
    def max_lap_time(self) -> float:
        if self.kind is GeneratorKind.FILE:
            return self.pattern.max_lap_time
        return self.routing.max_lap_time

    def horizon_for(self, window_end: float) -> float:
        """Horizon that keeps a window ending at `window_end` free of truncated laps."""
        return window_end + self.max_lap_time

    def sample(self, horizon: float, rng: np.random.Generator) -> ScheduleRealization:
        match self.kind:
            case GeneratorKind.OPTIMAL:
                return sample_optimal(self.params, horizon, rng, self.routing)
            case GeneratorKind.DETERMINISTIC:
                return sample_deterministic(self.params.lam, horizon, self.routing, rng)
            case GeneratorKind.POISSON:
                return sample_poisson(self.params.lam, horizon, rng, self.routing)
            case GeneratorKind.UNIFORM_OFFSET:
                return sample_uniform_offset(self.params.lam, horizon, rng, self.routing)
            case GeneratorKind.FILE:
                return sample_pattern(self.pattern, horizon)

    def draw_offsets(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Lattice offset of `size` independent realizations; only uniform-offset draws one."""
        if self.kind is GeneratorKind.UNIFORM_OFFSET:
            return rng.uniform(0.0, 1.0 / self.params.lam, size)
        return np.zeros(size)

    def sample_batch(
        self,
        lo: np.ndarray,
        hi: np.ndarray,
        offsets: np.ndarray,
        rng: np.random.Generator,
    ) -> DispatchBatch:
        """Dispatches inside [max(lo, 0), hi) of one realization per row.

        Each row has the law of `sample` restricted to its stretch, and a later call on
        the adjoining stretch [hi, hi') with the same offsets continues the same rows.
        """
        match self.kind:
            case GeneratorKind.OPTIMAL:
                return batch_optimal(self.params, lo, hi, rng, self.routing)
            case GeneratorKind.DETERMINISTIC | GeneratorKind.UNIFORM_OFFSET:
                return batch_lattice(self.params.lam, lo, hi, offsets, self.routing, rng)
            case GeneratorKind.POISSON:
                return batch_poisson(self.params.lam, lo, hi, rng, self.routing)
            case GeneratorKind.FILE:
                return batch_pattern(self.pattern, lo, hi)
